"""Exception types shared across the package."""


class VulnmatchError(Exception):
    """Base class for all errors raised by this package."""


class MalformedUri(VulnmatchError):
    """A CPE URI binding that cannot be unbound to a well-formed name.

    Raised for a wrong prefix, too many components, an invalid part token,
    or invalid percent-encoding. Feed ingestion logs and skips entries that
    raise this; it never aborts a whole document.
    """


class MalformedFormattedString(VulnmatchError):
    """A CPE 2.3 formatted string with a bad prefix, field count, or part."""


class InvalidWfn(VulnmatchError):
    """An attribute value violating the well-formed-name invariants."""


class StreamError(VulnmatchError):
    """An I/O failure while reading a feed or dictionary source."""


class DocumentError(VulnmatchError):
    """A source document that is not well-formed XML at the top level."""


class DuplicateCveId(VulnmatchError):
    """The same CVE id occurred twice while building one snapshot."""


class NetworkError(VulnmatchError):
    """A remote feed fetch failed; callers retain the previous snapshot."""


class FeedNotFound(VulnmatchError):
    """A feed descriptor points at a missing file or 404ing URL."""


class EmptyProduct(VulnmatchError):
    """Search-term generation was asked for a blank product name."""


class UnknownProduct(VulnmatchError):
    """No inventory record exists for the given product id."""


class NoSnapshot(VulnmatchError):
    """An operation needing catalog data ran before any snapshot was loaded."""


class Unassigned(VulnmatchError):
    """A scan was requested for a product that has no CPE assignment."""


class AlreadyDecided(VulnmatchError):
    """An alert decision targeted an alert that is no longer pending."""


class UnknownAlert(VulnmatchError):
    """An alert id or group id that does not resolve to any alert."""


class FormatError(VulnmatchError):
    """A malformed row in an inventory import file."""


class EmptyFile(VulnmatchError):
    """An inventory import file with no usable rows."""
