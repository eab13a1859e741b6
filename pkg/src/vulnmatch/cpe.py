"""CPE name handling: well-formed names and their URI / formatted-string bindings.

A well-formed name (``Wfn``) is the 11-attribute logical form every comparison
in this package operates on. The two textual bindings are the CPE 2.2 URI
(``cpe:/...``) and the CPE 2.3 formatted string (``cpe:2.3:...``). Parsing is
case-insensitive: all input is lowercased, and the logical values ANY and NA
stand in for absent or not-applicable attributes, so a parsed value never
holds an empty string.

Wildcard characters ``*`` and ``?`` inside attribute text are preserved
verbatim; their matching semantics live in :mod:`vulnmatch.matching`.

Real-world URIs (and the NVD data itself) write wildcard versions such as
``8.*`` with a literal asterisk, so binding leaves ``*`` and ``?`` unencoded
and unbinding additionally accepts their ``%02`` / ``%01`` encoded forms.
Likewise the tilde-packed component accepts a language token in its leading
slot (``en~-~~windows~x86~``), a form that occurs in the wild alongside the
plain leading-tilde pack.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .errors import InvalidWfn, MalformedFormattedString, MalformedUri

__all__ = [
    "ANY",
    "NA",
    "AttributeValue",
    "CpeUri",
    "FormattedString",
    "ValueKind",
    "WFN_ATTRIBUTES",
    "Wfn",
    "bind_to_formatted_string",
    "bind_to_uri",
    "unbind_formatted_string",
    "unbind_uri",
    "wfn_from_text",
    "wfn_to_text",
]

WFN_ATTRIBUTES = (
    "part",
    "vendor",
    "product",
    "version",
    "update",
    "edition",
    "language",
    "sw_edition",
    "target_sw",
    "target_hw",
    "other",
)

_PART_TOKENS = frozenset("aoh")

# Characters emitted verbatim by the URI binding; everything else is
# percent-encoded. Wildcards stay literal (see module docstring).
_URI_SAFE = frozenset("abcdefghijklmnopqrstuvwxyz0123456789._-*?")

_HEX_DIGITS = frozenset("0123456789abcdef")


class ValueKind(enum.Enum):
    ANY = "ANY"
    NA = "NA"
    STRING = "STRING"


@dataclass(frozen=True, slots=True)
class AttributeValue:
    """One WFN attribute: the logical value ANY, NA, or a lowercase token."""

    kind: ValueKind
    text: str | None = None

    def __post_init__(self) -> None:
        if self.kind is ValueKind.STRING:
            text = self.text
            if not text:
                raise InvalidWfn("STRING attribute value must be non-empty")
            if text != text.lower():
                raise InvalidWfn(f"attribute value must be lowercase: {text!r}")
            if any(ch.isspace() for ch in text):
                raise InvalidWfn(f"attribute value may not contain whitespace: {text!r}")
            if text in ("*", "-"):
                # A lone wildcard or hyphen is indistinguishable from the
                # logical values in both bindings.
                raise InvalidWfn(f"ambiguous attribute value: {text!r}")
        elif self.text is not None:
            raise InvalidWfn(f"{self.kind.value} carries no text")

    @property
    def is_any(self) -> bool:
        return self.kind is ValueKind.ANY

    @property
    def is_na(self) -> bool:
        return self.kind is ValueKind.NA

    @property
    def is_string(self) -> bool:
        return self.kind is ValueKind.STRING

    @staticmethod
    def string(text: str) -> "AttributeValue":
        return AttributeValue(ValueKind.STRING, text)

    def __str__(self) -> str:
        if self.kind is ValueKind.STRING:
            return self.text  # type: ignore[return-value]
        return self.kind.value


ANY = AttributeValue(ValueKind.ANY)
NA = AttributeValue(ValueKind.NA)


def _coerce(value: "AttributeValue | str | None") -> AttributeValue:
    """Accept an AttributeValue, a plain token, 'ANY'/'NA', or None (=ANY)."""
    if value is None:
        return ANY
    if isinstance(value, AttributeValue):
        return value
    if value == "ANY":
        return ANY
    if value == "NA":
        return NA
    return AttributeValue.string(value.lower())


@dataclass(frozen=True, slots=True)
class Wfn:
    """The 11-attribute well-formed CPE name.

    Every attribute is always present; ANY and NA stand in for missing data.
    Construct with ``Wfn.of(...)`` to pass plain strings.
    """

    part: AttributeValue = ANY
    vendor: AttributeValue = ANY
    product: AttributeValue = ANY
    version: AttributeValue = ANY
    update: AttributeValue = ANY
    edition: AttributeValue = ANY
    language: AttributeValue = ANY
    sw_edition: AttributeValue = ANY
    target_sw: AttributeValue = ANY
    target_hw: AttributeValue = ANY
    other: AttributeValue = ANY

    def __post_init__(self) -> None:
        if self.part.is_string and self.part.text not in _PART_TOKENS:
            raise InvalidWfn(f"part must be one of a, o, h: {self.part.text!r}")

    @staticmethod
    def of(**attrs: "AttributeValue | str | None") -> "Wfn":
        unknown = set(attrs) - set(WFN_ATTRIBUTES)
        if unknown:
            raise InvalidWfn(f"unknown WFN attributes: {sorted(unknown)}")
        return Wfn(**{name: _coerce(value) for name, value in attrs.items()})

    def get(self, name: str) -> AttributeValue:
        return getattr(self, name)

    def replace(self, **attrs: "AttributeValue | str | None") -> "Wfn":
        values = {name: self.get(name) for name in WFN_ATTRIBUTES}
        values.update({name: _coerce(value) for name, value in attrs.items()})
        return Wfn(**values)


@dataclass(frozen=True, slots=True)
class CpeUri:
    """A CPE 2.2 URI binding, e.g. ``cpe:/a:mozilla:firefox:38.0``."""

    raw: str

    def __post_init__(self) -> None:
        if not self.raw.lower().startswith("cpe:/"):
            raise MalformedUri(f"not a CPE URI: {self.raw!r}")

    def __str__(self) -> str:
        return self.raw


@dataclass(frozen=True, slots=True)
class FormattedString:
    """A CPE 2.3 formatted-string binding, e.g. ``cpe:2.3:a:mozilla:firefox:...``."""

    raw: str

    def __post_init__(self) -> None:
        if not self.raw.lower().startswith("cpe:2.3:"):
            raise MalformedFormattedString(f"not a CPE formatted string: {self.raw!r}")

    def __str__(self) -> str:
        return self.raw


def _decode_uri_component(component: str) -> AttributeValue:
    """Percent-decode one URI component into an attribute value."""
    if component == "":
        return ANY
    if component == "-":
        return NA
    out: list[str] = []
    pending = bytearray()  # consecutive %xx bytes, decoded as UTF-8 together

    def flush() -> None:
        if pending:
            try:
                out.append(pending.decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise MalformedUri(f"invalid percent-encoding in {component!r}") from exc
            pending.clear()

    i = 0
    while i < len(component):
        ch = component[i]
        if ch == "%":
            code = component[i + 1 : i + 3]
            if len(code) != 2 or not set(code) <= _HEX_DIGITS:
                raise MalformedUri(f"invalid percent-encoding in {component!r}")
            value = int(code, 16)
            if value == 0x01:
                flush()
                out.append("?")
            elif value == 0x02:
                flush()
                out.append("*")
            else:
                pending.append(value)
            i += 3
        else:
            flush()
            out.append(ch)
            i += 1
    flush()
    text = "".join(out)
    if text == "*":
        return ANY
    if text == "-":
        return NA
    try:
        return AttributeValue.string(text)
    except InvalidWfn as exc:
        raise MalformedUri(str(exc)) from exc


def _encode_uri_component(value: AttributeValue) -> str:
    if value.is_any:
        return ""
    if value.is_na:
        return "-"
    out: list[str] = []
    for ch in value.text:  # type: ignore[union-attr]
        if ch in _URI_SAFE:
            out.append(ch)
        else:
            out.extend(f"%{byte:02x}" for byte in ch.encode("utf-8"))
    return "".join(out)


def unbind_uri(uri: "CpeUri | str") -> Wfn:
    """Convert a CPE 2.2 URI into its well-formed name.

    Empty or absent trailing components map to ANY and ``-`` maps to NA.
    The sixth component may be a tilde-packed group carrying edition,
    sw_edition, target_sw, target_hw, and other, optionally preceded by the
    language token.

    Raises MalformedUri for a wrong prefix, more than seven components, an
    invalid part token, or invalid percent-encoding.
    """
    raw = uri.raw if isinstance(uri, CpeUri) else uri
    lowered = raw.strip().lower()
    if not lowered.startswith("cpe:/"):
        raise MalformedUri(f"not a CPE URI: {raw!r}")
    body = lowered[len("cpe:/") :]
    components = body.split(":")
    if len(components) > 7:
        raise MalformedUri(f"too many components ({len(components)}) in {raw!r}")
    components += [""] * (7 - len(components))
    part_raw, vendor_raw, product_raw, version_raw, update_raw, edition_raw, language_raw = components

    attrs: dict[str, AttributeValue] = {
        "part": _decode_uri_component(part_raw),
        "vendor": _decode_uri_component(vendor_raw),
        "product": _decode_uri_component(product_raw),
        "version": _decode_uri_component(version_raw),
        "update": _decode_uri_component(update_raw),
    }
    if attrs["part"].is_string and attrs["part"].text not in _PART_TOKENS:
        raise MalformedUri(f"invalid part token {attrs['part'].text!r} in {raw!r}")

    language = _decode_uri_component(language_raw)
    if "~" in edition_raw:
        slots = edition_raw.split("~")
        if len(slots) != 6:
            raise MalformedUri(f"malformed packed component {edition_raw!r} in {raw!r}")
        packed_language = _decode_uri_component(slots[0])
        if not packed_language.is_any:
            if not language.is_any:
                raise MalformedUri(f"language given twice in {raw!r}")
            language = packed_language
        attrs["edition"] = _decode_uri_component(slots[1])
        attrs["sw_edition"] = _decode_uri_component(slots[2])
        attrs["target_sw"] = _decode_uri_component(slots[3])
        attrs["target_hw"] = _decode_uri_component(slots[4])
        attrs["other"] = _decode_uri_component(slots[5])
    else:
        attrs["edition"] = _decode_uri_component(edition_raw)
    attrs["language"] = language

    try:
        return Wfn(**{name: attrs.get(name, ANY) for name in WFN_ATTRIBUTES})
    except InvalidWfn as exc:
        raise MalformedUri(str(exc)) from exc


def bind_to_uri(wfn: Wfn) -> CpeUri:
    """Bind a well-formed name to its CPE 2.2 URI.

    Trailing ANY components are elided. The extended attributes pack into the
    tilde component only when at least one of them is not ANY; a non-ANY
    language then rides in the pack's leading slot, which keeps
    ``unbind_uri(bind_to_uri(w)) == w`` for every name expressible as a URI.
    """
    packed_needed = any(
        not wfn.get(name).is_any for name in ("sw_edition", "target_sw", "target_hw", "other")
    )
    components = [
        _encode_uri_component(wfn.part),
        _encode_uri_component(wfn.vendor),
        _encode_uri_component(wfn.product),
        _encode_uri_component(wfn.version),
        _encode_uri_component(wfn.update),
    ]
    if packed_needed:
        components.append(
            "~".join(
                [
                    _encode_uri_component(wfn.language),
                    _encode_uri_component(wfn.edition),
                    _encode_uri_component(wfn.sw_edition),
                    _encode_uri_component(wfn.target_sw),
                    _encode_uri_component(wfn.target_hw),
                    _encode_uri_component(wfn.other),
                ]
            )
        )
    else:
        components.append(_encode_uri_component(wfn.edition))
        components.append(_encode_uri_component(wfn.language))
    while components and components[-1] == "":
        components.pop()
    return CpeUri("cpe:/" + ":".join(components))


def _split_unescaped(text: str, sep: str) -> list[str]:
    """Split on sep, honoring backslash escapes."""
    fields: list[str] = []
    current: list[str] = []
    escaped = False
    for ch in text:
        if escaped:
            current.append(ch)
            escaped = False
        elif ch == "\\":
            current.append(ch)
            escaped = True
        elif ch == sep:
            fields.append("".join(current))
            current = []
        else:
            current.append(ch)
    fields.append("".join(current))
    return fields


def _unescape(text: str) -> str:
    out: list[str] = []
    escaped = False
    for ch in text:
        if escaped:
            out.append(ch)
            escaped = False
        elif ch == "\\":
            escaped = True
        else:
            out.append(ch)
    return "".join(out)


def _decode_fs_field(field: str) -> AttributeValue:
    if field == "*":
        return ANY
    if field == "-":
        return NA
    text = _unescape(field)
    if text == "*":
        return ANY
    if text == "-":
        return NA
    try:
        return AttributeValue.string(text)
    except InvalidWfn as exc:
        raise MalformedFormattedString(str(exc)) from exc


def _encode_fs_field(value: AttributeValue) -> str:
    if value.is_any:
        return "*"
    if value.is_na:
        return "-"
    text = value.text  # type: ignore[assignment]
    return text.replace("\\", "\\\\").replace(":", "\\:")


def unbind_formatted_string(fs: "FormattedString | str") -> Wfn:
    """Convert a CPE 2.3 formatted string into its well-formed name.

    ``*`` maps to ANY, ``-`` to NA, and backslash escapes are resolved.
    Raises MalformedFormattedString when the prefix is wrong, the field count
    is not 11, or the part token is invalid.
    """
    raw = fs.raw if isinstance(fs, FormattedString) else fs
    lowered = raw.strip().lower()
    if not lowered.startswith("cpe:2.3:"):
        raise MalformedFormattedString(f"not a CPE formatted string: {raw!r}")
    fields = _split_unescaped(lowered[len("cpe:2.3:") :], ":")
    if len(fields) != 11:
        raise MalformedFormattedString(f"expected 11 fields, got {len(fields)} in {raw!r}")
    values = [_decode_fs_field(field) for field in fields]
    if values[0].is_string and values[0].text not in _PART_TOKENS:
        raise MalformedFormattedString(f"invalid part token {values[0].text!r} in {raw!r}")
    return Wfn(**dict(zip(WFN_ATTRIBUTES, values)))


def bind_to_formatted_string(wfn: Wfn) -> FormattedString:
    """Bind a well-formed name to its CPE 2.3 formatted string."""
    fields = [_encode_fs_field(wfn.get(name)) for name in WFN_ATTRIBUTES]
    return FormattedString("cpe:2.3:" + ":".join(fields))


_WFN_TEXT_PAIR = re.compile(r"\s*([a-z_]+)\s*:\s*([^,]*?)\s*(?:,|$)")


def wfn_to_text(wfn: Wfn) -> str:
    """Render a name in the attribute:value listing form, all 11 attributes."""
    return ", ".join(f"{name}:{wfn.get(name)}" for name in WFN_ATTRIBUTES)


def wfn_from_text(text: str) -> Wfn:
    """Parse the attribute:value listing form. Unlisted attributes are ANY."""
    attrs: dict[str, str] = {}
    consumed = 0
    for match in _WFN_TEXT_PAIR.finditer(text):
        name, value = match.group(1), match.group(2)
        if name not in WFN_ATTRIBUTES:
            raise InvalidWfn(f"unknown WFN attribute {name!r}")
        if not value:
            raise InvalidWfn(f"missing value for attribute {name!r}")
        attrs[name] = value
        consumed = match.end()
    if not attrs or text[consumed:].strip():
        raise InvalidWfn(f"unparsable WFN text: {text!r}")
    return Wfn.of(**{name: _parse_logical(value) for name, value in attrs.items()})


def _parse_logical(value: str) -> str:
    upper = value.upper()
    if upper in ("ANY", "NA"):
        return upper
    return value.lower()
