"""Fuzzy matching of inventory products to CPE entries and CVEs.

Three phases: search-term generation from the raw inventory strings, CPE
candidate search ranked by version affinity, and CVE search over both the
per-CVE software lists and, for CVEs that carry none, the summary text.

Name comparisons tolerate typos via edit distance. One threshold governs
both the dictionary search and the CVE search; it defaults to 2, which is
where dictionary deprecation analysis puts typo corrections.
"""

from __future__ import annotations

import enum
import hashlib
import re
from dataclasses import dataclass

from .cpe import AttributeValue, CpeUri, Wfn
from .errors import EmptyProduct, InvalidWfn
from .feeds import CatalogSnapshot, CpeDictEntry, CveEntry
from .textdist import levenshtein, within_distance

__all__ = [
    "DEFAULT_THRESHOLD",
    "CpeCandidate",
    "CveCandidate",
    "CveGroup",
    "InventoryProduct",
    "MatchOrigin",
    "SearchTerms",
    "VersionKey",
    "VersionScheme",
    "generate_search_terms",
    "group_by_cpe",
    "levenshtein",
    "match_cpe_candidates",
    "merge_candidates",
    "parse_version",
    "rank_by_version",
    "same_version",
    "search_cves_by_cpe",
    "search_cves_by_summary",
]

DEFAULT_THRESHOLD = 2

SUMMARY_PUNCTUATION = ".,;:()[]'\"!?"


@dataclass(frozen=True, slots=True)
class InventoryProduct:
    """Raw vendor/product/version strings for one inventoried product."""

    external_id: str
    vendor_raw: str
    product_raw: str
    version_raw: str

    def __post_init__(self) -> None:
        if not self.product_raw.strip():
            raise EmptyProduct(f"product {self.external_id!r} has a blank name")


@dataclass(frozen=True, slots=True)
class SearchTerms:
    vendor_terms: tuple[str, ...]
    product_terms: tuple[str, ...]


class VersionScheme(enum.Enum):
    YEAR = "YEAR"
    DOTTED = "DOTTED"
    OPAQUE = "OPAQUE"


@dataclass(frozen=True, slots=True)
class VersionKey:
    """Comparable form of a version string."""

    scheme: VersionScheme
    components: tuple["int | str", ...]
    raw: str


class MatchOrigin(enum.Enum):
    CPE_LIST = "CPE_LIST"
    SUMMARY = "SUMMARY"


@dataclass(frozen=True, slots=True)
class CpeCandidate:
    """A dictionary entry proposed for assignment, with its match evidence."""

    entry: CpeDictEntry
    rank: int
    vendor_distance: int
    product_distance: int
    version_affinity: tuple[bool, int]


@dataclass(frozen=True, slots=True)
class CveCandidate:
    """A CVE proposed for a product, with provenance.

    ``matched_cpes`` holds the matching URIs from the CVE's software list and
    is empty exactly when the match came from the summary. ``exact_version``
    is set only when some matched CPE version equals the product version
    verbatim or by wildcard; a main-version-only match leaves it false.
    """

    cve: CveEntry
    origin: MatchOrigin
    matched_cpes: tuple[CpeUri, ...] = ()
    exact_version: bool = False


@dataclass(frozen=True, slots=True)
class CveGroup:
    """CVE candidates sharing one matched-CPE set, for bulk triage."""

    group_id: str
    cpes: tuple[CpeUri, ...]
    candidates: tuple[CveCandidate, ...]


_YEAR_PATTERN = re.compile(r"(19|20)\d{2}")


def parse_version(text: str) -> VersionKey:
    """Classify a version string: a 4-digit year, a dotted version, or opaque."""
    raw = text.strip().lower()
    if _YEAR_PATTERN.fullmatch(raw):
        return VersionKey(VersionScheme.YEAR, (int(raw),), raw)
    if "." in raw:
        segments = raw.split(".")
        if any(segment.isdigit() for segment in segments):
            components = tuple(int(s) if s.isdigit() else s for s in segments)
            return VersionKey(VersionScheme.DOTTED, components, raw)
    return VersionKey(VersionScheme.OPAQUE, (raw,), raw)


def _version_like(term: str) -> bool:
    if term.isdigit():
        return True
    return parse_version(term).scheme is not VersionScheme.OPAQUE


def _term_sequence(tokens: list[str], removals: list[str]) -> tuple[str, ...]:
    """Build the search-term list for one attribute.

    Joined terms are underscore-concatenated prefixes of the token list,
    longest first, down to the single leading token; each removal (a vendor
    token found among the product tokens) contributes the prefixes of the
    list with that token dropped. Leftover single tokens follow, longest
    first, with version-like tokens last.
    """
    terms: list[str] = []
    for k in range(len(tokens), 0, -1):
        terms.append("_".join(tokens[:k]))
    for removal in removals:
        reduced = [t for t in tokens if t != removal]
        for k in range(len(reduced), 1, -1):
            terms.append("_".join(reduced[:k]))
    leftovers = [t for t in tokens if t not in terms]
    words = sorted((t for t in leftovers if not _version_like(t)), key=len, reverse=True)
    versions = [t for t in leftovers if _version_like(t)]
    seen: set[str] = set()
    ordered: list[str] = []
    for term in terms + words + versions:
        if term and term not in seen:
            seen.add(term)
            ordered.append(term)
    return tuple(ordered)


def generate_search_terms(product: InventoryProduct) -> SearchTerms:
    """Derive vendor and product search terms from the raw inventory strings.

    Both strings are split on whitespace and lowercased. Dictionary names
    sometimes repeat the vendor inside the product and sometimes omit it, so
    when a vendor token occurs among the product tokens the product terms are
    emitted with and without it.
    """
    product_tokens = product.product_raw.lower().split()
    if not product_tokens:
        raise EmptyProduct(f"product {product.external_id!r} has a blank name")
    vendor_tokens = product.vendor_raw.lower().split()
    removals = [t for t in vendor_tokens if t in product_tokens]
    return SearchTerms(
        vendor_terms=_term_sequence(vendor_tokens, []) if vendor_tokens else (),
        product_terms=_term_sequence(product_tokens, removals),
    )


def _best_distance(
    terms: tuple[str, ...], value: AttributeValue, threshold: int, guard_versions: bool
) -> int | None:
    """Smallest edit distance between any term and the attribute, or None.

    With guard_versions, version-like terms only count on exact equality:
    a bare "4.5.2" must not fuzz-match unrelated short names.
    """
    if not terms:
        return 0
    if value.is_any:
        return 0
    if value.is_na:
        return None
    text = value.text
    best: int | None = None
    for term in terms:
        if guard_versions and _version_like(term):
            if term == text:
                return 0
            continue
        if within_distance(term, text, threshold):
            distance = levenshtein(term, text)
            if best is None or distance < best:
                best = distance
                if best == 0:
                    break
    return best


def match_cpe_candidates(
    terms: SearchTerms,
    snapshot: CatalogSnapshot,
    product_version: "VersionKey | str" = "",
    threshold: int = DEFAULT_THRESHOLD,
) -> list[CpeCandidate]:
    """Search the dictionary for entries matching the terms, ranked by version.

    An entry matches when some vendor term and some product term are each
    within the threshold of the entry's vendor and product attributes; an
    empty vendor term list satisfies the vendor condition vacuously. Hits on
    deprecated entries surface as their corrected replacements.
    """
    if isinstance(product_version, str):
        product_version = parse_version(product_version)

    hits: dict[str, tuple[CpeDictEntry, int, int]] = {}
    for entry in snapshot.dictionary:
        product_distance = _best_distance(
            terms.product_terms, entry.wfn.product, threshold, guard_versions=True
        )
        if product_distance is None:
            continue
        vendor_distance = _best_distance(
            terms.vendor_terms, entry.wfn.vendor, threshold, guard_versions=False
        )
        if vendor_distance is None:
            continue

        final = entry
        if entry.deprecated:
            corrected = snapshot.entry_for_uri(snapshot.resolve_deprecation(entry.uri))
            if corrected is not None:
                final = corrected
        known = hits.get(final.uri.raw)
        if known is None:
            hits[final.uri.raw] = (final, vendor_distance, product_distance)
        else:
            hits[final.uri.raw] = (
                final,
                min(known[1], vendor_distance),
                min(known[2], product_distance),
            )

    unranked = [
        CpeCandidate(
            entry=entry,
            rank=0,
            vendor_distance=vendor_distance,
            product_distance=product_distance,
            version_affinity=_version_affinity(product_version, entry.wfn.version),
        )
        for entry, vendor_distance, product_distance in hits.values()
    ]
    return rank_by_version(unranked, product_version)


def _version_affinity(product_version: VersionKey, candidate: AttributeValue) -> tuple[bool, int]:
    """(exact equality, common leading component count) against the candidate."""
    if not candidate.is_string:
        return (False, 0)
    candidate_key = parse_version(candidate.text)
    exact = candidate_key.raw == product_version.raw
    prefix = 0
    for ours, theirs in zip(product_version.components, candidate_key.components):
        if ours != theirs:
            break
        prefix += 1
    return (exact, prefix)


def rank_by_version(
    candidates: list[CpeCandidate], product_version: "VersionKey | str"
) -> list[CpeCandidate]:
    """Stable-sort candidates by version affinity and assign 1-based ranks.

    Sort keys, in order: exact version equality, longest common leading
    version components, smaller product distance, smaller vendor distance,
    and finally the URI text. Deterministic for a fixed input.
    """
    if isinstance(product_version, str):
        product_version = parse_version(product_version)

    def sort_key(candidate: CpeCandidate):
        exact, prefix = _version_affinity(product_version, candidate.entry.wfn.version)
        return (
            not exact,
            -prefix,
            candidate.product_distance,
            candidate.vendor_distance,
            candidate.entry.uri.raw,
        )

    ordered = sorted(candidates, key=sort_key)
    return [
        CpeCandidate(
            entry=candidate.entry,
            rank=position,
            vendor_distance=candidate.vendor_distance,
            product_distance=candidate.product_distance,
            version_affinity=_version_affinity(product_version, candidate.entry.wfn.version),
        )
        for position, candidate in enumerate(ordered, start=1)
    ]


def _wildcard_match(pattern: str, text: str) -> bool:
    regex = "".join(
        ".*" if ch == "*" else "." if ch == "?" else re.escape(ch) for ch in pattern
    )
    return re.fullmatch(regex, text) is not None


def _same_version_detail(sw: VersionKey, cve_version: AttributeValue) -> tuple[bool, bool]:
    """(matches, exact). Exact means verbatim or wildcard equality."""
    if cve_version.is_any:
        return (True, False)
    if cve_version.is_na:
        return (False, False)
    pattern = cve_version.text
    if pattern == sw.raw:
        return (True, True)
    if ("*" in pattern or "?" in pattern) and _wildcard_match(pattern, sw.raw):
        return (True, True)
    pattern_key = parse_version(pattern)
    if sw.components[0] == pattern_key.components[0]:
        return (True, False)
    return (False, False)


def same_version(sw: "VersionKey | str", cve_version: AttributeValue) -> bool:
    """True when a CVE CPE version covers the product version.

    Covers: the logical value ANY, verbatim equality, wildcard patterns
    ("1.2.*" covers 1.2.3 and 1.2.3.5256), and equality of the main (first)
    version component. NA never matches a concrete version.
    """
    if isinstance(sw, str):
        sw = parse_version(sw)
    return _same_version_detail(sw, cve_version)[0]


def _similar(attribute: AttributeValue, text: str, threshold: int) -> bool:
    if attribute.is_any:
        return True
    if attribute.is_na:
        return False
    return within_distance(attribute.text, text, threshold)


def _require_assigned(assigned: Wfn) -> tuple[str, str]:
    if not (assigned.vendor.is_string and assigned.product.is_string):
        raise InvalidWfn("CVE search needs an assigned name with vendor and product")
    return assigned.vendor.text, assigned.product.text


def search_cves_by_cpe(
    assigned: Wfn, snapshot: CatalogSnapshot, threshold: int = DEFAULT_THRESHOLD
) -> list[CveCandidate]:
    """Scan every CVE's software list for entries naming the assigned product.

    A list entry matches when its product and vendor are within the threshold
    of the assigned name's and its version covers the assigned version.
    Exact-version candidates sort first; ties break on CVE id.
    """
    vendor, product = _require_assigned(assigned)
    sw_version = parse_version(assigned.version.text) if assigned.version.is_string else None

    results: list[CveCandidate] = []
    for cve in snapshot.cves:
        matched: list[CpeUri] = []
        exact = False
        for uri, wfn in cve.vuln_software:
            if not _similar(wfn.product, product, threshold):
                continue
            if not _similar(wfn.vendor, vendor, threshold):
                continue
            if sw_version is None:
                version_ok, version_exact = True, False
            else:
                version_ok, version_exact = _same_version_detail(sw_version, wfn.version)
            if not version_ok:
                continue
            matched.append(uri)
            exact = exact or version_exact
        if matched:
            results.append(
                CveCandidate(
                    cve=cve,
                    origin=MatchOrigin.CPE_LIST,
                    matched_cpes=tuple(sorted(matched, key=lambda u: u.raw)),
                    exact_version=exact,
                )
            )
    results.sort(key=lambda c: (not c.exact_version, c.cve.id))
    return results


def tokenize_summary(summary: str) -> tuple[str, ...]:
    """Lowercased whitespace tokens with sentence punctuation stripped."""
    words = []
    for token in summary.lower().split():
        word = token.strip(SUMMARY_PUNCTUATION)
        if word:
            words.append(word)
    return tuple(words)


def search_cves_by_summary(
    assigned: Wfn,
    snapshot: CatalogSnapshot,
    threshold: int = DEFAULT_THRESHOLD,
    single_word: bool = False,
) -> list[CveCandidate]:
    """Scan summaries of CVEs that carry no software list.

    A CVE matches when its summary contains a word within the threshold of
    the assigned product and a word within the threshold of the assigned
    vendor; the two witnesses may be the same word but need not be. With
    single_word=True one word must witness both at once (the strict reading).
    """
    vendor, product = _require_assigned(assigned)

    results = []
    for cve in snapshot.cves:
        if cve.vuln_software:
            continue
        words = tokenize_summary(cve.summary)
        if single_word:
            hit = any(
                within_distance(w, product, threshold) and within_distance(w, vendor, threshold)
                for w in words
            )
        else:
            hit = any(within_distance(w, product, threshold) for w in words) and any(
                within_distance(w, vendor, threshold) for w in words
            )
        if hit:
            results.append(CveCandidate(cve=cve, origin=MatchOrigin.SUMMARY))
    results.sort(key=lambda c: c.cve.id)
    return results


def merge_candidates(a: list[CveCandidate], b: list[CveCandidate]) -> list[CveCandidate]:
    """Union of both searches, keyed by CVE id.

    A CVE found by both keeps its software-list candidate. Order: exact-
    version list matches, remaining list matches, then summary matches;
    relative order within each bucket is preserved.
    """
    chosen: dict[str, CveCandidate] = {}
    for candidate in a + b:
        existing = chosen.get(candidate.cve.id)
        if existing is None:
            chosen[candidate.cve.id] = candidate
        elif (
            existing.origin is MatchOrigin.SUMMARY
            and candidate.origin is MatchOrigin.CPE_LIST
        ):
            chosen[candidate.cve.id] = candidate

    merged = list(chosen.values())
    exact = [c for c in merged if c.origin is MatchOrigin.CPE_LIST and c.exact_version]
    rest = [c for c in merged if c.origin is MatchOrigin.CPE_LIST and not c.exact_version]
    summary = [c for c in merged if c.origin is MatchOrigin.SUMMARY]
    return exact + rest + summary


def group_key(matched_cpes: tuple[CpeUri, ...]) -> str:
    """Stable id for one matched-CPE set (empty = the summary group)."""
    canonical = "\n".join(sorted(uri.raw for uri in matched_cpes)) or "summary"
    return hashlib.sha1(canonical.encode("utf-8")).hexdigest()[:12]


def group_by_cpe(candidates: list[CveCandidate]) -> list[CveGroup]:
    """Partition candidates by their matched-CPE sets for bulk triage.

    Candidates with equal CPE sets share a group; all summary matches share
    one group. Groups appear in first-candidate order, so exact-version
    groups lead when the input came from merge_candidates.
    """
    by_key: dict[str, list[CveCandidate]] = {}
    order: list[tuple[str, tuple[CpeUri, ...]]] = []
    for candidate in candidates:
        key = group_key(candidate.matched_cpes)
        if key not in by_key:
            by_key[key] = []
            order.append((key, candidate.matched_cpes))
        by_key[key].append(candidate)
    return [
        CveGroup(group_id=key, cpes=cpes, candidates=tuple(by_key[key]))
        for key, cpes in order
    ]
