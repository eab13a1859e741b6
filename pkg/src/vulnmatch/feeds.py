"""Ingest the CPE dictionary and CVE feeds into an immutable catalog snapshot.

Parsing is streaming (constant memory per entry): the real dictionary holds
well over 10^5 entries. Entries that fail to parse are logged and counted,
never silently dropped and never fatal for the document. Unknown XML elements
are ignored for forward compatibility.
"""

from __future__ import annotations

import hashlib
import io
import json
import logging
import re
from bisect import bisect_left
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator
from xml.etree import ElementTree

import requests

from .cpe import (
    CpeUri,
    FormattedString,
    Wfn,
    bind_to_uri,
    unbind_formatted_string,
    unbind_uri,
)
from .errors import (
    DocumentError,
    DuplicateCveId,
    FeedNotFound,
    MalformedFormattedString,
    MalformedUri,
    NetworkError,
    StreamError,
)

log = logging.getLogger(__name__)

CVE_ID_PATTERN = re.compile(r"CVE-\d{4}-\d{4,}", re.IGNORECASE)

SNAPSHOT_LAYOUT_VERSION = 1


@dataclass(frozen=True, slots=True)
class CpeDictEntry:
    """One dictionary product entry, with its derived well-formed name."""

    uri: CpeUri
    wfn: Wfn
    title: str = ""
    formatted: FormattedString | None = None
    deprecated: bool = False
    deprecated_by: CpeUri | None = None
    deprecation_reason: str | None = None


@dataclass(frozen=True, slots=True)
class CveEntry:
    """One CVE feed entry; vuln_software pairs each URI with its name."""

    id: str
    summary: str = ""
    published: datetime | None = None
    cvss_score: float | None = None
    vuln_software: tuple[tuple[CpeUri, Wfn], ...] = ()


@dataclass(frozen=True, slots=True)
class DictParseResult:
    entries: list[CpeDictEntry]
    skipped: int


@dataclass(frozen=True, slots=True)
class CveParseResult:
    entries: list[CveEntry]
    skipped: int


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _open_source(source) -> BinaryIO:
    if isinstance(source, bytes):
        return io.BytesIO(source)
    if isinstance(source, (str, Path)):
        try:
            return open(source, "rb")
        except OSError as exc:
            raise StreamError(f"cannot read {source}: {exc}") from exc
    return source


def _iter_elements(source, element_name: str) -> Iterator[ElementTree.Element]:
    """Yield each element with the given local name, freeing it afterwards."""
    stream = _open_source(source)
    try:
        context = ElementTree.iterparse(stream, events=("start", "end"))
        root = None
        for event, elem in context:
            if event == "start":
                if root is None:
                    root = elem
                continue
            if _local_name(elem.tag) == element_name:
                yield elem
                elem.clear()
                if root is not None:
                    # drop already-processed siblings to keep memory flat
                    for child in list(root):
                        if child is not elem:
                            root.remove(child)
    except ElementTree.ParseError as exc:
        raise DocumentError(f"not well-formed XML: {exc}") from exc
    except OSError as exc:
        raise StreamError(str(exc)) from exc
    finally:
        if stream is not source:
            stream.close()


def _parse_cpe_item(elem: ElementTree.Element) -> CpeDictEntry:
    name = elem.get("name")
    if not name:
        raise MalformedUri("cpe-item without a name attribute")
    uri = CpeUri(name.lower())
    wfn = unbind_uri(uri)

    title = ""
    formatted: FormattedString | None = None
    deprecated = elem.get("deprecated", "").lower() == "true"
    deprecated_by_raw = elem.get("deprecated_by")
    reason: str | None = None

    for child in elem.iter():
        local = _local_name(child.tag)
        if local == "title" and not title:
            title = (child.text or "").strip()
        elif local == "cpe23-item":
            fs_name = child.get("name")
            if fs_name:
                formatted = FormattedString(fs_name.lower())
        elif local == "deprecation":
            deprecated = True
        elif local == "deprecated-by":
            target = child.get("name", "")
            if target and not deprecated_by_raw:
                deprecated_by_raw = target
            if child.get("type"):
                reason = child.get("type")

    deprecated_by: CpeUri | None = None
    if deprecated_by_raw:
        lowered = deprecated_by_raw.lower()
        if lowered.startswith("cpe:2.3:"):
            deprecated_by = bind_to_uri(unbind_formatted_string(lowered))
        else:
            deprecated_by = CpeUri(lowered)
        deprecated = True
    if deprecated and reason is None:
        reason = "unspecified"
    if reason is not None:
        reason = reason.lower().replace("_", "-")

    return CpeDictEntry(
        uri=uri,
        wfn=wfn,
        title=title,
        formatted=formatted,
        deprecated=deprecated,
        deprecated_by=deprecated_by,
        deprecation_reason=reason,
    )


def parse_cpe_dictionary(source) -> DictParseResult:
    """Parse official CPE dictionary 2.3 XML into dictionary entries.

    Returns the parsed entries plus the count of skipped (unparsable) items.
    Raises DocumentError if the document itself is not well-formed and
    StreamError on I/O failure.
    """
    entries: list[CpeDictEntry] = []
    skipped = 0
    for elem in _iter_elements(source, "cpe-item"):
        try:
            entries.append(_parse_cpe_item(elem))
        except (MalformedUri, MalformedFormattedString) as exc:
            skipped += 1
            log.warning("skipping unparsable cpe-item %r: %s", elem.get("name"), exc)
    log.info("parsed %d dictionary entries (%d skipped)", len(entries), skipped)
    return DictParseResult(entries=entries, skipped=skipped)


def _parse_timestamp(text: str | None) -> datetime | None:
    if not text:
        return None
    try:
        return datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        return None


def _parse_cve_entry(elem: ElementTree.Element) -> tuple[CveEntry, int]:
    cve_id = elem.get("id", "")
    summary = ""
    published: datetime | None = None
    cvss_score: float | None = None
    software: list[tuple[CpeUri, Wfn]] = []
    skipped_uris = 0
    in_cvss = False

    for child in elem.iter():
        local = _local_name(child.tag)
        text = (child.text or "").strip()
        if local == "cve-id" and text:
            cve_id = text
        elif local == "summary":
            summary = text
        elif local == "published-datetime":
            published = _parse_timestamp(text)
        elif local == "cvss":
            in_cvss = True
        elif local == "score" and in_cvss and cvss_score is None:
            try:
                value = float(text)
            except ValueError:
                continue
            if 0.0 <= value <= 10.0:
                cvss_score = value
        elif local == "product" and text:
            try:
                uri = CpeUri(text.lower())
                software.append((uri, unbind_uri(uri)))
            except MalformedUri as exc:
                skipped_uris += 1
                log.warning("skipping unparsable CPE %r in %s: %s", text, cve_id, exc)

    cve_id = cve_id.upper()
    if not CVE_ID_PATTERN.fullmatch(cve_id):
        raise MalformedUri(f"invalid CVE id {cve_id!r}")
    entry = CveEntry(
        id=cve_id,
        summary=summary,
        published=published,
        cvss_score=cvss_score,
        vuln_software=tuple(software),
    )
    return entry, skipped_uris


def parse_cve_feed(source) -> CveParseResult:
    """Parse an NVD CVE XML 2.0 feed into CVE entries.

    Entries without a vulnerable-software list are retained: the summary
    search depends on them. Returns entries plus the skip count.
    """
    entries: list[CveEntry] = []
    skipped = 0
    for elem in _iter_elements(source, "entry"):
        try:
            entry, skipped_uris = _parse_cve_entry(elem)
        except MalformedUri as exc:
            skipped += 1
            log.warning("skipping unparsable CVE entry: %s", exc)
            continue
        skipped += skipped_uris
        entries.append(entry)
    log.info("parsed %d CVE entries (%d skipped items)", len(entries), skipped)
    return CveParseResult(entries=entries, skipped=skipped)


@dataclass(frozen=True)
class CatalogSnapshot:
    """Immutable, indexed view of one dictionary + CVE feed set.

    Equality compares content (dictionary, CVEs, deprecations), not the
    snapshot time or the derived indexes. Safe to share across threads.
    """

    dictionary: tuple[CpeDictEntry, ...]
    cves: tuple[CveEntry, ...]
    deprecation_map: dict[str, str]
    snapshot_time: datetime = field(compare=False)
    _by_uri: dict[str, int] = field(compare=False, repr=False)
    _vendor_index: dict[str, tuple[int, ...]] = field(compare=False, repr=False)
    _product_index: dict[str, tuple[int, ...]] = field(compare=False, repr=False)
    _vendor_tokens: tuple[str, ...] = field(compare=False, repr=False)
    _product_tokens: tuple[str, ...] = field(compare=False, repr=False)

    def entry_for_uri(self, uri: "CpeUri | str") -> CpeDictEntry | None:
        raw = uri.raw if isinstance(uri, CpeUri) else uri
        index = self._by_uri.get(raw.lower())
        return self.dictionary[index] if index is not None else None

    def entries_with_vendor(self, token: str) -> tuple[CpeDictEntry, ...]:
        return tuple(self.dictionary[i] for i in self._vendor_index.get(token, ()))

    def entries_with_product(self, token: str) -> tuple[CpeDictEntry, ...]:
        return tuple(self.dictionary[i] for i in self._product_index.get(token, ()))

    def vendor_tokens_with_prefix(self, prefix: str) -> tuple[str, ...]:
        return _prefix_range(self._vendor_tokens, prefix)

    def product_tokens_with_prefix(self, prefix: str) -> tuple[str, ...]:
        return _prefix_range(self._product_tokens, prefix)

    def resolve_deprecation(self, uri: "CpeUri | str") -> str:
        """Follow deprecation links to the terminal corrected URI."""
        raw = (uri.raw if isinstance(uri, CpeUri) else uri).lower()
        seen = {raw}
        while raw in self.deprecation_map:
            raw = self.deprecation_map[raw]
            if raw in seen:  # defensive: the data promises acyclicity
                break
            seen.add(raw)
        return raw


def _prefix_range(tokens: tuple[str, ...], prefix: str) -> tuple[str, ...]:
    start = bisect_left(tokens, prefix)
    end = start
    while end < len(tokens) and tokens[end].startswith(prefix):
        end += 1
    return tokens[start:end]


def build_snapshot(
    dict_entries: Iterable[CpeDictEntry],
    cve_entries: Iterable[CveEntry],
    snapshot_time: datetime | None = None,
) -> CatalogSnapshot:
    """Assemble an immutable snapshot with vendor/product token indexes.

    Raises DuplicateCveId when the same CVE id occurs twice, which signals
    corrupted input.
    """
    dictionary = tuple(dict_entries)
    cves = tuple(cve_entries)

    seen_ids: set[str] = set()
    for cve in cves:
        if cve.id in seen_ids:
            raise DuplicateCveId(cve.id)
        seen_ids.add(cve.id)

    by_uri: dict[str, int] = {}
    vendor_index: dict[str, list[int]] = {}
    product_index: dict[str, list[int]] = {}
    deprecation_map: dict[str, str] = {}
    for i, entry in enumerate(dictionary):
        by_uri.setdefault(entry.uri.raw, i)
        if entry.wfn.vendor.is_string:
            vendor_index.setdefault(entry.wfn.vendor.text, []).append(i)
        if entry.wfn.product.is_string:
            product_index.setdefault(entry.wfn.product.text, []).append(i)
        if entry.deprecated and entry.deprecated_by is not None:
            deprecation_map[entry.uri.raw] = entry.deprecated_by.raw

    return CatalogSnapshot(
        dictionary=dictionary,
        cves=cves,
        deprecation_map=deprecation_map,
        snapshot_time=snapshot_time or datetime.now(timezone.utc),
        _by_uri=by_uri,
        _vendor_index={k: tuple(v) for k, v in vendor_index.items()},
        _product_index={k: tuple(v) for k, v in product_index.items()},
        _vendor_tokens=tuple(sorted(vendor_index)),
        _product_tokens=tuple(sorted(product_index)),
    )


# ---------------------------------------------------------------------------
# Snapshot persistence: a directory of canonical serialized records so scans
# can start without re-parsing feed XML. Layout (versioned):
#   manifest.json     counts, creation time, layout_version
#   dictionary.jsonl  one dictionary entry per line
#   cves.jsonl        one CVE entry per line
# ---------------------------------------------------------------------------


def save_snapshot(snapshot: CatalogSnapshot, directory: "str | Path") -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "layout_version": SNAPSHOT_LAYOUT_VERSION,
        "created": snapshot.snapshot_time.isoformat(),
        "dictionary_count": len(snapshot.dictionary),
        "cve_count": len(snapshot.cves),
    }
    (directory / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2))
    with open(directory / "dictionary.jsonl", "w", encoding="utf-8") as handle:
        for entry in snapshot.dictionary:
            record = {
                "uri": entry.uri.raw,
                "fs": entry.formatted.raw if entry.formatted else None,
                "title": entry.title,
                "deprecated": entry.deprecated,
                "deprecated_by": entry.deprecated_by.raw if entry.deprecated_by else None,
                "deprecation_reason": entry.deprecation_reason,
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    with open(directory / "cves.jsonl", "w", encoding="utf-8") as handle:
        for cve in snapshot.cves:
            record = {
                "id": cve.id,
                "summary": cve.summary,
                "published": cve.published.isoformat() if cve.published else None,
                "cvss_score": cve.cvss_score,
                "software": [uri.raw for uri, _ in cve.vuln_software],
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")
    return directory


def load_snapshot(directory: "str | Path") -> CatalogSnapshot:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise DocumentError(f"no snapshot manifest in {directory}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise DocumentError(f"corrupt snapshot manifest: {exc}") from exc
    if manifest.get("layout_version") != SNAPSHOT_LAYOUT_VERSION:
        raise DocumentError(f"unsupported snapshot layout {manifest.get('layout_version')!r}")

    entries: list[CpeDictEntry] = []
    try:
        with open(directory / "dictionary.jsonl", encoding="utf-8") as handle:
            for line in handle:
                record = json.loads(line)
                uri = CpeUri(record["uri"])
                entries.append(
                    CpeDictEntry(
                        uri=uri,
                        wfn=unbind_uri(uri),
                        title=record.get("title", ""),
                        formatted=FormattedString(record["fs"]) if record.get("fs") else None,
                        deprecated=record.get("deprecated", False),
                        deprecated_by=CpeUri(record["deprecated_by"])
                        if record.get("deprecated_by")
                        else None,
                        deprecation_reason=record.get("deprecation_reason"),
                    )
                )
        cves: list[CveEntry] = []
        with open(directory / "cves.jsonl", encoding="utf-8") as handle:
            for line in handle:
                record = json.loads(line)
                software = []
                for raw in record.get("software", ()):
                    uri = CpeUri(raw)
                    software.append((uri, unbind_uri(uri)))
                cves.append(
                    CveEntry(
                        id=record["id"],
                        summary=record.get("summary", ""),
                        published=_parse_timestamp(record.get("published")),
                        cvss_score=record.get("cvss_score"),
                        vuln_software=tuple(software),
                    )
                )
    except OSError as exc:
        raise StreamError(str(exc)) from exc
    except (json.JSONDecodeError, KeyError, MalformedUri) as exc:
        raise DocumentError(f"corrupt snapshot record: {exc}") from exc

    created = _parse_timestamp(manifest.get("created")) or datetime.now(timezone.utc)
    return build_snapshot(entries, cves, snapshot_time=created)


# ---------------------------------------------------------------------------
# Feed fetching with conditional requests
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class FetchResult:
    """Outcome of fetching one feed descriptor.

    ``unchanged`` marks a remote source whose conditional re-fetch returned
    304; ``content``/``path`` carry the body otherwise.
    """

    descriptor: str
    unchanged: bool = False
    content: bytes | None = None
    path: Path | None = None

    def open(self) -> BinaryIO | None:
        if self.content is not None:
            return io.BytesIO(self.content)
        if self.path is not None:
            return open(self.path, "rb")
        return None


def _stamp_path(cache_dir: Path) -> Path:
    return cache_dir / "feed_stamps.json"


def _load_stamps(cache_dir: Path | None) -> dict:
    if cache_dir is None:
        return {}
    path = _stamp_path(cache_dir)
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError:
        return {}


def _save_stamps(cache_dir: Path | None, stamps: dict) -> None:
    if cache_dir is None:
        return
    cache_dir.mkdir(parents=True, exist_ok=True)
    _stamp_path(cache_dir).write_text(json.dumps(stamps, sort_keys=True, indent=2))


def fetch_feed(
    descriptor: str,
    cache_dir: "str | Path | None" = None,
    timeout: float = 30.0,
    session: requests.Session | None = None,
) -> FetchResult:
    """Fetch one feed source: a local file path or an HTTP(S) URL.

    Remote fetches send If-None-Match / If-Modified-Since from the previous
    fetch's stamps (kept under cache_dir) and report 304 as ``unchanged``.
    Raises FeedNotFound for missing sources and NetworkError for transport
    failures; callers keep their previous snapshot on either.
    """
    if not re.match(r"^https?://", descriptor):
        path = Path(descriptor)
        if not path.exists():
            raise FeedNotFound(str(path))
        return FetchResult(descriptor=descriptor, path=path)

    cache_dir = Path(cache_dir) if cache_dir is not None else None
    stamps = _load_stamps(cache_dir)
    headers = {}
    known = stamps.get(descriptor, {})
    if known.get("etag"):
        headers["If-None-Match"] = known["etag"]
    if known.get("last_modified"):
        headers["If-Modified-Since"] = known["last_modified"]

    http = session or requests
    try:
        response = http.get(descriptor, headers=headers, timeout=timeout)
    except requests.RequestException as exc:
        raise NetworkError(f"fetch failed for {descriptor}: {exc}") from exc

    if response.status_code == 304:
        cached = known.get("cached_body")
        return FetchResult(
            descriptor=descriptor,
            unchanged=True,
            path=Path(cached) if cached and Path(cached).exists() else None,
        )
    if response.status_code == 404:
        raise FeedNotFound(descriptor)
    if response.status_code != 200:
        raise NetworkError(f"unexpected status {response.status_code} for {descriptor}")

    body = response.content
    cached_body = None
    if cache_dir is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        digest = hashlib.sha1(descriptor.encode("utf-8")).hexdigest()
        body_path = cache_dir / f"{digest}.body"
        body_path.write_bytes(body)
        cached_body = str(body_path)
    stamps[descriptor] = {
        "etag": response.headers.get("ETag"),
        "last_modified": response.headers.get("Last-Modified"),
        "cached_body": cached_body,
    }
    _save_stamps(cache_dir, stamps)
    return FetchResult(descriptor=descriptor, content=body)


def fetch_feeds(
    descriptors: Iterable[str],
    cache_dir: "str | Path | None" = None,
    timeout: float = 30.0,
) -> list[FetchResult]:
    """Fetch every descriptor; see fetch_feed for the per-source contract."""
    return [fetch_feed(d, cache_dir=cache_dir, timeout=timeout) for d in descriptors]
