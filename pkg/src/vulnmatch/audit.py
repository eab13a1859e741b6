"""Consistency audits over a catalog snapshot.

The upstream datasets are known to disagree with each other: CVEs ship
without CPE identifiers, feeds reference names absent from the dictionary,
deprecated names linger, and semantically equal names differ only in how
they encode the update attribute. These audits quantify each problem for
the snapshot at hand; they are pure functions of the snapshot, so re-running
one yields an identical report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .cpe import ANY, bind_to_formatted_string
from .feeds import CatalogSnapshot

AUDIT_REPORT_VERSION = 1


@dataclass(frozen=True, slots=True)
class DanglingDeprecation:
    """A deprecated entry whose replacement is missing from the dictionary."""

    uri: str
    target: str


@dataclass(frozen=True, slots=True)
class ConsistencyReport:
    cves_without_cpes: tuple[str, ...]
    feed_cpes_missing: tuple[str, ...]
    deprecated_by_reason: dict[str, int]
    dangling_deprecations: tuple[DanglingDeprecation, ...]
    semantic_duplicates: tuple[tuple[str, str], ...]
    snapshot_time: datetime

    def to_dict(self) -> dict:
        return {
            "report_version": AUDIT_REPORT_VERSION,
            "snapshot_time": self.snapshot_time.isoformat(),
            "cves_without_cpes": {
                "count": len(self.cves_without_cpes),
                "ids": list(self.cves_without_cpes),
            },
            "feed_cpes_missing": {
                "count": len(self.feed_cpes_missing),
                "uris": list(self.feed_cpes_missing),
            },
            "deprecated": {
                "count": sum(self.deprecated_by_reason.values()),
                "by_reason": dict(sorted(self.deprecated_by_reason.items())),
                "dangling": [
                    {"uri": d.uri, "target": d.target} for d in self.dangling_deprecations
                ],
            },
            "semantic_duplicates": {
                "count": len(self.semantic_duplicates),
                "pairs": [list(pair) for pair in self.semantic_duplicates],
            },
        }

    def summary_text(self) -> str:
        lines = [
            f"snapshot: {self.snapshot_time.isoformat()}",
            f"CVEs without CPE identifiers: {len(self.cves_without_cpes)}",
            f"feed CPEs missing from the dictionary: {len(self.feed_cpes_missing)}",
            f"deprecated dictionary entries: {sum(self.deprecated_by_reason.values())}",
        ]
        for reason, count in sorted(self.deprecated_by_reason.items()):
            lines.append(f"  {reason}: {count}")
        if self.dangling_deprecations:
            lines.append(f"  dangling replacement targets: {len(self.dangling_deprecations)}")
        lines.append(f"semantic duplicate pairs (dictionary vs feeds): {len(self.semantic_duplicates)}")
        return "\n".join(lines)


def audit_cves_without_cpes(snapshot: CatalogSnapshot) -> tuple[str, ...]:
    """Ids of CVEs whose vulnerable-software list is empty."""
    return tuple(cve.id for cve in snapshot.cves if not cve.vuln_software)


def audit_missing_dictionary_cpes(snapshot: CatalogSnapshot) -> tuple[str, ...]:
    """Feed CPE URIs that do not appear in the dictionary."""
    dictionary_uris = {entry.uri.raw for entry in snapshot.dictionary}
    missing: list[str] = []
    seen: set[str] = set()
    for cve in snapshot.cves:
        for uri, _ in cve.vuln_software:
            raw = uri.raw
            if raw not in dictionary_uris and raw not in seen:
                seen.add(raw)
                missing.append(raw)
    return tuple(sorted(missing))


def audit_deprecations(
    snapshot: CatalogSnapshot,
) -> tuple[dict[str, int], tuple[DanglingDeprecation, ...]]:
    """Deprecation tallies by declared reason, plus unresolvable targets."""
    by_reason: dict[str, int] = {}
    dangling: list[DanglingDeprecation] = []
    for entry in snapshot.dictionary:
        if not entry.deprecated:
            continue
        reason = entry.deprecation_reason or "unspecified"
        by_reason[reason] = by_reason.get(reason, 0) + 1
        if entry.deprecated_by is not None and snapshot.entry_for_uri(entry.deprecated_by) is None:
            dangling.append(
                DanglingDeprecation(uri=entry.uri.raw, target=entry.deprecated_by.raw)
            )
    return by_reason, tuple(dangling)


def _normalized_name(wfn) -> str:
    """Canonical form treating version+update as one underscore-joined token.

    "1.4.0" + update "beta1" and "1.4.0_beta1" with no update are the same
    product release spelled two ways; both normalize to the latter.
    """
    if wfn.version.is_string and wfn.update.is_string:
        wfn = wfn.replace(version=f"{wfn.version.text}_{wfn.update.text}", update=ANY)
    return bind_to_formatted_string(wfn).raw


def detect_semantic_duplicates(snapshot: CatalogSnapshot) -> tuple[tuple[str, str], ...]:
    """(dictionary URI, feed URI) pairs that are the same name spelled differently.

    Pairs are deduplicated and direction-insensitive; identical URIs are
    never flagged.
    """
    dictionary_by_key: dict[str, set[str]] = {}
    for entry in snapshot.dictionary:
        key = _normalized_name(entry.wfn)
        dictionary_by_key.setdefault(key, set()).add(entry.uri.raw)

    pairs: set[frozenset[str]] = set()
    results: list[tuple[str, str]] = []
    for cve in snapshot.cves:
        for uri, wfn in cve.vuln_software:
            key = _normalized_name(wfn)
            for dict_uri in dictionary_by_key.get(key, ()):
                if dict_uri == uri.raw:
                    continue
                marker = frozenset((dict_uri, uri.raw))
                if marker not in pairs:
                    pairs.add(marker)
                    results.append((dict_uri, uri.raw))
    return tuple(sorted(results))


def run_audit(snapshot: CatalogSnapshot) -> ConsistencyReport:
    by_reason, dangling = audit_deprecations(snapshot)
    return ConsistencyReport(
        cves_without_cpes=audit_cves_without_cpes(snapshot),
        feed_cpes_missing=audit_missing_dictionary_cpes(snapshot),
        deprecated_by_reason=by_reason,
        dangling_deprecations=dangling,
        semantic_duplicates=detect_semantic_duplicates(snapshot),
        snapshot_time=snapshot.snapshot_time,
    )


def write_report(report: ConsistencyReport, path: "str | Path") -> Path:
    """Write the JSON report to path and a text summary next to it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    summary_path = path.with_suffix(".txt")
    summary_path.write_text(report.summary_text() + "\n")
    return path
