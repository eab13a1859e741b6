"""Triage workflow: inventory import, CPE assignment, scanning, decisions.

The service holds one catalog snapshot at a time behind an atomic reference;
scans in flight keep using the snapshot they started with. Assignment is
always an explicit act: the engine ranks candidates but never picks one on
its own, because auto-assigning the top candidate is demonstrably wrong for
some products.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from .cpe import CpeUri, Wfn, bind_to_formatted_string
from .errors import (
    EmptyFile,
    EmptyProduct,
    FormatError,
    NoSnapshot,
    Unassigned,
    UnknownAlert,
    VulnmatchError,
)
from .feeds import (
    CatalogSnapshot,
    build_snapshot,
    fetch_feed,
    load_snapshot,
    parse_cpe_dictionary,
    parse_cve_feed,
    save_snapshot,
)
from .matching import (
    DEFAULT_THRESHOLD,
    CpeCandidate,
    CveCandidate,
    InventoryProduct,
    generate_search_terms,
    group_key,
    match_cpe_candidates,
    merge_candidates,
    search_cves_by_cpe,
    search_cves_by_summary,
)
from .store import AlertRecord, Assignment, TriageStore

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class ImportSummary:
    created: int
    updated: int
    skipped: int
    errors: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class RescanSummary:
    snapshot_state: str  # "rebuilt", "unchanged", or "kept-previous"
    products_scanned: int
    new_alerts: int
    errors: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class AlertGroup:
    """Stored alerts sharing one matched-CPE set, decidable in bulk."""

    group_id: str
    cpes: tuple[str, ...]
    alerts: tuple[AlertRecord, ...]


@dataclass
class FeedConfig:
    """Source descriptors for scheduled refreshes."""

    cpe_dict: str | None = None
    cve_feeds: tuple[str, ...] = ()
    cache_dir: str | None = None
    snapshot_dir: str | None = None


class TriageService:
    def __init__(
        self,
        store: TriageStore,
        snapshot: CatalogSnapshot | None = None,
        threshold: int = DEFAULT_THRESHOLD,
        feeds: FeedConfig | None = None,
    ):
        self.store = store
        self.threshold = threshold
        self.feeds = feeds or FeedConfig()
        self._snapshot = snapshot
        self._snapshot_lock = threading.Lock()

    @property
    def snapshot(self) -> CatalogSnapshot:
        snapshot = self._snapshot
        if snapshot is None:
            raise NoSnapshot("no catalog snapshot loaded")
        return snapshot

    @property
    def has_snapshot(self) -> bool:
        return self._snapshot is not None

    def replace_snapshot(self, snapshot: CatalogSnapshot) -> None:
        with self._snapshot_lock:
            self._snapshot = snapshot

    # -- inventory import ----------------------------------------------------

    def import_inventory(self, source, source_tag: str = "default") -> ImportSummary:
        """Upsert inventory rows from a CSV or JSON file.

        CSV needs a header with external_id, vendor, product, version; JSON
        is a list of objects with the same keys. Bad rows are counted and
        reported, not fatal.
        """
        text = self._read_text(source)
        if not text.strip():
            raise EmptyFile("inventory file is empty")
        rows, errors = self._parse_inventory(text)
        if not rows and not errors:
            raise EmptyFile("inventory file has no rows")
        created = updated = skipped = 0
        for product in rows:
            try:
                _, was_created = self.store.upsert_product(product, source=source_tag)
            except VulnmatchError as exc:
                errors.append(str(exc))
                skipped += 1
                continue
            if was_created:
                created += 1
            else:
                updated += 1
        skipped += len(errors)
        return ImportSummary(
            created=created, updated=updated, skipped=skipped, errors=tuple(errors)
        )

    @staticmethod
    def _read_text(source) -> str:
        if isinstance(source, bytes):
            return source.decode("utf-8")
        if isinstance(source, (str, Path)):
            return Path(source).read_text(encoding="utf-8")
        data = source.read()
        return data.decode("utf-8") if isinstance(data, bytes) else data

    @staticmethod
    def _parse_inventory(text: str) -> tuple[list[InventoryProduct], list[str]]:
        rows: list[InventoryProduct] = []
        errors: list[str] = []
        stripped = text.lstrip()
        if stripped.startswith("[") or stripped.startswith("{"):
            try:
                payload = json.loads(text)
            except json.JSONDecodeError as exc:
                raise FormatError(f"invalid JSON inventory: {exc}") from exc
            if isinstance(payload, dict):
                payload = payload.get("products", [])
            for i, item in enumerate(payload):
                try:
                    rows.append(
                        InventoryProduct(
                            external_id=str(item["external_id"]),
                            vendor_raw=str(item.get("vendor", "")),
                            product_raw=str(item["product"]),
                            version_raw=str(item.get("version", "")),
                        )
                    )
                except (KeyError, TypeError, EmptyProduct) as exc:
                    errors.append(f"row {i}: {exc}")
            return rows, errors
        reader = csv.DictReader(io.StringIO(text))
        for i, record in enumerate(reader):
            try:
                rows.append(
                    InventoryProduct(
                        external_id=(record.get("external_id") or "").strip() or f"row-{i}",
                        vendor_raw=(record.get("vendor") or "").strip(),
                        product_raw=(record.get("product") or "").strip(),
                        version_raw=(record.get("version") or "").strip(),
                    )
                )
            except EmptyProduct as exc:
                errors.append(f"row {i}: {exc}")
        return rows, errors

    # -- candidates and assignment -------------------------------------------

    def list_candidates(self, product_id: int, limit: int | None = None) -> list[CpeCandidate]:
        """Ranked dictionary candidates for one product.

        The full ranked list is computed; presentation layers truncate.
        """
        record = self.store.get_product(product_id)
        snapshot = self.snapshot
        terms = generate_search_terms(record.product)
        candidates = match_cpe_candidates(
            terms, snapshot, record.product.version_raw, threshold=self.threshold
        )
        if limit is not None:
            candidates = candidates[:limit]
        return candidates

    def assign_cpe(
        self,
        product_id: int,
        wfn: Wfn,
        source: str = "CANDIDATE_SELECTED",
        user: str = "",
        derived_from: str | None = None,
    ) -> Assignment:
        """Record the assignment and rescan the product under it."""
        assignment, changed = self.store.assign(
            product_id, wfn, source, assigned_by=user, derived_from=derived_from
        )
        if changed and self.has_snapshot:
            self.scan_product(product_id)
        return assignment

    # -- scanning -------------------------------------------------------------

    def _find_cve_candidates(self, wfn: Wfn, snapshot: CatalogSnapshot) -> list[CveCandidate]:
        by_cpe = search_cves_by_cpe(wfn, snapshot, threshold=self.threshold)
        by_summary = search_cves_by_summary(wfn, snapshot, threshold=self.threshold)
        return merge_candidates(by_cpe, by_summary)

    def scan_product(self, product_id: int) -> list[AlertRecord]:
        """Scan one assigned product; returns only the newly created alerts."""
        self.store.get_product(product_id)
        assignment = self.store.active_assignment(product_id)
        if assignment is None:
            raise Unassigned(f"product {product_id} has no CPE assignment")
        snapshot = self.snapshot
        candidates = self._find_cve_candidates(assignment.wfn, snapshot)
        findings = [
            (
                candidate.cve.id,
                candidate.origin.value,
                tuple(uri.raw for uri in candidate.matched_cpes),
                candidate.exact_version,
            )
            for candidate in candidates
        ]
        serialized = bind_to_formatted_string(assignment.wfn).raw
        return self.store.record_alerts(product_id, serialized, findings)

    def alert_groups(self, product_id: int, state: str | None = None) -> list[AlertGroup]:
        """Group a product's alerts by matched-CPE set (see decide_group)."""
        return self._group_alerts(self.current_alerts(product_id, state))

    def current_alerts(self, product_id: int, state: str | None = None) -> list[AlertRecord]:
        assignment = self.store.active_assignment(product_id)
        if assignment is None:
            return []
        serialized = bind_to_formatted_string(assignment.wfn).raw
        return self.store.list_alerts(
            product_id=product_id, state=state, assignment_wfn=serialized
        )

    @staticmethod
    def _group_alerts(alerts: list[AlertRecord]) -> list[AlertGroup]:
        groups: dict[str, list[AlertRecord]] = {}
        order: list[tuple[str, tuple[str, ...]]] = []
        for alert in alerts:
            key = group_key(tuple(CpeUri(raw) for raw in alert.matched_cpes))
            if key not in groups:
                groups[key] = []
                order.append((key, alert.matched_cpes))
            groups[key].append(alert)
        return [
            AlertGroup(group_id=key, cpes=cpes, alerts=tuple(groups[key]))
            for key, cpes in order
        ]

    # -- decisions -------------------------------------------------------------

    def decide_alerts(self, alert_ids: list[int], decision: str, user: str) -> list[AlertRecord]:
        return self.store.decide_alerts(alert_ids, decision, user)

    def decide_group(
        self, product_id: int, group_id: str, decision: str, user: str
    ) -> list[AlertRecord]:
        """Atomically decide every alert in one group; mixed states fail whole."""
        for group in self.alert_groups(product_id):
            if group.group_id == group_id:
                return self.store.decide_alerts(
                    [alert.id for alert in group.alerts], decision, user
                )
        raise UnknownAlert(f"unknown alert group {group_id!r}")

    # -- scheduled rescans -------------------------------------------------------

    def rescan_all(self) -> RescanSummary:
        """Scan every assigned product against the current snapshot."""
        new_alerts = 0
        scanned = 0
        errors: list[str] = []
        for product_id in self.store.assigned_product_ids():
            try:
                new_alerts += len(self.scan_product(product_id))
                scanned += 1
            except VulnmatchError as exc:
                errors.append(f"product {product_id}: {exc}")
        return RescanSummary(
            snapshot_state="unchanged",
            products_scanned=scanned,
            new_alerts=new_alerts,
            errors=tuple(errors),
        )

    def scheduled_rescan(self) -> RescanSummary:
        """Refresh feeds if configured, then rescan all assigned products.

        A fetch or parse failure keeps the previous snapshot and is reported
        in the summary; the scheduler never crashes the service.
        """
        snapshot_state = "unchanged"
        errors: list[str] = []
        if self.feeds.cpe_dict or self.feeds.cve_feeds:
            try:
                refreshed = self._refresh_snapshot()
                if refreshed is not None:
                    self.replace_snapshot(refreshed)
                    snapshot_state = "rebuilt"
                    if self.feeds.snapshot_dir:
                        save_snapshot(refreshed, self.feeds.snapshot_dir)
            except VulnmatchError as exc:
                errors.append(str(exc))
                snapshot_state = "kept-previous"
                log.warning("feed refresh failed, keeping previous snapshot: %s", exc)

        if not self.has_snapshot:
            return RescanSummary(
                snapshot_state=snapshot_state,
                products_scanned=0,
                new_alerts=0,
                errors=tuple(errors + ["no snapshot available"]),
            )
        scan = self.rescan_all()
        return RescanSummary(
            snapshot_state=snapshot_state,
            products_scanned=scan.products_scanned,
            new_alerts=scan.new_alerts,
            errors=tuple(errors) + scan.errors,
        )

    def _refresh_snapshot(self) -> CatalogSnapshot | None:
        """Fetch configured sources; None when every remote reports unchanged."""
        results = []
        any_change = False
        sources = []
        if self.feeds.cpe_dict:
            sources.append(("dict", self.feeds.cpe_dict))
        sources.extend(("cve", feed) for feed in self.feeds.cve_feeds)
        for kind, descriptor in sources:
            result = fetch_feed(descriptor, cache_dir=self.feeds.cache_dir)
            any_change = any_change or not result.unchanged
            results.append((kind, result))
        if self.has_snapshot and not any_change:
            return None

        dict_entries = []
        cve_entries = []
        for kind, result in results:
            stream = result.open()
            if stream is None:
                continue
            with stream:
                if kind == "dict":
                    dict_entries.extend(parse_cpe_dictionary(stream).entries)
                else:
                    cve_entries.extend(parse_cve_feed(stream).entries)
        return build_snapshot(dict_entries, cve_entries)

    # -- reporting ---------------------------------------------------------------

    def report(
        self,
        state: str | None = None,
        vendor: str | None = None,
        unassigned_only: bool = False,
    ) -> dict:
        """Inventory and alert overview with stable ordering."""
        products = []
        for record in self.store.list_products():
            if vendor and vendor.lower() not in record.product.vendor_raw.lower():
                continue
            assignment = self.store.active_assignment(record.id)
            if unassigned_only and assignment is not None:
                continue
            alerts = self.current_alerts(record.id, state)
            products.append(
                {
                    "id": record.id,
                    "external_id": record.product.external_id,
                    "vendor": record.product.vendor_raw,
                    "product": record.product.product_raw,
                    "version": record.product.version_raw,
                    "assigned": assignment is not None,
                    "assignment": bind_to_formatted_string(assignment.wfn).raw
                    if assignment
                    else None,
                    "alerts": {
                        "pending": sum(1 for a in alerts if a.state == "PENDING"),
                        "confirmed": sum(1 for a in alerts if a.state == "CONFIRMED"),
                        "discarded": sum(1 for a in alerts if a.state == "DISCARDED"),
                    },
                }
            )
        totals = {
            "products": len(products),
            "assigned": sum(1 for p in products if p["assigned"]),
            "pending": sum(p["alerts"]["pending"] for p in products),
            "confirmed": sum(p["alerts"]["confirmed"] for p in products),
            "discarded": sum(p["alerts"]["discarded"] for p in products),
        }
        return {"products": products, "totals": totals}


def load_service(
    store_path: "str | Path",
    snapshot_dir: "str | Path | None" = None,
    threshold: int = DEFAULT_THRESHOLD,
    feeds: FeedConfig | None = None,
) -> TriageService:
    store = TriageStore(store_path)
    snapshot = load_snapshot(snapshot_dir) if snapshot_dir else None
    return TriageService(store, snapshot=snapshot, threshold=threshold, feeds=feeds)
