"""Embedded transactional store for inventory, assignments, and alerts.

Backed by sqlite3 so a deployment is a single file. Alert rows are keyed by
(product, cve, assignment name): decisions made under one assignment never
leak into another, and a discarded alert stays discarded across rescans of
the same assignment.

Schema (version 1):
    products     inventory records, unique per (source, external_id)
    assignments  one active assignment per product, history retained
    alerts       one row per (product, cve, assignment) triple
"""

from __future__ import annotations

import json
import sqlite3
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from .cpe import Wfn, bind_to_formatted_string, unbind_formatted_string
from .errors import AlreadyDecided, UnknownAlert, UnknownProduct
from .matching import InventoryProduct

SCHEMA_VERSION = 1

_SCHEMA = """
CREATE TABLE IF NOT EXISTS meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS products (
    id INTEGER PRIMARY KEY,
    external_id TEXT NOT NULL,
    source TEXT NOT NULL DEFAULT 'default',
    vendor TEXT NOT NULL DEFAULT '',
    product TEXT NOT NULL,
    version TEXT NOT NULL DEFAULT '',
    first_seen TEXT NOT NULL,
    last_seen TEXT NOT NULL,
    UNIQUE (source, external_id)
);
CREATE TABLE IF NOT EXISTS assignments (
    id INTEGER PRIMARY KEY,
    product_id INTEGER NOT NULL REFERENCES products(id),
    wfn TEXT NOT NULL,
    source TEXT NOT NULL,
    derived_from TEXT,
    assigned_by TEXT NOT NULL DEFAULT '',
    assigned_at TEXT NOT NULL,
    active INTEGER NOT NULL DEFAULT 1
);
CREATE UNIQUE INDEX IF NOT EXISTS one_active_assignment
    ON assignments(product_id) WHERE active = 1;
CREATE TABLE IF NOT EXISTS alerts (
    id INTEGER PRIMARY KEY,
    product_id INTEGER NOT NULL REFERENCES products(id),
    cve_id TEXT NOT NULL,
    assignment_wfn TEXT NOT NULL,
    origin TEXT NOT NULL,
    matched_cpes TEXT NOT NULL DEFAULT '[]',
    exact_version INTEGER NOT NULL DEFAULT 0,
    state TEXT NOT NULL DEFAULT 'PENDING',
    created_at TEXT NOT NULL,
    decided_by TEXT,
    decided_at TEXT,
    UNIQUE (product_id, cve_id, assignment_wfn)
);
"""

ALERT_STATES = ("PENDING", "CONFIRMED", "DISCARDED")
ASSIGNMENT_SOURCES = ("CANDIDATE_SELECTED", "USER_EDITED")


@dataclass(frozen=True, slots=True)
class InventoryRecord:
    id: int
    product: InventoryProduct
    source: str
    first_seen: str
    last_seen: str


@dataclass(frozen=True, slots=True)
class Assignment:
    id: int
    product_id: int
    wfn: Wfn
    source: str
    derived_from: str | None
    assigned_by: str
    assigned_at: str


@dataclass(frozen=True, slots=True)
class AlertRecord:
    id: int
    product_id: int
    cve_id: str
    assignment_wfn: str
    origin: str
    matched_cpes: tuple[str, ...]
    exact_version: bool
    state: str
    created_at: str
    decided_by: str | None
    decided_at: str | None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


class TriageStore:
    """Thread-safe persistence for the triage workflow."""

    def __init__(self, path: "str | Path" = ":memory:"):
        self._conn = sqlite3.connect(str(path), check_same_thread=False)
        self._conn.row_factory = sqlite3.Row
        self._conn.execute("PRAGMA foreign_keys = ON")
        with self._conn:
            self._conn.executescript(_SCHEMA)
            self._conn.execute(
                "INSERT OR IGNORE INTO meta (key, value) VALUES ('schema_version', ?)",
                (str(SCHEMA_VERSION),),
            )

    def close(self) -> None:
        self._conn.close()

    @contextmanager
    def _tx(self):
        with self._conn:
            yield self._conn

    # -- inventory ----------------------------------------------------------

    def upsert_product(self, product: InventoryProduct, source: str = "default") -> tuple[int, bool]:
        """Insert or refresh a record; returns (row id, created?)."""
        now = _now()
        with self._tx() as conn:
            row = conn.execute(
                "SELECT id FROM products WHERE source = ? AND external_id = ?",
                (source, product.external_id),
            ).fetchone()
            if row is None:
                cursor = conn.execute(
                    "INSERT INTO products (external_id, source, vendor, product, version,"
                    " first_seen, last_seen) VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (
                        product.external_id,
                        source,
                        product.vendor_raw,
                        product.product_raw,
                        product.version_raw,
                        now,
                        now,
                    ),
                )
                return cursor.lastrowid, True
            conn.execute(
                "UPDATE products SET vendor = ?, product = ?, version = ?, last_seen = ?"
                " WHERE id = ?",
                (product.vendor_raw, product.product_raw, product.version_raw, now, row["id"]),
            )
            return row["id"], False

    def _record(self, row: sqlite3.Row) -> InventoryRecord:
        return InventoryRecord(
            id=row["id"],
            product=InventoryProduct(
                external_id=row["external_id"],
                vendor_raw=row["vendor"],
                product_raw=row["product"],
                version_raw=row["version"],
            ),
            source=row["source"],
            first_seen=row["first_seen"],
            last_seen=row["last_seen"],
        )

    def get_product(self, product_id: int) -> InventoryRecord:
        row = self._conn.execute("SELECT * FROM products WHERE id = ?", (product_id,)).fetchone()
        if row is None:
            raise UnknownProduct(str(product_id))
        return self._record(row)

    def list_products(self) -> list[InventoryRecord]:
        rows = self._conn.execute("SELECT * FROM products ORDER BY id").fetchall()
        return [self._record(row) for row in rows]

    # -- assignments --------------------------------------------------------

    def _assignment(self, row: sqlite3.Row) -> Assignment:
        return Assignment(
            id=row["id"],
            product_id=row["product_id"],
            wfn=unbind_formatted_string(row["wfn"]),
            source=row["source"],
            derived_from=row["derived_from"],
            assigned_by=row["assigned_by"],
            assigned_at=row["assigned_at"],
        )

    def active_assignment(self, product_id: int) -> Assignment | None:
        row = self._conn.execute(
            "SELECT * FROM assignments WHERE product_id = ? AND active = 1", (product_id,)
        ).fetchone()
        return self._assignment(row) if row else None

    def assign(
        self,
        product_id: int,
        wfn: Wfn,
        source: str,
        assigned_by: str = "",
        derived_from: str | None = None,
    ) -> tuple[Assignment, bool]:
        """Set the active assignment; returns (assignment, changed?).

        Re-assigning the identical name is a no-op. A changed assignment
        retires the previous one and drops its still-pending alerts; decided
        alerts stay, keyed to the assignment they were decided under.
        """
        self.get_product(product_id)
        serialized = bind_to_formatted_string(wfn).raw
        with self._tx() as conn:
            current = conn.execute(
                "SELECT * FROM assignments WHERE product_id = ? AND active = 1", (product_id,)
            ).fetchone()
            if current is not None and current["wfn"] == serialized:
                return self._assignment(current), False
            if current is not None:
                conn.execute("UPDATE assignments SET active = 0 WHERE id = ?", (current["id"],))
                conn.execute(
                    "DELETE FROM alerts WHERE product_id = ? AND state = 'PENDING'",
                    (product_id,),
                )
            cursor = conn.execute(
                "INSERT INTO assignments (product_id, wfn, source, derived_from, assigned_by,"
                " assigned_at, active) VALUES (?, ?, ?, ?, ?, ?, 1)",
                (product_id, serialized, source, derived_from, assigned_by, _now()),
            )
            row = conn.execute(
                "SELECT * FROM assignments WHERE id = ?", (cursor.lastrowid,)
            ).fetchone()
            return self._assignment(row), True

    def assigned_product_ids(self) -> list[int]:
        rows = self._conn.execute(
            "SELECT product_id FROM assignments WHERE active = 1 ORDER BY product_id"
        ).fetchall()
        return [row["product_id"] for row in rows]

    # -- alerts -------------------------------------------------------------

    def _alert(self, row: sqlite3.Row) -> AlertRecord:
        return AlertRecord(
            id=row["id"],
            product_id=row["product_id"],
            cve_id=row["cve_id"],
            assignment_wfn=row["assignment_wfn"],
            origin=row["origin"],
            matched_cpes=tuple(json.loads(row["matched_cpes"])),
            exact_version=bool(row["exact_version"]),
            state=row["state"],
            created_at=row["created_at"],
            decided_by=row["decided_by"],
            decided_at=row["decided_at"],
        )

    def record_alerts(
        self,
        product_id: int,
        assignment_wfn: str,
        findings: list[tuple[str, str, tuple[str, ...], bool]],
    ) -> list[AlertRecord]:
        """Insert PENDING alerts for findings not already recorded.

        Each finding is (cve_id, origin, matched cpe uris, exact_version).
        A triple already present in any state is left untouched, which makes
        scans idempotent and keeps discarded alerts discarded.
        """
        created: list[int] = []
        now = _now()
        with self._tx() as conn:
            for cve_id, origin, matched, exact in findings:
                existing = conn.execute(
                    "SELECT id FROM alerts WHERE product_id = ? AND cve_id = ?"
                    " AND assignment_wfn = ?",
                    (product_id, cve_id, assignment_wfn),
                ).fetchone()
                if existing is not None:
                    continue
                cursor = conn.execute(
                    "INSERT INTO alerts (product_id, cve_id, assignment_wfn, origin,"
                    " matched_cpes, exact_version, state, created_at)"
                    " VALUES (?, ?, ?, ?, ?, ?, 'PENDING', ?)",
                    (product_id, cve_id, assignment_wfn, origin, json.dumps(list(matched)), int(exact), now),
                )
                created.append(cursor.lastrowid)
        if not created:
            return []
        marks = ",".join("?" * len(created))
        rows = self._conn.execute(
            f"SELECT * FROM alerts WHERE id IN ({marks}) ORDER BY id", created
        ).fetchall()
        return [self._alert(row) for row in rows]

    def list_alerts(
        self,
        product_id: int | None = None,
        state: str | None = None,
        assignment_wfn: str | None = None,
    ) -> list[AlertRecord]:
        query = "SELECT * FROM alerts WHERE 1=1"
        params: list = []
        if product_id is not None:
            query += " AND product_id = ?"
            params.append(product_id)
        if state is not None:
            query += " AND state = ?"
            params.append(state)
        if assignment_wfn is not None:
            query += " AND assignment_wfn = ?"
            params.append(assignment_wfn)
        query += " ORDER BY exact_version DESC, cve_id, id"
        return [self._alert(row) for row in self._conn.execute(query, params).fetchall()]

    def decide_alerts(self, alert_ids: list[int], decision: str, decided_by: str) -> list[AlertRecord]:
        """Atomically transition the given alerts from PENDING to a decision.

        If any alert is missing or already decided, nothing changes.
        """
        if decision not in ("CONFIRMED", "DISCARDED"):
            raise ValueError(f"invalid decision {decision!r}")
        if not alert_ids:
            raise UnknownAlert("no alert ids given")
        now = _now()
        with self._tx() as conn:
            marks = ",".join("?" * len(alert_ids))
            rows = conn.execute(
                f"SELECT id, state FROM alerts WHERE id IN ({marks})", alert_ids
            ).fetchall()
            found = {row["id"]: row["state"] for row in rows}
            missing = [i for i in alert_ids if i not in found]
            if missing:
                raise UnknownAlert(f"unknown alert ids: {missing}")
            decided = [i for i in alert_ids if found[i] != "PENDING"]
            if decided:
                raise AlreadyDecided(f"alerts already decided: {decided}")
            conn.execute(
                f"UPDATE alerts SET state = ?, decided_by = ?, decided_at = ?"
                f" WHERE id IN ({marks})",
                [decision, decided_by, now, *alert_ids],
            )
        rows = self._conn.execute(
            f"SELECT * FROM alerts WHERE id IN ({','.join('?' * len(alert_ids))}) ORDER BY id",
            alert_ids,
        ).fetchall()
        return [self._alert(row) for row in rows]
