"""HTTP/JSON API for the triage workflow, versioned under /api/v1.

Thin adapter over TriageService: request validation and JSON shaping only,
no matching logic. Responses are deterministic for a fixed store + snapshot.

WFN attributes travel as a flat JSON object of the 11 attribute names; the
formatted-string conventions apply to values ("*" = ANY, "-" = NA).
Authentication is a single optional static bearer token.
"""

from __future__ import annotations

from fastapi import Depends, FastAPI, HTTPException, Request, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .cpe import ANY, NA, AttributeValue, WFN_ATTRIBUTES, Wfn, bind_to_formatted_string, bind_to_uri
from .errors import (
    AlreadyDecided,
    EmptyFile,
    FormatError,
    InvalidWfn,
    NoSnapshot,
    Unassigned,
    UnknownAlert,
    UnknownProduct,
    VulnmatchError,
)
from .service import TriageService

API_PREFIX = "/api/v1"


class AssignmentBody(BaseModel):
    wfn: dict[str, str]
    source: str = "CANDIDATE_SELECTED"
    user: str = ""
    derived_from: str | None = None


class DecideBody(BaseModel):
    decision: str
    user: str = ""
    alert_ids: list[int] | None = None
    group_id: str | None = None
    product_id: int | None = None


def wfn_from_json(attrs: dict[str, str]) -> Wfn:
    unknown = set(attrs) - set(WFN_ATTRIBUTES)
    if unknown:
        raise InvalidWfn(f"unknown WFN attributes: {sorted(unknown)}")
    values: dict[str, AttributeValue] = {}
    for name, value in attrs.items():
        if value == "*":
            values[name] = ANY
        elif value == "-":
            values[name] = NA
        else:
            values[name] = AttributeValue.string(value.lower())
    return Wfn(**values)


def wfn_to_json(wfn: Wfn) -> dict[str, str]:
    out = {}
    for name in WFN_ATTRIBUTES:
        value = wfn.get(name)
        out[name] = "*" if value.is_any else "-" if value.is_na else value.text
    return out


def _alert_json(alert) -> dict:
    return {
        "id": alert.id,
        "product_id": alert.product_id,
        "cve_id": alert.cve_id,
        "origin": alert.origin,
        "matched_cpes": list(alert.matched_cpes),
        "exact_version": alert.exact_version,
        "state": alert.state,
        "created_at": alert.created_at,
        "decided_by": alert.decided_by,
        "decided_at": alert.decided_at,
    }


def create_app(service: TriageService, auth_token: str | None = None, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="vulnmatch", version="1")

    def authorized(request: Request) -> None:
        if auth_token is None:
            return
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {auth_token}":
            raise HTTPException(status_code=401, detail="missing or invalid token")

    @app.exception_handler(VulnmatchError)
    async def handle_domain_error(request: Request, exc: VulnmatchError) -> JSONResponse:
        status = 500
        if isinstance(exc, (UnknownProduct, UnknownAlert)):
            status = 404
        elif isinstance(exc, (InvalidWfn, FormatError, EmptyFile, Unassigned)):
            status = 422
        elif isinstance(exc, AlreadyDecided):
            status = 409
        elif isinstance(exc, NoSnapshot):
            status = 503
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.get(API_PREFIX + "/products", dependencies=[Depends(authorized)])
    def list_products(status: str | None = None):
        report = service.report(
            unassigned_only=(status == "unassigned"),
        )
        products = report["products"]
        if status == "assigned":
            products = [p for p in products if p["assigned"]]
        return {"products": products}

    @app.post(API_PREFIX + "/inventory/import", dependencies=[Depends(authorized)])
    async def import_inventory(file: UploadFile, source: str = "default"):
        payload = await file.read()
        summary = service.import_inventory(payload if isinstance(payload, bytes) else payload.encode(), source_tag=source)
        return {
            "created": summary.created,
            "updated": summary.updated,
            "skipped": summary.skipped,
            "errors": list(summary.errors),
        }

    @app.get(API_PREFIX + "/products/{product_id}/candidates", dependencies=[Depends(authorized)])
    def candidates(product_id: int, limit: int = 10):
        found = service.list_candidates(product_id, limit=limit)
        return {
            "product_id": product_id,
            "candidates": [
                {
                    "rank": c.rank,
                    "uri": c.entry.uri.raw,
                    "formatted": c.entry.formatted.raw if c.entry.formatted else None,
                    "title": c.entry.title,
                    "vendor_distance": c.vendor_distance,
                    "product_distance": c.product_distance,
                    "version": str(c.entry.wfn.version),
                    "exact_version": c.version_affinity[0],
                }
                for c in found
            ],
        }

    @app.put(API_PREFIX + "/products/{product_id}/assignment", dependencies=[Depends(authorized)])
    def assign(product_id: int, body: AssignmentBody):
        if body.source not in ("CANDIDATE_SELECTED", "USER_EDITED"):
            raise HTTPException(status_code=422, detail=f"invalid source {body.source!r}")
        wfn = wfn_from_json(body.wfn)
        assignment = service.assign_cpe(
            product_id, wfn, source=body.source, user=body.user, derived_from=body.derived_from
        )
        return {
            "product_id": product_id,
            "assignment": {
                "wfn": wfn_to_json(assignment.wfn),
                "uri": bind_to_uri(assignment.wfn).raw,
                "formatted": bind_to_formatted_string(assignment.wfn).raw,
                "source": assignment.source,
                "assigned_by": assignment.assigned_by,
                "assigned_at": assignment.assigned_at,
            },
        }

    @app.post(API_PREFIX + "/products/{product_id}/scan", dependencies=[Depends(authorized)])
    def scan(product_id: int):
        created = service.scan_product(product_id)
        return {"product_id": product_id, "new_alerts": [_alert_json(a) for a in created]}

    @app.get(API_PREFIX + "/products/{product_id}/alerts", dependencies=[Depends(authorized)])
    def alerts(product_id: int, state: str | None = None, grouped: bool = False):
        service.store.get_product(product_id)
        if grouped:
            groups = service.alert_groups(product_id, state=state)
            return {
                "product_id": product_id,
                "groups": [
                    {
                        "group_id": g.group_id,
                        "cpes": list(g.cpes),
                        "alerts": [_alert_json(a) for a in g.alerts],
                    }
                    for g in groups
                ],
            }
        found = service.current_alerts(product_id, state)
        return {"product_id": product_id, "alerts": [_alert_json(a) for a in found]}

    @app.post(API_PREFIX + "/alerts/decide", dependencies=[Depends(authorized)])
    def decide(body: DecideBody):
        decision = body.decision.upper()
        if decision not in ("CONFIRMED", "DISCARDED"):
            raise HTTPException(status_code=422, detail=f"invalid decision {body.decision!r}")
        if body.group_id is not None:
            if body.product_id is None:
                raise HTTPException(status_code=422, detail="group decisions need product_id")
            updated = service.decide_group(body.product_id, body.group_id, decision, body.user)
        elif body.alert_ids:
            updated = service.decide_alerts(body.alert_ids, decision, body.user)
        else:
            raise HTTPException(status_code=422, detail="alert_ids or group_id required")
        return {"alerts": [_alert_json(a) for a in updated]}

    @app.get(API_PREFIX + "/reports/summary", dependencies=[Depends(authorized)])
    def summary(state: str | None = None, vendor: str | None = None, unassigned: bool = False):
        return service.report(state=state, vendor=vendor, unassigned_only=unassigned)

    @app.post(API_PREFIX + "/admin/rescan", dependencies=[Depends(authorized)])
    def rescan():
        result = service.scheduled_rescan()
        return {
            "snapshot": result.snapshot_state,
            "products_scanned": result.products_scanned,
            "new_alerts": result.new_alerts,
            "errors": list(result.errors),
        }

    if static_dir:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
