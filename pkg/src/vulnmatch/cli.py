"""Command-line entry point binding every engine operation for offline use.

Exit codes: 0 success, 1 operational failure, 2 usage or parse error.
Every matching command works from a persisted snapshot directory with no
network access. Output is deterministic for fixed inputs; --format selects
text (line-delimited records, documented field order) or JSON.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .cpe import (
    bind_to_formatted_string,
    bind_to_uri,
    unbind_formatted_string,
    unbind_uri,
    wfn_from_text,
    wfn_to_text,
)
from .errors import (
    InvalidWfn,
    MalformedFormattedString,
    MalformedUri,
    VulnmatchError,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class _MissingOption(Exception):
    pass


def _need(args, name: str) -> str:
    value = getattr(args, name, None)
    if value is None:
        raise _MissingOption(f"--{name} is required (as a global or subcommand flag)")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vulnmatch",
        description="Assign CPE names to inventoried software and scan CVE feeds.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--threshold", type=int, default=None, help="edit-distance threshold (default 2)")
    parser.add_argument("--snapshot", default=None, help="snapshot directory (also settable per subcommand)")
    parser.add_argument("--store", default=None, help="triage store path (also settable per subcommand)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command")

    cpe = sub.add_parser("cpe", help="CPE name conversions")
    cpe_sub = cpe.add_subparsers(dest="cpe_command")
    convert = cpe_sub.add_parser("convert", help="convert between uri, fs, and wfn forms")
    convert.add_argument("--from", dest="from_form", required=True, choices=("uri", "fs", "wfn"))
    convert.add_argument("--to", dest="to_form", required=True, choices=("uri", "fs", "wfn"))
    convert.add_argument("value")

    feeds = sub.add_parser("feeds", help="feed ingestion")
    feeds_sub = feeds.add_subparsers(dest="feeds_command")
    ingest = feeds_sub.add_parser("ingest", help="parse feeds into a snapshot directory")
    ingest.add_argument("--cpe-dict", required=True, help="path or URL of the CPE dictionary XML")
    ingest.add_argument("--cve-feed", action="append", default=[], help="path or URL of a CVE feed XML (repeatable)")
    ingest.add_argument("--out", required=True, help="snapshot directory to write")
    ingest.add_argument("--cache-dir", default=None, help="cache for conditional remote fetches")

    match = sub.add_parser("match", help="offline matching against a snapshot")
    match_sub = match.add_subparsers(dest="match_command")
    mcpe = match_sub.add_parser("cpe", help="rank CPE candidates for a product")
    mcpe.add_argument("--vendor", default="")
    mcpe.add_argument("--product", required=True)
    mcpe.add_argument("--version", default="")
    mcpe.add_argument("--snapshot", default=argparse.SUPPRESS)
    mcpe.add_argument("--limit", type=int, default=None)
    mcve = match_sub.add_parser("cve", help="find CVEs for an assigned CPE")
    mcve.add_argument("--cpe", required=True, help="assigned CPE as URI or formatted string")
    mcve.add_argument("--snapshot", default=argparse.SUPPRESS)

    audit = sub.add_parser("audit", help="dataset consistency audit")
    audit.add_argument("--snapshot", default=argparse.SUPPRESS)
    audit.add_argument("--out", default=None, help="write the JSON report here (plus .txt summary)")

    imp = sub.add_parser("import", help="import inventory into the store")
    imp.add_argument("file")
    imp.add_argument("--store", default=argparse.SUPPRESS)
    imp.add_argument("--source", default="default")

    cand = sub.add_parser("candidates", help="ranked candidates for a stored product")
    cand.add_argument("product_id", type=int)
    cand.add_argument("--store", default=argparse.SUPPRESS)
    cand.add_argument("--snapshot", default=argparse.SUPPRESS)
    cand.add_argument("--limit", type=int, default=10)
    cand.add_argument(
        "--auto-assign-top",
        action="store_true",
        help="EXPERIMENTAL: assign the top candidate without review; known to pick wrong names",
    )

    assign = sub.add_parser("assign", help="assign a CPE to a stored product")
    assign.add_argument("product_id", type=int)
    assign.add_argument("--store", default=argparse.SUPPRESS)
    assign.add_argument("--snapshot", default=argparse.SUPPRESS)
    group = assign.add_mutually_exclusive_group(required=True)
    group.add_argument("--cpe", help="URI or formatted string to assign")
    group.add_argument("--wfn", help="WFN in attribute:value form")
    assign.add_argument("--source", choices=("CANDIDATE_SELECTED", "USER_EDITED"), default="CANDIDATE_SELECTED")
    assign.add_argument("--user", default="")

    scan = sub.add_parser("scan", help="scan an assigned product for CVEs")
    scan.add_argument("product_id", type=int)
    scan.add_argument("--store", default=argparse.SUPPRESS)
    scan.add_argument("--snapshot", default=argparse.SUPPRESS)

    decide = sub.add_parser("decide", help="confirm or discard alerts")
    decide.add_argument("--store", default=argparse.SUPPRESS)
    decide.add_argument("--decision", required=True, choices=("confirmed", "discarded"))
    decide.add_argument("--alert", action="append", type=int, default=[], help="alert id (repeatable)")
    decide.add_argument("--group", default=None, help="group id (needs --product)")
    decide.add_argument("--product", type=int, default=None)
    decide.add_argument("--user", default="")

    report = sub.add_parser("report", help="inventory and alert overview")
    report.add_argument("--store", default=argparse.SUPPRESS)
    report.add_argument("--state", choices=("PENDING", "CONFIRMED", "DISCARDED"), default=None)
    report.add_argument("--vendor", default=None)
    report.add_argument("--unassigned", action="store_true")

    rescan = sub.add_parser("rescan", help="refresh feeds and rescan all assigned products")
    rescan.add_argument("--store", default=argparse.SUPPRESS)
    rescan.add_argument("--snapshot", default=argparse.SUPPRESS, help="snapshot directory to load and refresh")
    rescan.add_argument("--cpe-dict", default=None)
    rescan.add_argument("--cve-feed", action="append", default=[])
    rescan.add_argument("--cache-dir", default=None)

    serve = sub.add_parser("serve", help="run the HTTP API")
    serve.add_argument("--store", default=argparse.SUPPRESS)
    serve.add_argument("--snapshot", default=argparse.SUPPRESS)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--token", default=None, help="static bearer token")
    serve.add_argument("--static-dir", default=None, help="serve a UI bundle from this directory")
    serve.add_argument("--rescan-interval", type=float, default=None, help="seconds between scheduled rescans")

    return parser


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _wfn_from_value(value: str):
    lowered = value.strip().lower()
    if lowered.startswith("cpe:2.3:"):
        return unbind_formatted_string(value)
    if lowered.startswith("cpe:/"):
        return unbind_uri(value)
    return wfn_from_text(value)


def _cmd_cpe_convert(args) -> int:
    if args.from_form == "uri":
        wfn = unbind_uri(args.value)
    elif args.from_form == "fs":
        wfn = unbind_formatted_string(args.value)
    else:
        wfn = wfn_from_text(args.value)
    if args.to_form == "uri":
        out = bind_to_uri(wfn).raw
    elif args.to_form == "fs":
        out = bind_to_formatted_string(wfn).raw
    else:
        out = wfn_to_text(wfn)
    if args.format == "json":
        from .api import wfn_to_json

        payload = {"wfn": wfn_to_json(wfn)} if args.to_form == "wfn" else {args.to_form: out}
        print(json.dumps(payload, sort_keys=True))
    else:
        print(out)
    return EXIT_OK


def _cmd_feeds_ingest(args) -> int:
    from .feeds import build_snapshot, fetch_feed, parse_cpe_dictionary, parse_cve_feed, save_snapshot

    result = fetch_feed(args.cpe_dict, cache_dir=args.cache_dir)
    with result.open() as stream:
        parsed_dict = parse_cpe_dictionary(stream)
    cve_entries = []
    cve_skipped = 0
    for descriptor in args.cve_feed:
        fetched = fetch_feed(descriptor, cache_dir=args.cache_dir)
        with fetched.open() as stream:
            parsed = parse_cve_feed(stream)
        cve_entries.extend(parsed.entries)
        cve_skipped += parsed.skipped
    snapshot = build_snapshot(parsed_dict.entries, cve_entries)
    save_snapshot(snapshot, args.out)
    payload = {
        "snapshot": args.out,
        "dictionary_entries": len(snapshot.dictionary),
        "dictionary_skipped": parsed_dict.skipped,
        "cve_entries": len(snapshot.cves),
        "cve_skipped": cve_skipped,
    }
    _emit(
        args,
        payload,
        [
            f"snapshot written to {args.out}",
            f"dictionary entries: {len(snapshot.dictionary)} ({parsed_dict.skipped} skipped)",
            f"cve entries: {len(snapshot.cves)} ({cve_skipped} skipped)",
        ],
    )
    return EXIT_OK


def _threshold(args) -> int:
    from .matching import DEFAULT_THRESHOLD

    return args.threshold if args.threshold is not None else DEFAULT_THRESHOLD


def _cmd_match_cpe(args) -> int:
    from .feeds import load_snapshot
    from .matching import InventoryProduct, generate_search_terms, match_cpe_candidates

    snapshot = load_snapshot(_need(args, "snapshot"))
    product = InventoryProduct(
        external_id="cli", vendor_raw=args.vendor, product_raw=args.product, version_raw=args.version
    )
    terms = generate_search_terms(product)
    candidates = match_cpe_candidates(terms, snapshot, args.version, threshold=_threshold(args))
    if args.limit is not None:
        candidates = candidates[: args.limit]
    records = [
        {
            "rank": c.rank,
            "uri": c.entry.uri.raw,
            "title": c.entry.title,
            "vendor_distance": c.vendor_distance,
            "product_distance": c.product_distance,
        }
        for c in candidates
    ]
    if args.format == "json":
        for record in records:
            print(json.dumps(record, sort_keys=True))
    else:
        # field order: rank, uri, vendor_distance, product_distance, title
        for r in records:
            print(f"{r['rank']}\t{r['uri']}\t{r['vendor_distance']}\t{r['product_distance']}\t{r['title']}")
    return EXIT_OK


def _cmd_match_cve(args) -> int:
    from .feeds import load_snapshot
    from .matching import merge_candidates, search_cves_by_cpe, search_cves_by_summary

    snapshot = load_snapshot(_need(args, "snapshot"))
    wfn = _wfn_from_value(args.cpe)
    threshold = _threshold(args)
    merged = merge_candidates(
        search_cves_by_cpe(wfn, snapshot, threshold=threshold),
        search_cves_by_summary(wfn, snapshot, threshold=threshold),
    )
    records = [
        {
            "cve_id": c.cve.id,
            "origin": c.origin.value,
            "exact_version": c.exact_version,
            "matched_cpes": [uri.raw for uri in c.matched_cpes],
        }
        for c in merged
    ]
    if args.format == "json":
        for record in records:
            print(json.dumps(record, sort_keys=True))
    else:
        # field order: cve_id, origin, exact_version, matched cpes
        for r in records:
            cpes = ",".join(r["matched_cpes"])
            print(f"{r['cve_id']}\t{r['origin']}\t{int(r['exact_version'])}\t{cpes}")
    return EXIT_OK


def _cmd_audit(args) -> int:
    from .audit import run_audit, write_report
    from .feeds import load_snapshot

    snapshot = load_snapshot(_need(args, "snapshot"))
    report = run_audit(snapshot)
    if args.out:
        write_report(report, args.out)
    if args.format == "json":
        print(json.dumps(report.to_dict(), sort_keys=True))
    else:
        print(report.summary_text())
    return EXIT_OK


def _open_service(store_path: str, snapshot_dir: str | None, args):
    from .service import load_service

    return load_service(store_path, snapshot_dir, threshold=_threshold(args))


def _cmd_import(args) -> int:
    service = _open_service(_need(args, "store"), None, args)
    summary = service.import_inventory(args.file, source_tag=args.source)
    payload = {
        "created": summary.created,
        "updated": summary.updated,
        "skipped": summary.skipped,
        "errors": list(summary.errors),
    }
    _emit(
        args,
        payload,
        [f"created: {summary.created}", f"updated: {summary.updated}", f"skipped: {summary.skipped}"]
        + [f"error: {e}" for e in summary.errors],
    )
    return EXIT_OK


def _cmd_candidates(args) -> int:
    service = _open_service(_need(args, "store"), _need(args, "snapshot"), args)
    candidates = service.list_candidates(args.product_id, limit=args.limit)
    if not candidates:
        _emit(args, {"candidates": [], "no_candidates": True}, ["no candidates"])
        return EXIT_OK
    for c in candidates:
        if args.format == "json":
            print(
                json.dumps(
                    {
                        "rank": c.rank,
                        "uri": c.entry.uri.raw,
                        "title": c.entry.title,
                        "vendor_distance": c.vendor_distance,
                        "product_distance": c.product_distance,
                    },
                    sort_keys=True,
                )
            )
        else:
            print(f"{c.rank}\t{c.entry.uri.raw}\t{c.vendor_distance}\t{c.product_distance}\t{c.entry.title}")
    if args.auto_assign_top:
        top = candidates[0]
        service.assign_cpe(args.product_id, top.entry.wfn, source="CANDIDATE_SELECTED", user="auto")
        print(f"auto-assigned: {top.entry.uri.raw}", file=sys.stderr)
    return EXIT_OK


def _cmd_assign(args) -> int:
    service = _open_service(_need(args, "store"), getattr(args, "snapshot", None), args)
    wfn = _wfn_from_value(args.cpe if args.cpe else args.wfn)
    assignment = service.assign_cpe(args.product_id, wfn, source=args.source, user=args.user)
    payload = {
        "product_id": args.product_id,
        "uri": bind_to_uri(assignment.wfn).raw,
        "source": assignment.source,
    }
    _emit(args, payload, [f"assigned {payload['uri']} to product {args.product_id}"])
    return EXIT_OK


def _cmd_scan(args) -> int:
    service = _open_service(_need(args, "store"), _need(args, "snapshot"), args)
    created = service.scan_product(args.product_id)
    payload = {"product_id": args.product_id, "new_alerts": len(created)}
    lines = [f"new alerts: {len(created)}"]
    for alert in created:
        lines.append(f"{alert.id}\t{alert.cve_id}\t{alert.origin}\t{int(alert.exact_version)}")
    _emit(args, payload, lines)
    return EXIT_OK


def _cmd_decide(args) -> int:
    service = _open_service(_need(args, "store"), None, args)
    decision = args.decision.upper()
    if args.group:
        if args.product is None:
            print("--group needs --product", file=sys.stderr)
            return EXIT_USAGE
        updated = service.decide_group(args.product, args.group, decision, args.user)
    elif args.alert:
        updated = service.decide_alerts(args.alert, decision, args.user)
    else:
        print("nothing to decide: pass --alert or --group", file=sys.stderr)
        return EXIT_USAGE
    _emit(
        args,
        {"decided": [a.id for a in updated], "state": decision},
        [f"{a.id}\t{a.cve_id}\t{a.state}" for a in updated],
    )
    return EXIT_OK


def _cmd_report(args) -> int:
    service = _open_service(_need(args, "store"), None, args)
    report = service.report(state=args.state, vendor=args.vendor, unassigned_only=args.unassigned)
    if args.format == "json":
        print(json.dumps(report, sort_keys=True))
    else:
        for p in report["products"]:
            assigned = p["assignment"] or "-"
            print(
                f"{p['id']}\t{p['vendor']}\t{p['product']}\t{p['version']}\t{assigned}"
                f"\tpending={p['alerts']['pending']}"
                f"\tconfirmed={p['alerts']['confirmed']}"
                f"\tdiscarded={p['alerts']['discarded']}"
            )
        totals = report["totals"]
        print(
            f"totals: products={totals['products']} assigned={totals['assigned']}"
            f" pending={totals['pending']} confirmed={totals['confirmed']}"
            f" discarded={totals['discarded']}"
        )
    return EXIT_OK


def _cmd_rescan(args) -> int:
    from pathlib import Path

    from .service import FeedConfig, load_service

    snapshot_dir = getattr(args, "snapshot", None)
    feeds = FeedConfig(
        cpe_dict=args.cpe_dict,
        cve_feeds=tuple(args.cve_feed),
        cache_dir=args.cache_dir,
        snapshot_dir=snapshot_dir,
    )
    # a snapshot dir that does not exist yet is created by the first refresh
    existing = snapshot_dir if snapshot_dir and Path(snapshot_dir).exists() else None
    service = load_service(_need(args, "store"), existing, threshold=_threshold(args), feeds=feeds)
    summary = service.scheduled_rescan()
    payload = {
        "snapshot": summary.snapshot_state,
        "products_scanned": summary.products_scanned,
        "new_alerts": summary.new_alerts,
        "errors": list(summary.errors),
    }
    _emit(
        args,
        payload,
        [
            f"snapshot: {summary.snapshot_state}",
            f"products scanned: {summary.products_scanned}",
            f"new alerts: {summary.new_alerts}",
        ]
        + [f"error: {e}" for e in summary.errors],
    )
    return EXIT_OK if not summary.errors else EXIT_FAILURE


def _cmd_serve(args) -> int:
    import threading

    import uvicorn

    from .api import create_app
    from .service import load_service

    service = _open_service(_need(args, "store"), getattr(args, "snapshot", None), args)
    app = create_app(service, auth_token=args.token, static_dir=args.static_dir)
    if args.rescan_interval:
        def loop():
            import time

            while True:
                time.sleep(args.rescan_interval)
                try:
                    service.scheduled_rescan()
                except Exception:  # the scheduler must never die
                    log.exception("scheduled rescan failed")

        threading.Thread(target=loop, daemon=True).start()
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


_HANDLERS = {
    ("cpe", "convert"): _cmd_cpe_convert,
    ("feeds", "ingest"): _cmd_feeds_ingest,
    ("match", "cpe"): _cmd_match_cpe,
    ("match", "cve"): _cmd_match_cve,
    ("audit", None): _cmd_audit,
    ("import", None): _cmd_import,
    ("candidates", None): _cmd_candidates,
    ("assign", None): _cmd_assign,
    ("scan", None): _cmd_scan,
    ("decide", None): _cmd_decide,
    ("report", None): _cmd_report,
    ("rescan", None): _cmd_rescan,
    ("serve", None): _cmd_serve,
}


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO)
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    subcommand = getattr(args, f"{args.command}_command", None)
    handler = _HANDLERS.get((args.command, subcommand))
    if handler is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return handler(args)
    except _MissingOption as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (MalformedUri, MalformedFormattedString, InvalidWfn) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VulnmatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
