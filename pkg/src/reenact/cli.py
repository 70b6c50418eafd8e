"""Command-line interface: load workloads, browse history, dump debug and
provenance output, replay what-if scenarios, verify reenactment equivalence,
and serve the HTTP API."""
from __future__ import annotations

import argparse
import json
import sys

from .engine import Engine
from .errors import EngineError
from .provenance import debug_view, provenance_graph, ref_id, resolve_view_ref
from .reenactor import reenact_transaction
from .values import format_value
from .verify import run_verification
from .whatif import WhatIfScenario, run_whatif


def render_table(headers, rows) -> str:
    cells = [list(map(str, headers))] + [list(map(str, row)) for row in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for n, row in enumerate(cells):
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _load_engine(args) -> Engine:
    engine = Engine()
    workload = getattr(args, "workload", None)
    if workload:
        with open(workload, encoding="utf-8") as fh:
            engine.run_workload(fh.read())
    return engine


def _print_states(engine: Engine) -> None:
    for name, versions in engine.final_states().items():
        schema = engine.catalog()[name]
        print(f"{name}:")
        rows = [[v.row_id] + [format_value(x) for x in v.values] for v in versions]
        print(render_table(["rid"] + list(schema.column_names()), rows))
        print()


def cmd_run(args) -> int:
    engine = Engine()
    with open(args.workload_file, encoding="utf-8") as fh:
        summary = engine.run_workload(fh.read())
    for issue in summary.issues:
        print(f"note: line {issue.line}: {issue.code}: {issue.message}")
    for line, reason in summary.skipped:
        print(f"note: line {line} skipped ({reason})")
    states = []
    for xid in summary.xids:
        record = engine.txn_record(xid)
        states.append(f"T{xid}={record.state.value}")
    if states:
        print("transactions:", " ".join(states))
    print()
    _print_states(engine)
    return 0


def cmd_history(args) -> int:
    engine = _load_engine(args)
    scn_range = None
    if args.from_scn is not None or args.to_scn is not None:
        scn_range = (args.from_scn, args.to_scn)
    summaries = engine.log.list_transactions(scn_range)
    if args.format == "json":
        from .service import summary_to_json
        print(json.dumps([summary_to_json(s) for s in summaries], indent=2))
        return 0
    rows = [[s.xid, s.session, s.isolation.value, s.state, s.begin_scn,
             s.commit_scn if s.commit_scn is not None else "-",
             len(s.statements)] for s in summaries]
    print(render_table(["xid", "session", "isolation", "state", "begin",
                        "commit", "stmts"], rows))
    return 0


def cmd_show(args) -> int:
    engine = _load_engine(args)
    summary = engine.log.summary(args.xid)
    if args.format == "json":
        from .service import summary_to_json
        doc = summary_to_json(summary)
        print(json.dumps(doc, indent=2))
        return 0
    print(f"transaction {summary.xid}  session={summary.session}  "
          f"isolation={summary.isolation.value}  state={summary.state}")
    print(f"begin scn {summary.begin_scn}"
          + (f", commit scn {summary.commit_scn}" if summary.commit_scn else ""))
    for st in summary.statements:
        print(f"  [{st.stmt_index}] scn {st.start_scn}..{st.end_scn}  {st.sql_text}")
        if st.binds:
            binds = ", ".join(f"{k}={format_value(v)}" for k, v in sorted(st.binds.items()))
            print(f"      binds: {binds}")
    return 0


def _render_debug(view) -> str:
    out = [f"debug view for transaction {view.xid} "
           f"({view.isolation}, {view.state})"]
    for column in view.columns:
        if column.index == -1:
            out.append("\n== initial state ==")
        else:
            out.append(f"\n== statement {column.index}: {column.sql_text} ==")
            if column.reenact_sql:
                out.append(f"   replay: {column.reenact_sql}")
        for table, rows in column.relations.items():
            shown = [r for r in rows if view.show_unaffected or not r.hidden]
            names = [n for n, _ in view.schemas[table]]
            out.append(f"  {table}:")
            grid = []
            for r in shown:
                creator = (f"T{r.creator_xid}" if r.creator_xid else "load")
                if r.creator_stmt is not None:
                    creator += f"/{r.creator_stmt}"
                grid.append([r.rid] + [format_value(v) for v in r.values]
                            + [creator, "*" if r.affected else ""])
            table_text = render_table(["rid"] + names + ["creator", "touched"], grid)
            out.append("    " + table_text.replace("\n", "\n    "))
    return "\n".join(out)


def cmd_debug(args) -> int:
    engine = _load_engine(args)
    tables = tuple(args.tables.split(",")) if args.tables else None
    view = debug_view(engine, args.xid, show_unaffected=args.all, tables=tables)
    if args.format == "json":
        from .service import debug_view_to_json
        print(json.dumps(debug_view_to_json(view), indent=2))
    else:
        print(_render_debug(view))
    return 0


def cmd_prov(args) -> int:
    engine = _load_engine(args)
    plan = reenact_transaction(engine, args.xid)
    evaluation = plan.evaluate(engine.db, instrumented=True)
    view = debug_view(engine, args.xid, show_unaffected=True, plan=plan,
                      evaluation=evaluation)
    ref = resolve_view_ref(view, args.table, args.row, args.stmt)
    graph = provenance_graph(engine, ref, evaluation=evaluation)
    if args.format == "json":
        print(json.dumps(graph.to_json(), indent=2))
        return 0
    print(f"provenance of {ref_id(ref)}")
    for node in graph.nodes:
        marker = " <- root" if node.ref == graph.root else ""
        values = ", ".join(format_value(v) for v in node.values)
        creator = f"T{node.creator_xid}" if node.creator_xid else "load"
        print(f"  [layer {node.layer:>2}] {ref_id(node.ref)}  ({values})  "
              f"created by {creator}{marker}")
    for a, b in graph.edges:
        print(f"  edge {ref_id(a)} -> {ref_id(b)}")
    return 0


def cmd_whatif(args) -> int:
    engine = _load_engine(args)
    with open(args.scenario, encoding="utf-8") as fh:
        doc = json.load(fh)
    doc.setdefault("xid", args.xid)
    scenario = WhatIfScenario.from_json(doc)
    result = run_whatif(engine, scenario, show_unaffected=args.all)
    if args.format == "json":
        from .service import whatif_result_to_json
        print(json.dumps(whatif_result_to_json(result), indent=2))
        return 0
    if result.would_abort:
        wa = result.would_abort
        print(f"WOULD ABORT at statement {wa.stmt_index}: conflict with "
              f"transaction {wa.conflicting_xid} on {wa.table!r} row {wa.row_id}")
    print("scenario statements:")
    for i, sql in enumerate(result.statements):
        print(f"  [{i}] {sql}")
    if not result.divergence:
        print("no divergence from the original execution")
    for diff in result.divergence:
        print(f"divergence in {diff.table!r}:")
        if diff.only_in_original:
            print(f"  only in original: rows {diff.only_in_original}")
        if diff.only_in_scenario:
            print(f"  only in scenario: rows {diff.only_in_scenario}")
        for change in diff.changed:
            if change.columns:
                cols = ", ".join(f"{name}: {format_value(old)} -> {format_value(new)}"
                                 for name, old, new in change.columns)
            else:
                cols = "same values, different creating statement"
            print(f"  row {change.row_id}: {cols}")
    print()
    print(_render_debug(result.view))
    return 0


def cmd_verify(args) -> int:
    result = run_verification(args.seeds, base_seed=args.base_seed)
    print(f"{result.passed}/{result.total} histories equivalent "
          f"(seeds {args.base_seed}..{args.base_seed + args.seeds - 1})")
    for failure in result.failures:
        print(f"\nFAIL seed {failure.seed}:")
        for issue in failure.issues:
            print(f"  {issue}")
        print("minimized reproduction script:")
        print(failure.shrunk)
    return 0 if result.ok() else 1


def cmd_serve(args) -> int:
    import uvicorn
    from .service import create_app
    if args.workload:
        engine = _load_engine(args)
    else:
        from .fixtures import banking_engine
        engine, _, _ = banking_engine()
    app = create_app(engine, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export_log(args) -> int:
    engine = _load_engine(args)
    engine.export_log(args.path)
    print(f"exported {len(engine.log.entries)} entries to {args.path}")
    return 0


def cmd_import_log(args) -> int:
    engine = Engine()
    engine.import_log(args.path)
    summaries = engine.log.list_transactions()
    rows = [[s.xid, s.session, s.isolation.value, s.state, s.begin_scn,
             s.commit_scn if s.commit_scn is not None else "-",
             len(s.statements)] for s in summaries]
    print(render_table(["xid", "session", "isolation", "state", "begin",
                        "commit", "stmts"], rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reenact",
        description="Transaction debugger: time travel, replay, provenance, what-if.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, workload_required=False):
        p.add_argument("--workload", required=workload_required,
                       help="workload script that builds the history")
        p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("run", help="execute a workload script and print final states")
    p.add_argument("workload_file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("history", help="list transactions on the timeline")
    add_common(p)
    p.add_argument("--from", dest="from_scn", type=int, default=None)
    p.add_argument("--to", dest="to_scn", type=int, default=None)
    p.set_defaults(func=cmd_history)

    p = sub.add_parser("show", help="transaction detail (statements and binds)")
    p.add_argument("xid", type=int)
    add_common(p)
    p.set_defaults(func=cmd_show)

    p = sub.add_parser("debug", help="per-statement debug view of a transaction")
    p.add_argument("xid", type=int)
    p.add_argument("--all", action="store_true",
                   help="show unaffected rows as well")
    p.add_argument("--tables", default=None, help="comma-separated table subset")
    add_common(p)
    p.set_defaults(func=cmd_debug)

    p = sub.add_parser("prov", help="provenance graph of one tuple version")
    p.add_argument("xid", type=int)
    p.add_argument("table")
    p.add_argument("row", type=int)
    p.add_argument("stmt", type=int, nargs="?", default=None)
    add_common(p)
    p.set_defaults(func=cmd_prov)

    p = sub.add_parser("whatif", help="replay a transaction under a scenario file")
    p.add_argument("xid", type=int)
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--all", action="store_true")
    add_common(p)
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("verify",
                       help="randomized native-vs-reenactment equivalence check")
    p.add_argument("--seeds", type=int, default=100)
    p.add_argument("--base-seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("serve", help="serve the HTTP API (and UI when built)")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--workload", default=None)
    p.add_argument("--frontend", default=None,
                   help="directory with the built web UI")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("export-log", help="write the audit log as JSON lines")
    p.add_argument("path")
    add_common(p, workload_required=True)
    p.set_defaults(func=cmd_export_log)

    p = sub.add_parser("import-log", help="load an exported audit log and list it")
    p.add_argument("path")
    p.set_defaults(func=cmd_import_log)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
