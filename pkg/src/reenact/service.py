"""HTTP+JSON facade over one engine: history, debugging, provenance, what-if.

Every GET is side-effect free; POST /api/execute is the only mutating
endpoint and is linearized (concurrent submissions get 409). Document shapes
are fixed in docs/api.md.
"""
from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .auditlog import TransactionSummary, wall_clock_of
from .engine import Engine
from .errors import EngineError, ExecutionBusyError, InvalidRangeError
from .provenance import DebugView, debug_view, provenance_graph, resolve_view_ref
from .reenactor import reenact_transaction
from .values import value_to_json
from .whatif import WhatIfResult, WhatIfScenario, run_whatif

_STATUS = {
    "txn_not_found": 404,
    "table_not_found": 404,
    "unresolvable_ref": 404,
    "execute_busy": 409,
}


def _error_response(exc: EngineError) -> JSONResponse:
    body = {"error": {"code": exc.code, "message": exc.message}}
    if hasattr(exc, "line"):
        body["error"]["position"] = {"line": exc.line,
                                     "column": getattr(exc, "column", None)}
    return JSONResponse(status_code=_STATUS.get(exc.code, 400), content=body)


def summary_to_json(s: TransactionSummary) -> dict:
    return {
        "xid": s.xid,
        "session": s.session,
        "isolation": s.isolation.value,
        "state": s.state,
        "beginScn": s.begin_scn,
        "commitScn": s.commit_scn,
        "endScn": s.end_scn,
        "beginWallClock": wall_clock_of(s.begin_scn),
        "statements": [{
            "stmtIndex": st.stmt_index,
            "startScn": st.start_scn,
            "endScn": st.end_scn,
            "sql": st.sql_text,
            "binds": {k: value_to_json(v) for k, v in st.binds.items()},
            "kind": st.kind,
        } for st in s.statements],
    }


def debug_view_to_json(view: DebugView) -> dict:
    def row_json(row):
        return {
            "rowId": row.rid,
            "values": [value_to_json(v) for v in row.values],
            "creatorXid": row.creator_xid,
            "creatorStmt": row.creator_stmt,
            "scn": row.scn,
            "affected": row.affected,
            "ref": ":".join(str(p) for p in row.ref),
            "prov": [":".join(str(p) for p in parent) for parent in row.parents],
        }

    return {
        "xid": view.xid,
        "isolation": view.isolation,
        "state": view.state,
        "tables": list(view.tables),
        "showUnaffected": view.show_unaffected,
        "schemas": {t: [{"name": n, "kind": k.value} for n, k in cols]
                    for t, cols in view.schemas.items()},
        "columns": [{
            "index": c.index,
            "sql": c.sql_text,
            "binds": {k: value_to_json(v) for k, v in (c.binds or {}).items()},
            "reenactSql": c.reenact_sql,
            "tables": {
                t: [row_json(r) for r in rows
                    if view.show_unaffected or not r.hidden]
                for t, rows in c.relations.items()},
        } for c in view.columns],
    }


def whatif_result_to_json(result: WhatIfResult) -> dict:
    return {
        "wouldAbort": result.would_abort.to_json() if result.would_abort else None,
        "statements": result.statements,
        "view": debug_view_to_json(result.view),
        "divergence": [{
            "table": d.table,
            "onlyInOriginal": d.only_in_original,
            "onlyInScenario": d.only_in_scenario,
            "changed": [{
                "rowId": ch.row_id,
                "columns": [{"name": name,
                             "old": value_to_json(old),
                             "new": value_to_json(new)}
                            for name, old, new in ch.columns],
                "creatorChanged": ch.creator_changed,
            } for ch in d.changed],
        } for d in result.divergence],
    }


def create_app(engine: Engine, frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="reenact", docs_url=None, redoc_url=None)
    execute_gate = threading.Lock()

    @app.exception_handler(EngineError)
    async def engine_error_handler(request: Request, exc: EngineError):
        return _error_response(exc)

    @app.get("/api/history")
    def history(from_: int | None = Query(default=None, alias="from"),
                to: int | None = Query(default=None)):
        scn_range = None
        if from_ is not None or to is not None:
            if from_ is not None and to is not None and from_ > to:
                raise InvalidRangeError(f"inverted range [{from_}, {to}]")
            scn_range = (from_, to)
        return [summary_to_json(s) for s in engine.log.list_transactions(scn_range)]

    @app.get("/api/transactions/{xid}")
    def transaction_detail(xid: int):
        summary = engine.log.summary(xid)
        doc = summary_to_json(summary)
        doc["entries"] = [{
            "kind": e.kind,
            "stmtIndex": e.stmt_index,
            "sqlText": e.sql_text,
            "binds": {k: value_to_json(v) for k, v in e.binds.items()},
            "stmtScn": e.stmt_scn,
            "wallClock": e.wall_clock,
        } for e in engine.log.entries_for(xid)]
        return doc

    @app.get("/api/transactions/{xid}/debug")
    def transaction_debug(xid: int, all: bool = False, tables: str | None = None):
        subset = tuple(t for t in tables.split(",") if t) if tables else None
        view = debug_view(engine, xid, show_unaffected=all, tables=subset)
        return debug_view_to_json(view)

    @app.get("/api/transactions/{xid}/provenance")
    def transaction_provenance(xid: int, table: str, row: int,
                               stmt: int | None = None):
        plan = reenact_transaction(engine, xid)
        evaluation = plan.evaluate(engine.db, instrumented=True)
        view = debug_view(engine, xid, show_unaffected=True, plan=plan,
                          evaluation=evaluation)
        ref = resolve_view_ref(view, table, row, stmt)
        graph = provenance_graph(engine, ref, evaluation=evaluation)
        return graph.to_json()

    @app.post("/api/transactions/{xid}/whatif")
    async def transaction_whatif(xid: int, request: Request):
        doc = await request.json()
        doc["xid"] = xid
        scenario = WhatIfScenario.from_json(doc)
        show = bool(doc.get("showUnaffected", False))
        result = run_whatif(engine, scenario, show_unaffected=show)
        return whatif_result_to_json(result)

    @app.post("/api/execute")
    async def execute(request: Request):
        body = (await request.body()).decode("utf-8")
        if not execute_gate.acquire(blocking=False):
            raise ExecutionBusyError("another execution is in flight")
        try:
            summary = engine.run_workload(body)
            return {
                "transactions": [summary_to_json(engine.log.summary(xid))
                                 for xid in summary.xids],
                "issues": [{"line": i.line, "code": i.code, "message": i.message}
                           for i in summary.issues],
                "skipped": [{"line": line, "reason": reason}
                            for line, reason in summary.skipped],
            }
        finally:
            execute_gate.release()

    @app.get("/api/tables")
    def tables():
        return {name: [{"name": n, "kind": k.value} for n, k in schema.columns]
                for name, schema in sorted(engine.catalog().items())}

    if frontend_dir and Path(frontend_dir).is_dir():
        app.mount("/", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
