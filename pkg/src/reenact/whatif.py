"""Hypothetical replay: edited initial data and/or an edited statement list.

A scenario rebuilds the transaction's reenactment plan with (a) edited
tables' initial read views replaced by constant relations and (b) the edited
statement sequence, then evaluates it without touching storage or the log.
Statements that map to an original index reuse that statement's recorded
insert row ids positionally, so identity scenarios replay bit-exactly; brand
new statements draw deterministic fresh ids above the table's id horizon.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import ConstRel
from .analysis import analyze, bind
from .errors import EngineError, ScenarioError, UnknownTableError
from .model import IsolationLevel, TxnState
from .parser import parse
from .provenance import DebugView, debug_view
from .reenactor import PlanBuilder, StmtSpec, stmt_specs_from_log
from .sqlast import TDelete, TInsert, TUpdate
from .values import coerce, value_from_json


# -- scenario description ----------------------------------------------------

@dataclass(frozen=True)
class KeepOp:
    index: int


@dataclass(frozen=True)
class ReplaceOp:
    index: int
    sql: str
    binds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class InsertAtOp:
    index: int
    sql: str
    binds: dict = field(default_factory=dict)


@dataclass(frozen=True)
class DeleteOp:
    index: int


@dataclass
class WhatIfScenario:
    xid: int
    data_edits: list = field(default_factory=list)  # [(table, [row values])]
    statement_edits: list | None = None  # None/[] = keep every statement

    @classmethod
    def from_json(cls, doc: dict) -> "WhatIfScenario":
        try:
            xid = int(doc["xid"])
        except (KeyError, TypeError, ValueError):
            raise ScenarioError("scenario requires an integer 'xid'") from None
        data_edits = []
        for edit in doc.get("dataEdits", []) or []:
            table = edit.get("table")
            rows = edit.get("rows")
            if not isinstance(table, str) or not isinstance(rows, list):
                raise ScenarioError("dataEdits entries need 'table' and 'rows'")
            data_edits.append(
                (table, [[value_from_json(v) for v in row] for row in rows]))
        edits = None
        if doc.get("statementEdits") is not None:
            edits = []
            for pos, item in enumerate(doc["statementEdits"]):
                op = item.get("op")
                try:
                    index = int(item["index"])
                except (KeyError, TypeError, ValueError):
                    raise ScenarioError(f"statement edit {pos}: bad index") from None
                binds = {k: value_from_json(v)
                         for k, v in (item.get("binds") or {}).items()}
                if op == "KEEP":
                    edits.append(KeepOp(index))
                elif op == "REPLACE":
                    edits.append(ReplaceOp(index, item.get("sql", ""), binds))
                elif op == "INSERT_AT":
                    edits.append(InsertAtOp(index, item.get("sql", ""), binds))
                elif op == "DELETE":
                    edits.append(DeleteOp(index))
                else:
                    raise ScenarioError(f"statement edit {pos}: unknown op {op!r}")
        return cls(xid, data_edits, edits)


@dataclass
class WouldAbort:
    stmt_index: int
    conflicting_xid: int
    table: str
    row_id: int

    def to_json(self) -> dict:
        return {"stmtIndex": self.stmt_index, "conflictXid": self.conflicting_xid,
                "table": self.table, "rowId": self.row_id}


@dataclass
class RowChange:
    row_id: int
    columns: list  # [(column name, old value, new value)]
    creator_changed: bool
    old_creator: tuple
    new_creator: tuple


@dataclass
class TableDiff:
    table: str
    only_in_original: list
    only_in_scenario: list
    changed: list  # RowChange

    def is_empty(self) -> bool:
        return not (self.only_in_original or self.only_in_scenario or self.changed)


@dataclass
class WhatIfResult:
    scenario: WhatIfScenario
    would_abort: WouldAbort | None
    view: DebugView
    divergence: list  # TableDiff, only non-empty entries
    statements: list  # final statement SQL texts


# -- scenario compilation -------------------------------------------------------

def _scenario_specs(engine, record, scenario: WhatIfScenario) -> list:
    originals = stmt_specs_from_log(engine, scenario.xid)
    edits = scenario.statement_edits
    if not edits:
        edits = [KeepOp(i) for i in range(len(originals))]
    catalog = engine.catalog()
    specs: list[StmtSpec] = []
    used: set[int] = set()
    for pos, op in enumerate(edits):
        if isinstance(op, (KeepOp, ReplaceOp, DeleteOp)):
            if not (0 <= op.index < len(originals)):
                raise ScenarioError(
                    f"statement edit {pos}: original index {op.index} out of range")
            if op.index in used:
                raise ScenarioError(
                    f"statement edit {pos}: original index {op.index} referenced twice")
            used.add(op.index)
        if isinstance(op, DeleteOp):
            continue
        if isinstance(op, KeepOp):
            base = originals[op.index]
            sql, binds, scn = base.sql_text, base.binds, base.scn
            inherited_ids = base.inserted_ids
        elif isinstance(op, ReplaceOp):
            base = originals[op.index]
            sql, binds, scn = op.sql, op.binds, base.scn
            inherited_ids = base.inserted_ids
        elif isinstance(op, InsertAtOp):
            if not (0 <= op.index <= len(originals)):
                raise ScenarioError(
                    f"statement edit {pos}: insertion point {op.index} out of range")
            sql, binds = op.sql, op.binds
            if op.index < len(originals):
                scn = originals[op.index].scn
            elif originals:
                scn = originals[-1].scn
            else:
                scn = record.begin_scn
            inherited_ids = ()
        else:
            raise ScenarioError(f"statement edit {pos}: unsupported op")
        try:
            typed = analyze(bind(parse(sql), binds), catalog)
        except EngineError as exc:
            raise ScenarioError(f"statement edit {pos}: {exc.message}") from exc
        target = typed.table if isinstance(typed, (TUpdate, TDelete, TInsert)) else None
        overflow_base = None
        if isinstance(typed, TInsert):
            overflow_base = engine.db.table(typed.table).next_row_id
        specs.append(StmtSpec(
            index=len(specs), typed=typed, sql_text=sql, binds=dict(binds),
            scn=scn, inserted_ids=inherited_ids, affected_ids=frozenset(),
            target=target, overflow_base=overflow_base))
    return specs


def _initial_overrides(engine, record, scenario: WhatIfScenario) -> dict:
    overrides = {}
    catalog = engine.catalog()
    for table, rows in scenario.data_edits:
        if table not in catalog:
            raise UnknownTableError(f"unknown table {table!r} in data edit")
        schema = tuple(catalog[table].columns)
        kinds = tuple(kind for _, kind in schema)
        # positional id reuse against the transaction's original initial view
        original = engine.db.scan_asof(table, record.begin_scn)
        original_ids = [v.row_id for v in original]
        next_free = engine.db.table(table).next_row_id
        const_rows = []
        for pos, raw in enumerate(rows):
            if len(raw) != len(kinds):
                raise ScenarioError(
                    f"data edit for {table!r}: row {pos} has {len(raw)} values, "
                    f"expected {len(kinds)}")
            try:
                values = tuple(coerce(v, k) for v, k in zip(raw, kinds))
            except EngineError as exc:
                raise ScenarioError(
                    f"data edit for {table!r}: row {pos}: {exc.message}") from exc
            rid = original_ids[pos] if pos < len(original_ids) else next_free + pos
            const_rows.append((values, rid, 0, None, ("e", table, rid)))
        overrides[table] = ConstRel(schema, tuple(const_rows), with_refs=True)
    return overrides


def _check_would_abort(engine, record, plan) -> WouldAbort | None:
    """First-updater-wins advisory against the recorded concurrent history."""
    if record.isolation is not IsolationLevel.SNAPSHOT:
        return None
    concurrent = [t for t in engine.txns.values()
                  if t.xid != record.xid and t.state is TxnState.COMMITTED
                  and t.is_concurrent_with(record)]
    for spec in plan.stmts:
        if spec.target is None:
            continue
        for rid in sorted(spec.affected_ids):
            for other in sorted(concurrent, key=lambda t: t.xid):
                if (spec.target, rid) in other.write_set:
                    return WouldAbort(spec.index, other.xid, spec.target, rid)
    return None


def run_whatif(engine, scenario: WhatIfScenario,
               show_unaffected: bool = False) -> WhatIfResult:
    """Replay the scenario and report the hypothetical outcome.

    Storage, the clock, and the audit log are never modified; a conflict
    with the recorded history is reported as an advisory, and the
    hypothetical view is still computed.
    """
    record = engine.txn_record(scenario.xid)
    specs = _scenario_specs(engine, record, scenario)
    overrides = _initial_overrides(engine, record, scenario)
    builder = PlanBuilder(engine, scenario.xid, record.isolation,
                          record.begin_scn, specs,
                          initial_overrides=overrides, derive_claims=True)
    plan = builder.build()
    plan.commit_scn = record.commit_scn
    original_plan = _original_plan(engine, record)
    shown = tuple(sorted(set(plan.accessed_tables)
                         | set(original_plan.accessed_tables)
                         | {table for table, _ in scenario.data_edits}))
    shown = shown or None
    scenario_view = debug_view(engine, scenario.xid,
                               show_unaffected=show_unaffected, plan=plan,
                               tables=shown)
    original_view = debug_view(engine, scenario.xid, show_unaffected=True,
                               plan=original_plan, tables=shown)
    divergence = diff_views(original_view, scenario_view)
    would_abort = _check_would_abort(engine, record, plan)
    return WhatIfResult(
        scenario=scenario, would_abort=would_abort, view=scenario_view,
        divergence=divergence, statements=[s.sql_text for s in plan.stmts])


def _original_plan(engine, record):
    from .reenactor import reenact_transaction
    return reenact_transaction(engine, record.xid, allow_uncommitted=True)


def diff_views(original: DebugView, scenario: DebugView) -> list:
    """Per-table divergence of the two views' final states, keyed by row id."""
    tables = sorted(set(original.tables) | set(scenario.tables))
    out = []
    for table in tables:
        a_rows = {r.rid: r for r in original.final_relations().get(table, [])}
        b_rows = {r.rid: r for r in scenario.final_relations().get(table, [])}
        schema = original.schemas.get(table) or scenario.schemas.get(table)
        names = [name for name, _ in schema]
        only_a = sorted(set(a_rows) - set(b_rows))
        only_b = sorted(set(b_rows) - set(a_rows))
        changed = []
        for rid in sorted(set(a_rows) & set(b_rows)):
            ra, rb = a_rows[rid], b_rows[rid]
            cols = [(names[i], ra.values[i], rb.values[i])
                    for i in range(len(names)) if ra.values[i] != rb.values[i]]
            creator_a = (ra.creator_xid, ra.creator_stmt)
            creator_b = (rb.creator_xid, rb.creator_stmt)
            if cols or creator_a != creator_b:
                changed.append(RowChange(rid, cols, creator_a != creator_b,
                                         creator_a, creator_b))
        diff = TableDiff(table, only_a, only_b, changed)
        if not diff.is_empty():
            out.append(diff)
    return out
