"""Replay of committed transactions as queries over time travel.

A plan holds, per table, one expression per statement index whose evaluation
reproduces the table state the original execution saw after that statement.
Updates become CASE projections, deletes become negated filters, inserts
become unions; read views compose the previous entry (snapshot isolation) or
overlay the transaction's accumulated writes onto a statement-time snapshot
(read committed). Construction needs only the audit log plus storage history.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import (
    AssignIds, ConstRel, EntryMarker, EvalContext, Expr, Filter, Join,
    Overlay, Project, TableAccessAsOf, Union, compile_scalar,
)
from .analysis import analyze, bind
from .codegen import sql_codegen
from .errors import LifecycleError, UnknownTxnError
from .model import IsolationLevel, TxnState
from .parser import parse
from .sqlast import (
    BOOL, TBinOp, TCase, TColRef, TDelete, TInsert, TLiteral, TProvenance,
    TSelect, TUnary, TUpdate, TValues,
)
from .values import ValueKind, coerce


def _true_pred():
    return TBinOp("=", TLiteral(1, ValueKind.INT), TLiteral(1, ValueKind.INT), BOOL)


@dataclass
class StmtSpec:
    """One statement of the (possibly edited) transaction being replayed."""

    index: int
    typed: object
    sql_text: str
    binds: dict
    scn: int
    inserted_ids: tuple = ()
    affected_ids: frozenset = frozenset()
    target: str | None = None
    overflow_base: int | None = None  # what-if id allocation for extra inserts


@dataclass
class ReenactmentPlan:
    xid: int
    isolation: IsolationLevel
    begin_scn: int
    commit_scn: int | None
    up_to: int  # last statement index included; -1 when no statements
    tables: tuple
    stmts: list
    initial: dict  # table -> Expr (read view before statement 0)
    entries: list  # entries[i][table] -> Expr (state after statement i)
    written_tables: tuple = ()
    accessed_tables: tuple = ()
    # claims[i][table]: row ids written by statements <= i (for diagnostics)
    claims: list = field(default_factory=list)

    def evaluate(self, db, instrumented: bool = False):
        """Evaluate every entry; one memoized pass over the shared subtrees."""
        ctx = EvalContext(db, instrumented)
        initial = {t: ctx.evaluate(e) for t, e in self.initial.items()}
        entries = [{t: ctx.evaluate(e) for t, e in entry.items()}
                   for entry in self.entries]
        return PlanEvaluation(self, initial, entries, ctx)

    def statement_sql(self, index: int) -> str | None:
        """Generated reenactment SQL for the statement's target table."""
        spec = self.stmts[index]
        if spec.target is None:
            return None
        return sql_codegen(self.entries[index][spec.target])


@dataclass
class PlanEvaluation:
    plan: ReenactmentPlan
    initial: dict  # table -> Relation
    entries: list  # [ {table -> Relation}, ... ]
    ctx: EvalContext

    def relation(self, stmt_index: int, table: str):
        """Relation at a debug-view column (-1 = initial)."""
        if stmt_index < 0:
            return self.initial[table]
        return self.entries[stmt_index][table]


def _accessed_tables(typed) -> set:
    out = set()

    def from_select(sel):
        for item in sel.from_:
            if hasattr(item, "table"):
                out.add(item.table)
            else:
                from_select(item.select)
        for branch in sel.union_all:
            from_select(branch)

    if isinstance(typed, TUpdate) or isinstance(typed, TDelete):
        out.add(typed.table)
    elif isinstance(typed, TInsert):
        out.add(typed.table)
        if isinstance(typed.source, TSelect):
            from_select(typed.source)
    elif isinstance(typed, TSelect):
        from_select(typed)
    return out


class PlanBuilder:
    """Builds plan entries statement by statement.

    ``derive_claims`` recomputes affected row ids by evaluating predicates
    (needed when statements were edited and recorded ids do not apply).
    """

    def __init__(self, engine, xid: int, isolation: IsolationLevel,
                 begin_scn: int, stmts: list, initial_overrides=None,
                 derive_claims: bool = False):
        self.engine = engine
        self.xid = xid
        self.isolation = isolation
        self.begin_scn = begin_scn
        self.stmts = stmts
        self.initial_overrides = initial_overrides or {}
        self.derive_claims = derive_claims
        self.catalog = engine.catalog()
        self.tables = tuple(sorted(self.catalog))
        self._eval_ctx = EvalContext(engine.db) if derive_claims else None

    def _schema(self, table: str) -> tuple:
        return tuple(self.catalog[table].columns)

    def _initial_expr(self, table: str) -> Expr:
        if table in self.initial_overrides:
            return self.initial_overrides[table]
        if self.isolation is IsolationLevel.READ_COMMITTED and self.stmts:
            asof = self.stmts[0].scn
        else:
            asof = self.begin_scn
        return TableAccessAsOf(table, asof, self._schema(table))

    def build(self) -> ReenactmentPlan:
        current: dict[str, Expr] = {t: self._initial_expr(t) for t in self.tables}
        initial = dict(current)
        claimed: dict[str, set] = {t: set() for t in self.tables}
        entries: list[dict] = []
        claims_log: list[dict] = []
        written: list[str] = []
        accessed: set = set()
        derived_specs: list[StmtSpec] = []

        for spec in self.stmts:
            accessed |= _accessed_tables(spec.typed)
            read_views: dict[str, Expr] = {}

            def read_view(table: str) -> Expr:
                if table not in read_views:
                    read_views[table] = self._read_view_expr(
                        table, current[table], claimed[table], spec.scn)
                return read_views[table]

            rewritten, out_spec = self._reenact_statement(spec, read_view)
            derived_specs.append(out_spec)
            if self.isolation is IsolationLevel.READ_COMMITTED:
                # every table's state moves with the statement-time snapshot
                current = {t: read_view(t) for t in self.tables}
            else:
                current = dict(current)
            if rewritten is not None:
                current[spec.target] = rewritten
                if spec.target not in written:
                    written.append(spec.target)
                claimed = {t: set(s) for t, s in claimed.items()}
                claimed[spec.target] |= set(out_spec.affected_ids)
                claimed[spec.target] |= set(out_spec.inserted_ids)
            entries.append(dict(current))
            claims_log.append({t: frozenset(s) for t, s in claimed.items()})

        return ReenactmentPlan(
            xid=self.xid, isolation=self.isolation, begin_scn=self.begin_scn,
            commit_scn=None, up_to=len(self.stmts) - 1, tables=self.tables,
            stmts=derived_specs, initial=initial, entries=entries,
            written_tables=tuple(written), accessed_tables=tuple(sorted(accessed)),
            claims=claims_log)

    # -- read views ---------------------------------------------------------

    def _read_view_expr(self, table: str, current: Expr, claimed: set,
                        stmt_scn: int) -> Expr:
        if self.isolation is IsolationLevel.SNAPSHOT:
            return EntryMarker(table, self.xid, current)
        base = TableAccessAsOf(table, stmt_scn, self._schema(table))
        if not claimed:
            return EntryMarker(table, self.xid, base)
        member = _rowid_in(claimed)
        own = Filter(member, EntryMarker(table, self.xid, current))
        return Overlay(base, own, frozenset(claimed))

    # -- statement rewrites ----------------------------------------------------

    def _reenact_statement(self, spec: StmtSpec, read_view):
        typed = spec.typed
        if isinstance(typed, TUpdate):
            expr = self._rewrite_update(typed, spec, read_view(typed.table))
            affected = self._claim_filter(spec, typed.where, read_view(typed.table))
            return expr, self._with_claims(spec, affected, ())
        if isinstance(typed, TDelete):
            expr = self._rewrite_delete(typed, spec, read_view(typed.table))
            affected = self._claim_filter(spec, typed.where, read_view(typed.table))
            return expr, self._with_claims(spec, affected, ())
        if isinstance(typed, TInsert):
            expr, inserted = self._rewrite_insert(typed, spec, read_view)
            return expr, self._with_claims(spec, frozenset(), inserted)
        if isinstance(typed, (TSelect, TProvenance)):
            return None, self._with_claims(spec, frozenset(), ())
        raise LifecycleError(f"cannot reenact statement kind {type(typed).__name__}")

    def _with_claims(self, spec: StmtSpec, affected, inserted) -> StmtSpec:
        if not self.derive_claims:
            return spec
        return StmtSpec(spec.index, spec.typed, spec.sql_text, spec.binds,
                        spec.scn, tuple(inserted) or spec.inserted_ids,
                        frozenset(affected), spec.target, spec.overflow_base)

    def _claim_filter(self, spec: StmtSpec, where, view: Expr) -> frozenset:
        if not self.derive_claims:
            return spec.affected_ids
        pred_expr = where if where is not None else _true_pred()
        rel = self._eval_ctx.evaluate(Filter(pred_expr, view))
        return frozenset(r.rid for r in rel.rows)

    def _rewrite_update(self, typed: TUpdate, spec: StmtSpec, view: Expr) -> Project:
        schema = typed.schema
        sets = dict(typed.sets)
        columns = []
        for j, (name, kind) in enumerate(schema):
            col = TColRef(j, kind, typed.table, name)
            if j in sets:
                if typed.where is None:
                    columns.append((name, sets[j]))
                else:
                    columns.append((name, TCase(((typed.where, sets[j]),), col, kind)))
            else:
                columns.append((name, col))
        touch = typed.where if typed.where is not None else _true_pred()
        return Project(tuple(columns), view, touch_pred=touch,
                       touch_xid=self.xid, touch_stmt=spec.index,
                       out_kinds=tuple(kind for _, kind in schema),
                       identity_when_untouched=True)

    def _rewrite_delete(self, typed: TDelete, spec: StmtSpec, view: Expr) -> Filter:
        pred = typed.where if typed.where is not None else _true_pred()
        return Filter(TUnary("NOT", pred, BOOL), view)

    def _rewrite_insert(self, typed: TInsert, spec: StmtSpec, read_view):
        from .algebra import translate_select
        schema = typed.schema
        kinds = tuple(kind for _, kind in schema)
        view = read_view(typed.table)
        if isinstance(typed.source, TValues):
            rows = []
            for pos, row in enumerate(typed.source.rows):
                values = tuple(compile_scalar(e)((), None) for e in row)
                values = tuple(coerce(v, k) for v, k in zip(values, kinds))
                if pos < len(spec.inserted_ids):
                    rid = spec.inserted_ids[pos]
                elif spec.overflow_base is not None:
                    rid = (spec.overflow_base
                           + (spec.index + 1) * AssignIds.OVERFLOW_STRIDE + pos)
                else:
                    raise LifecycleError(
                        f"statement {spec.index}: no recorded id for inserted row")
                rows.append((values, rid, self.xid, spec.index, None))
            const = ConstRel(schema, tuple(rows))
            inserted = tuple(rid for _, rid, _, _, _ in rows)
            return Union(view, const), inserted
        # INSERT ... SELECT: table references become read views
        def table_source(table, asof):
            if asof is not None:
                return None  # explicit time travel reads committed state
            return read_view(table)

        query = translate_select(
            typed.source, default_asof=self.begin_scn, catalog=self.catalog,
            table_source=table_source,
            ts_resolver=self.engine.log.resolve_timestamp)
        assign = AssignIds(query, spec.inserted_ids, self.xid, spec.index,
                           kinds, overflow_base=spec.overflow_base,
                           overflow_slot=spec.index + 1)
        inserted = spec.inserted_ids
        if self.derive_claims:
            rel = self._eval_ctx.evaluate(assign)
            inserted = tuple(r.rid for r in rel.rows)
        return Union(view, assign), inserted


def _rowid_in(claimed):
    from .algebra import _rowid_membership
    return _rowid_membership(frozenset(claimed))


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def stmt_specs_from_log(engine, xid: int) -> list:
    """Parse + bind + analyze every recorded statement of a transaction."""
    catalog = engine.catalog()
    specs = []
    for entry in engine.log.dml_entries(xid):
        ast = parse(entry.sql_text)
        typed = analyze(bind(ast, entry.binds), catalog)
        specs.append(StmtSpec(
            index=entry.stmt_index, typed=typed, sql_text=entry.sql_text,
            binds=dict(entry.binds), scn=entry.stmt_scn,
            inserted_ids=tuple(entry.inserted_row_ids),
            affected_ids=frozenset(entry.affected_row_ids),
            target=entry.target_table))
    return specs


def reenact_transaction(engine, xid: int, up_to=None,
                        allow_uncommitted: bool = False) -> ReenactmentPlan:
    """Build the reenactment plan for a committed transaction.

    ``up_to`` limits the plan to a statement prefix (inclusive index).
    """
    record = engine.txn_record(xid)
    if record.state is not TxnState.COMMITTED and not allow_uncommitted:
        raise LifecycleError(
            f"transaction {xid} is {record.state.value}; only committed "
            f"transactions can be reenacted")
    specs = stmt_specs_from_log(engine, xid)
    if up_to is not None:
        if not (-1 <= up_to < len(specs)):
            raise UnknownTxnError(
                f"transaction {xid} has no statement index {up_to}")
        specs = specs[:up_to + 1]
    builder = PlanBuilder(engine, xid, record.isolation, record.begin_scn, specs)
    plan = builder.build()
    plan.commit_scn = record.commit_scn
    return plan


def read_view_expr(engine, table: str, xid: int, stmt_index: int,
                   isolation: IsolationLevel | None = None) -> Expr:
    """Expression for the view of ``table`` seen by statement ``stmt_index``."""
    record = engine.txn_record(xid)
    iso = isolation or record.isolation
    specs = stmt_specs_from_log(engine, xid)
    if not (0 <= stmt_index <= len(specs)):
        raise UnknownTxnError(f"transaction {xid} has no statement {stmt_index}")
    prefix = specs[:stmt_index]
    builder = PlanBuilder(engine, xid, iso, record.begin_scn, prefix)
    plan = builder.build()
    current = plan.entries[-1][table] if plan.entries else plan.initial[table]
    claimed = plan.claims[-1][table] if plan.claims else frozenset()
    scn = specs[stmt_index].scn if stmt_index < len(specs) else record.begin_scn
    return builder._read_view_expr(table, current, set(claimed), scn)


def expr_signature(expr: Expr):
    """Structural identity of an expression (for plan-equality checks)."""
    if isinstance(expr, TableAccessAsOf):
        return ("asof", expr.table, expr.asof, expr.schema)
    if isinstance(expr, EntryMarker):
        return ("marker", expr.table, expr.plan_xid, expr_signature(expr.inner))
    if isinstance(expr, ConstRel):
        return ("const", expr.schema, expr.rows, expr.with_refs)
    if isinstance(expr, Filter):
        return ("filter", expr.pred, expr_signature(expr.input))
    if isinstance(expr, Project):
        return ("project", expr.columns, expr.touch_pred, expr.touch_xid,
                expr.touch_stmt, expr.out_kinds, expr_signature(expr.input))
    if isinstance(expr, Join):
        return ("join", expr.pred, expr_signature(expr.left),
                expr_signature(expr.right))
    if isinstance(expr, Union):
        return ("union", expr_signature(expr.left), expr_signature(expr.right))
    if isinstance(expr, Overlay):
        return ("overlay", tuple(sorted(expr.claimed)),
                expr_signature(expr.base), expr_signature(expr.overlay))
    if isinstance(expr, AssignIds):
        return ("assign", expr.ids, expr.creator_xid, expr.creator_stmt,
                expr.out_kinds, expr.overflow_base, expr.overflow_slot,
                expr_signature(expr.input))
    raise TypeError(f"no signature for {expr!r}")
