"""Provenance graphs, debug views, and the affected-row filter.

Instrumented plan evaluation already tags every output row with references
to the rows that produced it (one per base-table access). This module turns
those per-statement references into version-level derivation graphs and
renders the per-statement debug view with its default relevance filter.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ProvenanceRefError, UnknownTableError, UnknownTxnError
from .model import TxnState
from .reenactor import ReenactmentPlan, reenact_transaction
from .values import format_value

# reference forms:
#   ("v", table, rid, begin_scn)        committed version in storage
#   ("t", xid, stmt, table, rid)        version created by a replayed statement
#   ("e", table, rid)                   row of an edited initial state


def ref_id(ref) -> str:
    return ":".join(str(part) for part in ref)


@dataclass
class GraphNode:
    ref: tuple
    table: str
    rid: int
    values: tuple
    creator_xid: int | None
    creator_stmt: int | None
    scn: int | None
    layer: int


@dataclass
class ProvenanceGraph:
    root: tuple
    nodes: list  # GraphNode, deterministic order
    edges: list  # (from_ref, to_ref): from is derived, to is its source

    def node_map(self) -> dict:
        return {n.ref: n for n in self.nodes}

    def to_json(self) -> dict:
        return {
            "root": ref_id(self.root),
            "nodes": [{
                "id": ref_id(n.ref),
                "table": n.table,
                "rowId": n.rid,
                "values": [format_value(v) for v in n.values],
                "creatorXid": n.creator_xid,
                "creatorStmt": n.creator_stmt,
                "scn": n.scn,
                "layer": n.layer,
            } for n in self.nodes],
            "edges": [{"from": ref_id(a), "to": ref_id(b)} for a, b in self.edges],
        }


def instrument(plan: ReenactmentPlan):
    """Instrumented view of a plan: evaluation carries provenance columns."""
    return InstrumentedPlan(plan)


@dataclass
class InstrumentedPlan:
    plan: ReenactmentPlan

    def evaluate(self, db):
        return self.plan.evaluate(db, instrumented=True)


class _GraphBuilder:
    def __init__(self, engine, evaluation):
        self.engine = engine
        self.evaluation = evaluation  # PlanEvaluation (instrumented)
        self.nodes: dict = {}
        self.edges: list = []

    def build(self, root_ref) -> ProvenanceGraph:
        self._visit(root_ref)
        self._assign_layers()
        order = sorted(self.nodes.values(), key=lambda n: (-n.layer, n.table, n.rid,
                                                           n.scn or 0))
        return ProvenanceGraph(root_ref, order, sorted(self.edges))

    # -- resolution -----------------------------------------------------------

    def _visit(self, ref):
        if ref in self.nodes:
            return
        kind = ref[0]
        if kind == "t":
            self._visit_intra(ref)
        elif kind == "v":
            self._visit_committed(ref)
        elif kind == "e":
            self._visit_edited(ref)
        else:
            raise ProvenanceRefError(f"bad reference {ref!r}")

    def _visit_intra(self, ref):
        _, xid, stmt, table, rid = ref
        if self.evaluation is None or stmt >= len(self.evaluation.entries):
            raise ProvenanceRefError(f"reference {ref_id(ref)} has no plan entry")
        rel = self.evaluation.entries[stmt].get(table)
        row = None
        if rel is not None:
            for r in rel.rows:
                if r.rid == rid and r.creator_xid == xid and r.creator_stmt == stmt:
                    row = r
                    break
        if row is None:
            raise ProvenanceRefError(
                f"reference {ref_id(ref)} does not resolve to a created version")
        self.nodes[ref] = GraphNode(ref, table, rid, row.values, xid, stmt, None, stmt)
        for parent in row.refs or ():
            if parent is None:
                continue
            self._visit(parent)
            self.edges.append((ref, parent))

    def _visit_committed(self, ref):
        _, table, rid, scn = ref
        version = self.engine.db.table(table).version_beginning(rid, scn)
        if version is None:
            raise ProvenanceRefError(f"no stored version for {ref_id(ref)}")
        self.nodes[ref] = GraphNode(ref, table, rid, version.values,
                                    version.creator_xid, version.creator_stmt,
                                    version.begin_scn, -1)
        prior = self.engine.db.table(table).prior_version(version)
        if prior is not None:
            parent = ("v", table, rid, prior.begin_scn)
            self._visit(parent)
            self.edges.append((ref, parent))

    def _visit_edited(self, ref):
        _, table, rid = ref
        rel = self.evaluation.initial.get(table) if self.evaluation else None
        row = None
        if rel is not None:
            for r in rel.rows:
                if r.rid == rid:
                    row = r
                    break
        if row is None:
            raise ProvenanceRefError(f"reference {ref_id(ref)} not in edited state")
        self.nodes[ref] = GraphNode(ref, table, rid, row.values, None, None, None, -1)

    def _assign_layers(self):
        # committed chain nodes of one row stack below the initial layer
        by_row: dict = {}
        for node in self.nodes.values():
            if node.ref[0] == "v":
                by_row.setdefault((node.table, node.rid), []).append(node)
        for chain in by_row.values():
            chain.sort(key=lambda n: -(n.scn or 0))
            for depth, node in enumerate(chain):
                node.layer = -1 - depth


def provenance_graph(engine, ref, evaluation=None, plan=None) -> ProvenanceGraph:
    """Derivation graph from one tuple version back to initial-state versions."""
    if evaluation is None:
        if plan is None:
            if ref[0] != "t":
                # a bare committed version needs no plan context
                builder = _GraphBuilder(engine, None)
                return builder.build(ref)
            plan = reenact_transaction(engine, ref[1])
        evaluation = plan.evaluate(engine.db, instrumented=True)
    return _GraphBuilder(engine, evaluation).build(ref)


# --------------------------------------------------------------------------
# debug view
# --------------------------------------------------------------------------

@dataclass
class DebugRow:
    rid: int
    values: tuple
    creator_xid: int | None
    creator_stmt: int | None
    scn: int | None
    affected: bool
    ref: tuple
    parents: tuple  # parent refs (provenance of this row at this column)
    hidden: bool = False


@dataclass
class DebugColumn:
    index: int  # -1 for the initial state
    sql_text: str | None
    binds: dict | None
    reenact_sql: str | None
    relations: dict  # table -> list[DebugRow]


@dataclass
class DebugView:
    xid: int
    isolation: str
    state: str
    tables: tuple
    show_unaffected: bool
    columns: list
    visible: dict  # table -> frozenset of row ids (before the toggle)
    schemas: dict  # table -> ((name, kind), ...)

    def column_count(self) -> int:
        return len(self.columns)

    def final_relations(self) -> dict:
        return self.columns[-1].relations if self.columns else {}


def _rows_signature(rows) -> dict:
    return {r.rid: (r.values, r.creator_xid, r.creator_stmt) for r in rows}


def debug_view(engine, xid: int, show_unaffected: bool = False,
               tables=None, plan: ReenactmentPlan | None = None,
               evaluation=None) -> DebugView:
    """Per-statement table states with creator badges and the relevance filter."""
    if plan is None:
        plan = reenact_transaction(engine, xid)
    if evaluation is None:
        evaluation = plan.evaluate(engine.db, instrumented=True)
    catalog = engine.catalog()
    if tables:
        shown_tables = tuple(tables)
    else:
        shown_tables = plan.accessed_tables or tuple(sorted(catalog))
    for t in shown_tables:
        if t not in catalog:
            raise UnknownTableError(f"unknown table {t!r}")

    # rows per column per table
    raw_columns: list[tuple[int, dict]] = [(-1, evaluation.initial)]
    for i, entry in enumerate(evaluation.entries):
        raw_columns.append((i, entry))

    def make_rows(col_index: int, table: str, rel) -> list:
        rows = []
        for r in rel.rows:
            affected = bool(r.affected and r.creator_xid == plan.xid
                            and r.creator_stmt == col_index)
            parents = tuple(p for p in (r.refs or ()) if p is not None)
            rows.append(DebugRow(
                rid=r.rid, values=r.values, creator_xid=r.creator_xid,
                creator_stmt=r.creator_stmt, scn=r.scn, affected=affected,
                ref=r.version_ref(table, plan.xid), parents=parents))
        return rows

    columns: list[DebugColumn] = []
    for col_index, rels in raw_columns:
        if col_index == -1:
            sql_text = binds = reenact_sql = None
        else:
            spec = plan.stmts[col_index]
            sql_text, binds = spec.sql_text, spec.binds
            reenact_sql = plan.statement_sql(col_index)
        columns.append(DebugColumn(
            index=col_index, sql_text=sql_text, binds=binds,
            reenact_sql=reenact_sql,
            relations={t: make_rows(col_index, t, rels[t]) for t in shown_tables}))

    visible = _visible_rows(engine, plan, evaluation, shown_tables)
    if not show_unaffected:
        for column in columns:
            for table, rows in column.relations.items():
                for row in rows:
                    row.hidden = row.rid not in visible[table]
    record = engine.txn_record(xid) if xid in engine.txns else None
    state = record.state.value if record is not None else "COMMITTED"
    return DebugView(
        xid=plan.xid, isolation=plan.isolation.value, state=state,
        tables=shown_tables, show_unaffected=show_unaffected, columns=columns,
        visible=visible,
        schemas={t: tuple(catalog[t].columns) for t in shown_tables})


def _visible_rows(engine, plan, evaluation, shown_tables) -> dict:
    """Default filter: touched rows, rows whose display varies, and every row
    in the provenance of a touched row."""
    visible = {t: set() for t in shown_tables}

    # rows the statements touched (updates, deletes, inserts)
    for spec in plan.stmts:
        if spec.target in visible:
            visible[spec.target] |= set(spec.affected_ids)
            visible[spec.target] |= set(spec.inserted_ids)

    # rows whose presence or display changes across columns
    for table in shown_tables:
        signatures = [_rows_signature(evaluation.initial[table].rows)]
        for entry in evaluation.entries:
            signatures.append(_rows_signature(entry[table].rows))
        all_rids = set()
        for sig in signatures:
            all_rids |= set(sig)
        for rid in all_rids:
            cells = [sig.get(rid) for sig in signatures]
            if any(cell != cells[0] for cell in cells[1:]):
                visible[table].add(rid)

    # provenance closure of created versions
    builder_cache: dict = {}
    for i, spec in enumerate(plan.stmts):
        if spec.target not in visible:
            continue
        rel = evaluation.entries[i].get(spec.target)
        if rel is None:
            continue
        for r in rel.rows:
            if not (r.affected and r.creator_xid == plan.xid and r.creator_stmt == i):
                continue
            ref = ("t", plan.xid, i, spec.target, r.rid)
            if ref in builder_cache:
                graph = builder_cache[ref]
            else:
                graph = _GraphBuilder(engine, evaluation).build(ref)
                builder_cache[ref] = graph
            for node in graph.nodes:
                if node.table in visible:
                    visible[node.table].add(node.rid)
    return {t: frozenset(s) for t, s in visible.items()}


def resolve_view_ref(view: DebugView, table: str, rid: int,
                     stmt_index: int | None = None) -> tuple:
    """Version reference of a row as displayed in a debug-view column."""
    if table not in view.tables:
        raise UnknownTableError(f"table {table!r} is not part of this view")
    candidates = view.columns if stmt_index is None else [
        c for c in view.columns if c.index == stmt_index]
    if not candidates:
        raise ProvenanceRefError(f"no debug column {stmt_index}")
    for column in reversed(candidates):
        for row in column.relations.get(table, ()):
            if row.rid == rid:
                return row.ref
    raise ProvenanceRefError(
        f"row {rid} of {table!r} does not appear in the requested column")


# --------------------------------------------------------------------------
# PROVENANCE OF ... statement support
# --------------------------------------------------------------------------

def evaluate_provenance_request(engine, txn, typed, scn) -> list:
    """Evaluate a provenance request into a flat relation of text rows."""
    from .algebra import EvalContext, translate_select

    if typed.xid is not None:
        record = engine.txns.get(typed.xid)
        if record is None:
            raise UnknownTxnError(f"unknown transaction {typed.xid}")
        if record.state is not TxnState.COMMITTED:
            raise UnknownTxnError(
                f"transaction {typed.xid} is {record.state.value}")
        plan = reenact_transaction(engine, typed.xid)
        evaluation = plan.evaluate(engine.db, instrumented=True)
        rows = []
        for i, entry in enumerate(evaluation.entries):
            spec = plan.stmts[i]
            if spec.target is None:
                continue
            for r in entry[spec.target].rows:
                parents = " ".join(ref_id(p) for p in (r.refs or ()) if p is not None)
                rows.append((spec.target, i, r.rid,
                             "(" + ", ".join(format_value(v) for v in r.values) + ")",
                             parents))
        return rows
    expr = translate_select(
        typed.query, default_asof=scn - 1 if scn > 0 else 0,
        catalog=engine.catalog(), ts_resolver=engine.log.resolve_timestamp)
    rel = EvalContext(engine.db, instrumented=True).evaluate(expr)
    rows = []
    for r in rel.rows:
        prov = " ".join(ref_id(p) if p is not None else "-" for p in (r.refs or ()))
        rows.append(tuple(r.values) + (prov,))
    return rows
