"""Relational-algebra IR and its bag-semantics evaluator.

Expressions are immutable; evaluation is read-only over the versioned store
and memoized per evaluation context so that nested reenactment entries share
work. Row order is fixed (carrier row id first, then lexicographic values)
so results are byte-stable.

Provenance references carried by instrumented rows:
  ("v", table, row_id, begin_scn)   committed tuple version in storage
  ("t", xid, stmt_index, row_id)    version created by a reenacted statement
  ("e", table, row_id)              row of a what-if-edited initial state
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from .errors import TypeCheckError, ValueError_
from .sqlast import BOOL, TBinOp, TCase, TColRef, TLiteral, TRowid, TUnary
from .storage import Database
from .values import ValueKind, coerce, quantize, row_sort_key


class Row:
    __slots__ = ("values", "rid", "creator_xid", "creator_stmt", "scn",
                 "affected", "refs")

    def __init__(self, values, rid=None, creator_xid=None, creator_stmt=None,
                 scn=None, affected=False, refs=None):
        self.values = values
        self.rid = rid
        self.creator_xid = creator_xid
        self.creator_stmt = creator_stmt
        self.scn = scn
        self.affected = affected
        self.refs = refs

    def version_ref(self, table: str, plan_xid: int):
        """Identity of the tuple version this row displays."""
        if self.creator_xid == plan_xid and self.creator_stmt is not None:
            return ("t", plan_xid, self.creator_stmt, table, self.rid)
        if self.scn is not None:
            return ("v", table, self.rid, self.scn)
        return ("e", table, self.rid)

    def __repr__(self):
        return f"Row(rid={self.rid}, values={self.values!r})"


@dataclass
class Relation:
    schema: tuple  # ((name, kind), ...)
    rows: list
    prov_slots: int = 0

    def value_rows(self) -> list:
        return [r.values for r in self.rows]


def row_order_key(row: Row):
    if row.rid is not None:
        return (0, row.rid, row_sort_key(row.values))
    return (1, 0, row_sort_key(row.values))


def sort_rows(rows: list) -> list:
    rows.sort(key=row_order_key)
    return rows


# --------------------------------------------------------------------------
# expression nodes
# --------------------------------------------------------------------------

class Expr:
    """Base class; subclasses define .schema and are immutable after init."""

    schema: tuple

    def n_slots(self) -> int:
        raise NotImplementedError


class TableAccessAsOf(Expr):
    def __init__(self, table: str, asof: int, schema: tuple):
        self.table = table
        self.asof = asof
        self.schema = schema

    def n_slots(self):
        return 1


class EntryMarker(Expr):
    """Lineage boundary around a reenactment entry or read view.

    Instrumented evaluation treats the wrapped relation as a leaf: each row
    contributes itself (its version identity) as the provenance reference.
    """

    def __init__(self, table: str, plan_xid: int, inner: Expr):
        self.table = table
        self.plan_xid = plan_xid
        self.inner = inner
        self.schema = inner.schema

    def n_slots(self):
        return 1


class ConstRel(Expr):
    """Constant relation. Rows are (values, rid, creator_xid, creator_stmt, ref).

    ``with_refs`` makes the node count as a base-table access whose rows carry
    the given references (used for what-if-edited initial states).
    """

    def __init__(self, schema: tuple, rows: tuple, with_refs: bool = False):
        self.schema = schema
        self.rows = rows
        self.with_refs = with_refs

    def n_slots(self):
        return 1 if self.with_refs else 0


class Filter(Expr):
    def __init__(self, pred, input_: Expr):
        self.pred = pred
        self.input = input_
        self.schema = input_.schema

    def n_slots(self):
        return self.input.n_slots()


class Project(Expr):
    """Named projection; optionally marks rows matching ``touch_pred`` as
    created by (touch_xid, touch_stmt) — the shape of an update rewrite.

    ``identity_when_untouched`` asserts that rows failing the touch predicate
    project to themselves (true for update rewrites), letting evaluation
    reuse the input row objects.
    """

    def __init__(self, columns: tuple, input_: Expr, touch_pred=None,
                 touch_xid=None, touch_stmt=None, out_kinds: tuple | None = None,
                 identity_when_untouched: bool = False):
        self.columns = columns  # ((name, typed expr), ...)
        self.input = input_
        self.touch_pred = touch_pred
        self.touch_xid = touch_xid
        self.touch_stmt = touch_stmt
        self.out_kinds = out_kinds
        self.identity_when_untouched = identity_when_untouched and touch_pred is not None
        if out_kinds is not None:
            self.schema = tuple((name, kind) for (name, _), kind
                                in zip(columns, out_kinds))
        else:
            self.schema = tuple(
                (name, expr.kind if expr.kind is not None else ValueKind.TEXT)
                for name, expr in columns)

    def n_slots(self):
        return self.input.n_slots()


class Join(Expr):
    def __init__(self, left: Expr, right: Expr, pred=None):
        self.left = left
        self.right = right
        self.pred = pred
        self.schema = left.schema + right.schema

    def n_slots(self):
        return self.left.n_slots() + self.right.n_slots()


class Union(Expr):
    def __init__(self, left: Expr, right: Expr):
        if len(left.schema) != len(right.schema):
            raise TypeCheckError("UNION inputs have different column counts")
        schema = []
        for (name, lk), (_, rk) in zip(left.schema, right.schema):
            if lk == rk:
                schema.append((name, lk))
            elif {lk, rk} <= {ValueKind.INT, ValueKind.DEC}:
                schema.append((name, ValueKind.DEC))
            else:
                raise TypeCheckError(f"UNION column {name!r}: {lk} vs {rk}")
        self.left = left
        self.right = right
        self.schema = tuple(schema)

    def n_slots(self):
        return self.left.n_slots() + self.right.n_slots()


class Overlay(Expr):
    """A transaction's running writes layered over a base snapshot.

    ``claimed`` is the set of row ids the transaction has written (including
    deleted ones): those are taken from the overlay side only — a claimed id
    missing from the overlay is a deletion.
    """

    def __init__(self, base: Expr, overlay: Expr, claimed: frozenset):
        if len(base.schema) != len(overlay.schema):
            raise TypeCheckError("overlay schema mismatch")
        self.base = base
        self.overlay = overlay
        self.claimed = frozenset(claimed)
        self.schema = base.schema

    def n_slots(self):
        return self.base.n_slots() + self.overlay.n_slots()


class AssignIds(Expr):
    """Stamp insert-derived rows with carrier row ids, positionally.

    ``ids`` are the ids the original execution assigned. If evaluation yields
    more rows than recorded (what-if edits), overflow ids are derived
    deterministically from ``overflow_base`` + ``overflow_stride``.
    """

    OVERFLOW_STRIDE = 1_000_000

    def __init__(self, input_: Expr, ids: tuple, creator_xid: int,
                 creator_stmt: int, out_kinds: tuple,
                 overflow_base: int | None = None, overflow_slot: int = 0):
        self.input = input_
        self.ids = ids
        self.creator_xid = creator_xid
        self.creator_stmt = creator_stmt
        self.out_kinds = out_kinds
        self.overflow_base = overflow_base
        self.overflow_slot = overflow_slot
        self.schema = tuple((name, kind) for (name, _), kind
                            in zip(input_.schema, out_kinds))

    def n_slots(self):
        return self.input.n_slots()


# --------------------------------------------------------------------------
# scalar compilation
# --------------------------------------------------------------------------

def _num_guard(l, r, op):
    if isinstance(l, str) or isinstance(r, str):
        raise ValueError_(f"operator {op!r} requires numeric operands")


def _cmp_guard(l, r):
    if isinstance(l, str) != isinstance(r, str):
        raise ValueError_("cannot compare text with a numeric value")


def compile_scalar(expr):
    """Compile a typed scalar expression to fn(values, rid) -> value."""
    if isinstance(expr, TLiteral):
        v = expr.value
        return lambda vals, rid: v
    if isinstance(expr, TColRef):
        i = expr.slot
        return lambda vals, rid: vals[i]
    if isinstance(expr, TRowid):
        return lambda vals, rid: rid
    if isinstance(expr, TUnary):
        f = compile_scalar(expr.operand)
        if expr.op == "NOT":
            return lambda vals, rid: not f(vals, rid)
        return lambda vals, rid: None if f(vals, rid) is None else -f(vals, rid)
    if isinstance(expr, TBinOp):
        lf = compile_scalar(expr.left)
        rf = compile_scalar(expr.right)
        op = expr.op
        if op == "AND":
            return lambda vals, rid: lf(vals, rid) and rf(vals, rid)
        if op == "OR":
            return lambda vals, rid: lf(vals, rid) or rf(vals, rid)
        if op == "=":
            def eq(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return l is None and r is None
                _cmp_guard(l, r)
                return l == r
            return eq
        if op == "!=":
            def ne(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return not (l is None and r is None)
                _cmp_guard(l, r)
                return l != r
            return ne
        if op in ("<", "<=", ">", ">="):
            import operator
            fn = {"<": operator.lt, "<=": operator.le,
                  ">": operator.gt, ">=": operator.ge}[op]
            def ordered(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return False
                _cmp_guard(l, r)
                return fn(l, r)
            return ordered
        if op == "+":
            def add(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return None
                _num_guard(l, r, "+")
                return l + r
            return add
        if op == "-":
            def sub(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return None
                _num_guard(l, r, "-")
                return l - r
            return sub
        if op == "*":
            def mul(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return None
                _num_guard(l, r, "*")
                out = l * r
                return quantize(out) if isinstance(out, Decimal) else out
            return mul
        if op == "/":
            def div(vals, rid):
                l, r = lf(vals, rid), rf(vals, rid)
                if l is None or r is None:
                    return None
                _num_guard(l, r, "/")
                if r == 0:
                    raise ValueError_("division by zero")
                return quantize(Decimal(l) / Decimal(r))
            return div
        raise ValueError_(f"unknown operator {op!r}")
    if isinstance(expr, TCase):
        compiled = [(compile_scalar(c), compile_scalar(r)) for c, r in expr.whens]
        else_f = compile_scalar(expr.else_)
        def case(vals, rid):
            for cf, rf in compiled:
                if cf(vals, rid):
                    return rf(vals, rid)
            return else_f(vals, rid)
        return case
    raise TypeError(f"cannot compile scalar {expr!r}")


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

class EvalContext:
    """Memoizes node results for one pass over a frozen database state."""

    def __init__(self, db: Database, instrumented: bool = False):
        self.db = db
        self.instrumented = instrumented
        self._memo: dict = {}

    def evaluate(self, expr: Expr) -> Relation:
        key = id(expr)
        hit = self._memo.get(key)
        if hit is not None and hit[0] is expr:
            return hit[1]
        rel = self._eval(expr)
        self._memo[key] = (expr, rel)
        return rel

    # -- node dispatch ------------------------------------------------------

    def _eval(self, expr: Expr) -> Relation:
        if isinstance(expr, TableAccessAsOf):
            return self._eval_table(expr)
        if isinstance(expr, EntryMarker):
            return self._eval_marker(expr)
        if isinstance(expr, ConstRel):
            return self._eval_const(expr)
        if isinstance(expr, Filter):
            return self._eval_filter(expr)
        if isinstance(expr, Project):
            return self._eval_project(expr)
        if isinstance(expr, Join):
            return self._eval_join(expr)
        if isinstance(expr, Union):
            return self._eval_union(expr)
        if isinstance(expr, Overlay):
            return self._eval_overlay(expr)
        if isinstance(expr, AssignIds):
            return self._eval_assign(expr)
        raise TypeError(f"cannot evaluate {expr!r}")

    def _eval_table(self, expr: TableAccessAsOf) -> Relation:
        instr = self.instrumented
        rows = []
        for v in self.db.scan_asof(expr.table, expr.asof):
            refs = (("v", expr.table, v.row_id, v.begin_scn),) if instr else None
            rows.append(Row(v.values, v.row_id, v.creator_xid, v.creator_stmt,
                            v.begin_scn, False, refs))
        return Relation(expr.schema, rows, 1 if instr else 0)

    def _eval_marker(self, expr: EntryMarker) -> Relation:
        inner = self.evaluate(expr.inner)
        if not self.instrumented:
            return Relation(expr.schema, inner.rows, 0)
        rows = []
        for r in inner.rows:
            ref = r.version_ref(expr.table, expr.plan_xid)
            rows.append(Row(r.values, r.rid, r.creator_xid, r.creator_stmt,
                            r.scn, False, (ref,)))
        return Relation(expr.schema, rows, 1)

    def _eval_const(self, expr: ConstRel) -> Relation:
        instr = self.instrumented
        slots = expr.n_slots() if instr else 0
        rows = []
        for values, rid, cxid, cstmt, ref in expr.rows:
            refs = None
            if instr:
                refs = (ref,) if expr.with_refs else ()
            rows.append(Row(values, rid, cxid, cstmt, None, False, refs))
        return Relation(expr.schema, sort_rows(rows), slots)

    def _eval_filter(self, expr: Filter) -> Relation:
        inner = self.evaluate(expr.input)
        pred = compile_scalar(expr.pred)
        rows = [r for r in inner.rows if pred(r.values, r.rid)]
        return Relation(expr.schema, rows, inner.prov_slots)

    def _eval_project(self, expr: Project) -> Relation:
        inner = self.evaluate(expr.input)
        fns = [compile_scalar(e) for _, e in expr.columns]
        kinds = self.schema_kinds(expr)
        touch = compile_scalar(expr.touch_pred) if expr.touch_pred is not None else None
        coerce_needed = expr.out_kinds is not None
        reuse_untouched = expr.identity_when_untouched
        rows = []
        keyed = True
        for r in inner.rows:
            if touch is not None and touch(r.values, r.rid):
                values = tuple(fn(r.values, r.rid) for fn in fns)
                if coerce_needed:
                    values = tuple(coerce(v, k) for v, k in zip(values, kinds))
                rows.append(Row(values, r.rid, expr.touch_xid, expr.touch_stmt,
                                None, True, r.refs))
            elif reuse_untouched and not r.affected:
                rows.append(r)
            else:
                values = tuple(fn(r.values, r.rid) for fn in fns)
                if coerce_needed:
                    values = tuple(coerce(v, k) for v, k in zip(values, kinds))
                rows.append(Row(values, r.rid, r.creator_xid, r.creator_stmt,
                                r.scn, False, r.refs))
            if r.rid is None:
                keyed = False
        if not keyed:
            sort_rows(rows)
        return Relation(expr.schema, rows, inner.prov_slots)

    @staticmethod
    def schema_kinds(expr: Expr) -> tuple:
        return tuple(kind for _, kind in expr.schema)

    def _eval_join(self, expr: Join) -> Relation:
        left = self.evaluate(expr.left)
        right = self.evaluate(expr.right)
        pred = compile_scalar(expr.pred) if expr.pred is not None else None
        instr = self.instrumented
        rows = []
        for lr in left.rows:
            for rr in right.rows:
                values = lr.values + rr.values
                if pred is not None and not pred(values, None):
                    continue
                refs = (lr.refs + rr.refs) if instr else None
                rows.append(Row(values, None, None, None, None, False, refs))
        return Relation(expr.schema, sort_rows(rows),
                        left.prov_slots + right.prov_slots)

    def _union_side(self, rel: Relation, kinds: tuple, pad_left: int,
                    pad_right: int) -> list:
        instr = self.instrumented
        needs_coerce = tuple(k for _, k in rel.schema) != kinds
        out = []
        for r in rel.rows:
            values = r.values
            if needs_coerce:
                values = tuple(coerce(v, k) for v, k in zip(values, kinds))
            refs = None
            if instr:
                refs = (None,) * pad_left + r.refs + (None,) * pad_right
            out.append(Row(values, r.rid, r.creator_xid, r.creator_stmt,
                           r.scn, r.affected, refs))
        return out

    def _eval_union(self, expr: Union) -> Relation:
        left = self.evaluate(expr.left)
        right = self.evaluate(expr.right)
        kinds = self.schema_kinds(expr)
        rows = self._union_side(left, kinds, 0, right.prov_slots)
        rows += self._union_side(right, kinds, left.prov_slots, 0)
        return Relation(expr.schema, sort_rows(rows),
                        left.prov_slots + right.prov_slots)

    def _eval_overlay(self, expr: Overlay) -> Relation:
        base = self.evaluate(expr.base)
        over = self.evaluate(expr.overlay)
        claimed = expr.claimed
        instr = self.instrumented
        rows = []
        for r in base.rows:
            if r.rid in claimed:
                continue
            refs = (r.refs + (None,) * over.prov_slots) if instr else None
            rows.append(Row(r.values, r.rid, r.creator_xid, r.creator_stmt,
                            r.scn, r.affected, refs))
        for r in over.rows:
            if r.rid not in claimed:
                continue
            refs = ((None,) * base.prov_slots + r.refs) if instr else None
            rows.append(Row(r.values, r.rid, r.creator_xid, r.creator_stmt,
                            r.scn, r.affected, refs))
        return Relation(expr.schema, sort_rows(rows),
                        base.prov_slots + over.prov_slots)

    def _eval_assign(self, expr: AssignIds) -> Relation:
        inner = self.evaluate(expr.input)
        kinds = self.schema_kinds(expr)
        rows = []
        overflow = 0
        for i, r in enumerate(inner.rows):
            if i < len(expr.ids):
                rid = expr.ids[i]
            else:
                if expr.overflow_base is None:
                    raise ValueError_(
                        f"insert produced {len(inner.rows)} rows, "
                        f"{len(expr.ids)} recorded ids available")
                rid = (expr.overflow_base
                       + expr.overflow_slot * AssignIds.OVERFLOW_STRIDE + overflow)
                overflow += 1
            values = tuple(coerce(v, k) for v, k in zip(r.values, kinds))
            rows.append(Row(values, rid, expr.creator_xid, expr.creator_stmt,
                            None, True, r.refs))
        return Relation(expr.schema, sort_rows(rows), inner.prov_slots)


def evaluate(expr: Expr, db: Database, instrumented: bool = False) -> Relation:
    return EvalContext(db, instrumented).evaluate(expr)


# --------------------------------------------------------------------------
# overlay lowering (for SQL generation)
# --------------------------------------------------------------------------

def _rowid_membership(claimed: frozenset):
    """Typed predicate `ROWID = k1 OR ROWID = k2 OR ...` (false when empty)."""
    pred = None
    for rid in sorted(claimed):
        term = TBinOp("=", TRowid(), TLiteral(rid, ValueKind.INT), BOOL)
        pred = term if pred is None else TBinOp("OR", pred, term, BOOL)
    if pred is None:
        return TBinOp("=", TLiteral(1, ValueKind.INT), TLiteral(0, ValueKind.INT), BOOL)
    return pred


def lower_overlay(expr: Expr) -> Expr:
    """Rewrite every Overlay into Union(anti-filtered base, claimed overlay)."""
    if isinstance(expr, Overlay):
        base = lower_overlay(expr.base)
        over = lower_overlay(expr.overlay)
        member = _rowid_membership(expr.claimed)
        keep_base = Filter(TUnary("NOT", member, BOOL), base)
        keep_over = Filter(member, over)
        return Union(keep_base, keep_over)
    if isinstance(expr, (TableAccessAsOf, ConstRel)):
        return expr
    if isinstance(expr, EntryMarker):
        inner = lower_overlay(expr.inner)
        return expr if inner is expr.inner else EntryMarker(expr.table, expr.plan_xid, inner)
    if isinstance(expr, Filter):
        inner = lower_overlay(expr.input)
        return expr if inner is expr.input else Filter(expr.pred, inner)
    if isinstance(expr, Project):
        inner = lower_overlay(expr.input)
        if inner is expr.input:
            return expr
        return Project(expr.columns, inner, expr.touch_pred, expr.touch_xid,
                       expr.touch_stmt, expr.out_kinds)
    if isinstance(expr, Join):
        left, right = lower_overlay(expr.left), lower_overlay(expr.right)
        if left is expr.left and right is expr.right:
            return expr
        return Join(left, right, expr.pred)
    if isinstance(expr, Union):
        left, right = lower_overlay(expr.left), lower_overlay(expr.right)
        if left is expr.left and right is expr.right:
            return expr
        return Union(left, right)
    if isinstance(expr, AssignIds):
        inner = lower_overlay(expr.input)
        if inner is expr.input:
            return expr
        return AssignIds(inner, expr.ids, expr.creator_xid, expr.creator_stmt,
                         expr.out_kinds, expr.overflow_base, expr.overflow_slot)
    raise TypeError(f"cannot lower {expr!r}")


# --------------------------------------------------------------------------
# query translation
# --------------------------------------------------------------------------

def translate_select(tsel, *, default_asof: int, catalog,
                     table_source=None, ts_resolver=None) -> Expr:
    """Translate an analyzed SELECT into an algebra expression.

    ``table_source(table, asof_scn_or_None)`` supplies the expression for a
    table reference; the default is a committed-snapshot access. ``ts_resolver``
    maps quoted AS OF timestamps to scns.
    """
    from .sqlast import TDerived, TSelect, TTableRef  # local to avoid cycle noise

    def source_for(item) -> Expr:
        if isinstance(item, TTableRef):
            asof = None
            if item.asof is not None:
                if item.asof.kind == ValueKind.INT:
                    asof = item.asof.value
                else:
                    if ts_resolver is None:
                        raise ValueError_(
                            "AS OF timestamp requires an audit log to resolve")
                    asof = ts_resolver(item.asof.value)
            if table_source is not None:
                expr = table_source(item.table, asof)
                if expr is not None:
                    return expr
            schema = tuple(catalog[item.table].columns)
            return TableAccessAsOf(item.table, asof if asof is not None else default_asof,
                                   schema)
        if isinstance(item, TDerived):
            return translate_select(item.select, default_asof=default_asof,
                                    catalog=catalog, table_source=table_source,
                                    ts_resolver=ts_resolver)
        raise TypeError(f"unsupported FROM item {item!r}")

    def one(sel: TSelect) -> Expr:
        if not sel.from_:
            # constant select: a single synthetic row, optionally filtered
            row = tuple(compile_scalar(e)((), None) for _, e in sel.columns)
            schema = sel.schema
            rel = ConstRel(schema, ((row, None, None, None, None),))
            if sel.where is not None:
                return Filter(sel.where, rel)
            return rel
        current: Expr | None = None
        for item in sel.from_:
            src = source_for(item)
            current = src if current is None else Join(current, src)
        if sel.where is not None:
            current = Filter(sel.where, current)
        return Project(sel.columns, current)

    exprs = [one(tsel)]
    for branch in tsel.union_all:
        exprs.append(one(branch))
    out = exprs[0]
    for nxt in exprs[1:]:
        out = Union(out, nxt)
    return out


# --------------------------------------------------------------------------
# comparison helpers
# --------------------------------------------------------------------------

def data_signature(rel: Relation) -> list:
    """Multiset signature of the data columns (order-insensitive)."""
    return sorted(row_sort_key(r.values) for r in rel.rows)


def same_data(a: Relation, b: Relation) -> bool:
    return data_signature(a) == data_signature(b)


def state_signature(rel: Relation) -> list:
    """Ordered (rid, values, creator) triples — the table-state identity."""
    return [(r.rid, r.values, r.creator_xid, r.creator_stmt) for r in rel.rows]
