"""SQL text generation from algebra expressions.

Builds a surface AST and reuses the deterministic printer, so generated text
always re-parses. Overlays are lowered to union/anti-filter form first; the
carrier row id surfaces as the ROWID pseudo-column where needed.
"""
from __future__ import annotations

from .algebra import (
    AssignIds, ConstRel, EntryMarker, Expr, Filter, Join, Overlay, Project,
    TableAccessAsOf, Union, lower_overlay,
)
from .sqlast import (
    BinOp, CaseExpr, ColRef, DerivedTable, Literal, RowidRef, Select,
    SelectItem, TableRef, TBinOp, TCase, TColRef, TLiteral, TRowid, TUnary,
    Unary, print_statement,
)


class _Aliases:
    def __init__(self):
        self.n = 0

    def fresh(self) -> str:
        self.n += 1
        return f"d{self.n}"


def _scalar_to_surface(expr, slot_map):
    if isinstance(expr, TLiteral):
        return Literal(expr.value)
    if isinstance(expr, TColRef):
        qualifier, name = slot_map[expr.slot]
        return ColRef(qualifier, name)
    if isinstance(expr, TRowid):
        return RowidRef()
    if isinstance(expr, TUnary):
        return Unary(expr.op, _scalar_to_surface(expr.operand, slot_map))
    if isinstance(expr, TBinOp):
        return BinOp(expr.op, _scalar_to_surface(expr.left, slot_map),
                     _scalar_to_surface(expr.right, slot_map))
    if isinstance(expr, TCase):
        whens = tuple((_scalar_to_surface(c, slot_map), _scalar_to_surface(r, slot_map))
                      for c, r in expr.whens)
        return CaseExpr(whens, _scalar_to_surface(expr.else_, slot_map))
    raise TypeError(f"cannot convert scalar {expr!r}")


def _unique_names(names: list) -> list:
    seen = set()
    out = []
    for i, name in enumerate(names):
        if name in seen:
            name = f"c{i + 1}"
        seen.add(name)
        out.append(name)
    return out


def _flatten_sources(expr: Expr, aliases: _Aliases, force_alias: bool):
    """Decompose into (from items, slot names, where conjuncts)."""
    if isinstance(expr, TableAccessAsOf):
        alias = aliases.fresh() if force_alias else None
        item = TableRef(expr.table, alias, Literal(expr.asof))
        qualifier = alias if force_alias else None
        slots = [(qualifier, name) for name, _ in expr.schema]
        return [item], slots, []
    if isinstance(expr, (EntryMarker, AssignIds)):
        inner = expr.inner if isinstance(expr, EntryMarker) else expr.input
        return _flatten_sources(inner, aliases, force_alias)
    if isinstance(expr, Filter):
        items, slots, wheres = _flatten_sources(expr.input, aliases, force_alias)
        wheres = wheres + [_scalar_to_surface(expr.pred, slots)]
        return items, slots, wheres
    if isinstance(expr, Join):
        litems, lslots, lwheres = _flatten_sources(expr.left, aliases, True)
        ritems, rslots, rwheres = _flatten_sources(expr.right, aliases, True)
        slots = lslots + rslots
        wheres = lwheres + rwheres
        if expr.pred is not None:
            wheres.append(_scalar_to_surface(expr.pred, slots))
        return litems + ritems, slots, wheres
    # anything else becomes a derived table with unique output names
    select, names = _to_select(expr, aliases)
    alias = aliases.fresh()
    slots = [(alias, name) for name in names]
    return [DerivedTable(select, alias)], slots, []


def _conjoin(wheres: list):
    pred = None
    for w in wheres:
        pred = w if pred is None else BinOp("AND", pred, w)
    return pred


def _to_select(expr: Expr, aliases: _Aliases):
    """Surface Select plus its output column names."""
    if isinstance(expr, Union):
        left, names = _to_select(expr.left, aliases)
        right, _ = _to_select(expr.right, aliases)
        branches = (left.union_all + (Select(right.items, right.from_, right.where),)
                    + right.union_all)
        return Select(left.items, left.from_, left.where, branches), names
    if isinstance(expr, ConstRel):
        names = _unique_names([name for name, _ in expr.schema])
        if not expr.rows:
            items = tuple(SelectItem(Literal(_zero_value(kind)), name)
                          for name, (_, kind) in zip(names, expr.schema))
            never = BinOp("=", Literal(1), Literal(0))
            return Select(items, (), never), names
        selects = []
        for values, _rid, _cx, _cs, _ref in expr.rows:
            items = tuple(SelectItem(Literal(v), name)
                          for v, name in zip(values, names))
            selects.append(Select(items, (), None))
        first = selects[0]
        return Select(first.items, first.from_, first.where,
                      tuple(Select(s.items, s.from_, s.where) for s in selects[1:])), names
    if isinstance(expr, (EntryMarker, AssignIds)):
        inner = expr.inner if isinstance(expr, EntryMarker) else expr.input
        return _to_select(inner, aliases)
    if isinstance(expr, Project):
        items, slots, wheres = _flatten_sources(expr.input, aliases, False)
        names = _unique_names([name for name, _ in expr.columns])
        out_items = []
        for name, (_, scalar) in zip(names, expr.columns):
            surface = _scalar_to_surface(scalar, slots)
            alias = None
            if not (isinstance(surface, ColRef) and surface.name == name):
                alias = name
            out_items.append(SelectItem(surface, alias if alias else _bare_alias(surface, name)))
        return Select(tuple(out_items), tuple(items), _conjoin(wheres)), names
    if isinstance(expr, (TableAccessAsOf, Filter, Join)):
        items, slots, wheres = _flatten_sources(expr, aliases, False)
        names = _unique_names([name for name, _ in expr.schema])
        out_items = tuple(
            SelectItem(ColRef(slots[i][0], slots[i][1]),
                       names[i] if slots[i][1] != names[i] else None)
            for i in range(len(names)))
        return Select(out_items, tuple(items), _conjoin(wheres)), names
    raise TypeError(f"cannot generate SQL for {expr!r}")


def _bare_alias(surface, name: str):
    # bare column refs with matching names need no alias
    if isinstance(surface, ColRef) and surface.name == name:
        return None
    return name


def _zero_value(kind):
    from decimal import Decimal
    from .values import ValueKind
    if kind == ValueKind.INT:
        return 0
    if kind == ValueKind.DEC:
        return Decimal("0.00")
    return ""


def sql_codegen(expr: Expr) -> str:
    """Generate SQL text for an algebra expression (overlays lowered first)."""
    lowered = lower_overlay(expr)
    select, _ = _to_select(lowered, _Aliases())
    return print_statement(select)
