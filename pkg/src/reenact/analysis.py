"""Parameter binding and semantic analysis over the surface AST."""
from __future__ import annotations

from .errors import (
    AmbiguousColumnError, TypeCheckError, UnboundParameterError,
    UnknownColumnError, UnknownTableError,
)
from .sqlast import (
    BOOL, BinOp, CaseExpr, ColRef, Delete, DerivedTable, Insert, Literal,
    Param, ProvenanceRequest, RowidRef, Select, SelectItem, TableRef,
    TBinOp, TCase, TColRef, TDelete, TDerived, TInsert, TLiteral,
    TProvenance, TRowid, TSelect, TTableRef, TUnary, TUpdate, TValues,
    Unary, Update, ValuesSource,
)
from .values import ValueKind, arith_result_kind, check_comparable, kind_of


# --------------------------------------------------------------------------
# binding
# --------------------------------------------------------------------------

def bind(node, binds: dict):
    """Replace every named parameter with a literal; idempotent."""
    if binds is None:
        binds = {}
    if isinstance(node, Param):
        if node.name not in binds:
            raise UnboundParameterError(node.name)
        return Literal(binds[node.name])
    if isinstance(node, Literal) or isinstance(node, (ColRef, RowidRef)):
        return node
    if isinstance(node, Unary):
        return Unary(node.op, bind(node.operand, binds))
    if isinstance(node, BinOp):
        return BinOp(node.op, bind(node.left, binds), bind(node.right, binds))
    if isinstance(node, CaseExpr):
        whens = tuple((bind(c, binds), bind(r, binds)) for c, r in node.whens)
        return CaseExpr(whens, bind(node.else_, binds))
    if isinstance(node, SelectItem):
        return SelectItem(bind(node.expr, binds), node.alias)
    if isinstance(node, TableRef):
        return node
    if isinstance(node, DerivedTable):
        return DerivedTable(bind(node.select, binds), node.alias)
    if isinstance(node, Select):
        items = None if node.items is None else tuple(bind(i, binds) for i in node.items)
        where = None if node.where is None else bind(node.where, binds)
        branches = tuple(bind(b, binds) for b in node.union_all)
        return Select(items, tuple(bind(f, binds) for f in node.from_), where, branches)
    if isinstance(node, ValuesSource):
        return ValuesSource(tuple(tuple(bind(v, binds) for v in row) for row in node.rows))
    if isinstance(node, Insert):
        return Insert(node.table, bind(node.source, binds))
    if isinstance(node, Update):
        sets = tuple((col, bind(e, binds)) for col, e in node.sets)
        where = None if node.where is None else bind(node.where, binds)
        return Update(node.table, sets, where)
    if isinstance(node, Delete):
        where = None if node.where is None else bind(node.where, binds)
        return Delete(node.table, where)
    if isinstance(node, ProvenanceRequest):
        query = None if node.query is None else bind(node.query, binds)
        return ProvenanceRequest(node.xid, query)
    raise TypeError(f"cannot bind {node!r}")


def collect_params(node, out=None) -> set:
    if out is None:
        out = set()
    if isinstance(node, Param):
        out.add(node.name)
    elif isinstance(node, Unary):
        collect_params(node.operand, out)
    elif isinstance(node, BinOp):
        collect_params(node.left, out)
        collect_params(node.right, out)
    elif isinstance(node, CaseExpr):
        for c, r in node.whens:
            collect_params(c, out)
            collect_params(r, out)
        collect_params(node.else_, out)
    elif isinstance(node, SelectItem):
        collect_params(node.expr, out)
    elif isinstance(node, DerivedTable):
        collect_params(node.select, out)
    elif isinstance(node, Select):
        for item in node.items or ():
            collect_params(item, out)
        for f in node.from_:
            collect_params(f, out)
        if node.where is not None:
            collect_params(node.where, out)
        for b in node.union_all:
            collect_params(b, out)
    elif isinstance(node, ValuesSource):
        for row in node.rows:
            for v in row:
                collect_params(v, out)
    elif isinstance(node, Insert):
        collect_params(node.source, out)
    elif isinstance(node, Update):
        for _, e in node.sets:
            collect_params(e, out)
        if node.where is not None:
            collect_params(node.where, out)
    elif isinstance(node, Delete):
        if node.where is not None:
            collect_params(node.where, out)
    elif isinstance(node, ProvenanceRequest):
        if node.query is not None:
            collect_params(node.query, out)
    return out


# --------------------------------------------------------------------------
# analysis
# --------------------------------------------------------------------------

class _Scope:
    """Flat slot space over the FROM items of one select."""

    def __init__(self):
        self.items = []  # (alias, schema tuple, base slot)
        self.width = 0

    def add(self, alias: str, schema: tuple):
        for existing, _, _ in self.items:
            if existing == alias:
                raise AmbiguousColumnError(f"duplicate table alias {alias!r}")
        self.items.append((alias, schema, self.width))
        self.width += len(schema)

    def resolve(self, qualifier: str | None, name: str) -> TColRef:
        matches = []
        for alias, schema, base in self.items:
            if qualifier is not None and alias != qualifier:
                continue
            for i, (col, kind) in enumerate(schema):
                if col == name:
                    matches.append(TColRef(base + i, kind, alias, name))
        if not matches:
            if qualifier is not None and not any(a == qualifier for a, _, _ in self.items):
                raise UnknownTableError(f"unknown table alias {qualifier!r}")
            target = f"{qualifier}.{name}" if qualifier else name
            raise UnknownColumnError(f"unknown column {target!r}")
        if len(matches) > 1:
            raise AmbiguousColumnError(
                f"column {name!r} is ambiguous: "
                + ", ".join(f"{m.qualifier}.{m.name}" for m in matches))
        return matches[0]


def _unify(a, b, context: str):
    """Unify two static kinds (None is the null literal's kind)."""
    if a is None:
        return b
    if b is None:
        return a
    if a == b:
        return a
    if a in (ValueKind.INT, ValueKind.DEC) and b in (ValueKind.INT, ValueKind.DEC):
        return ValueKind.DEC
    raise TypeCheckError(f"{context}: incompatible kinds {a} and {b}")


def _storable(expr_kind, column_kind: ValueKind, context: str):
    if expr_kind is None or expr_kind == column_kind:
        return
    if column_kind == ValueKind.DEC and expr_kind == ValueKind.INT:
        return
    raise TypeCheckError(f"{context}: cannot store {expr_kind} into {column_kind} column")


def analyze_expr(node, scope: _Scope | None):
    if isinstance(node, Literal):
        return TLiteral(node.value, kind_of(node.value))
    if isinstance(node, Param):
        raise UnboundParameterError(node.name)
    if isinstance(node, RowidRef):
        return TRowid()
    if isinstance(node, ColRef):
        if scope is None:
            raise UnknownColumnError(f"column {node.name!r} referenced without a FROM clause")
        return scope.resolve(node.qualifier, node.name)
    if isinstance(node, Unary):
        operand = analyze_expr(node.operand, scope)
        if node.op == "NOT":
            if operand.kind != BOOL:
                raise TypeCheckError("NOT requires a boolean operand")
            return TUnary("NOT", operand, BOOL)
        if operand.kind not in (ValueKind.INT, ValueKind.DEC, None):
            raise TypeCheckError("unary minus requires a numeric operand")
        return TUnary("-", operand, operand.kind)
    if isinstance(node, BinOp):
        left = analyze_expr(node.left, scope)
        right = analyze_expr(node.right, scope)
        if node.op in ("AND", "OR"):
            if left.kind != BOOL or right.kind != BOOL:
                raise TypeCheckError(f"{node.op} requires boolean operands")
            return TBinOp(node.op, left, right, BOOL)
        if node.op in ("=", "!=", "<", "<=", ">", ">="):
            if left.kind is not None and right.kind is not None:
                check_comparable(node.op, left.kind, right.kind)
            if BOOL in (left.kind, right.kind):
                raise TypeCheckError("cannot compare boolean expressions")
            return TBinOp(node.op, left, right, BOOL)
        if left.kind == BOOL or right.kind == BOOL:
            raise TypeCheckError(f"operator {node.op!r} requires numeric operands")
        if left.kind is None or right.kind is None:
            kind = ValueKind.DEC if node.op == "/" else (left.kind or right.kind)
        else:
            kind = arith_result_kind(node.op, left.kind, right.kind)
        return TBinOp(node.op, left, right, kind)
    if isinstance(node, CaseExpr):
        whens = []
        kind = None
        for cond, result in node.whens:
            tcond = analyze_expr(cond, scope)
            if tcond.kind != BOOL:
                raise TypeCheckError("CASE WHEN condition must be boolean")
            tresult = analyze_expr(result, scope)
            kind = _unify(kind, tresult.kind, "CASE branches")
            whens.append((tcond, tresult))
        telse = analyze_expr(node.else_, scope)
        kind = _unify(kind, telse.kind, "CASE branches")
        return TCase(tuple(whens), telse, kind)
    raise TypeError(f"cannot analyze expression {node!r}")


def _analyze_from_item(item, catalog):
    if isinstance(item, TableRef):
        if item.table not in catalog:
            raise UnknownTableError(f"unknown table {item.table!r}")
        schema = tuple(catalog[item.table].columns)
        asof = None
        if item.asof is not None:
            lit = analyze_expr(item.asof, None)
            if lit.kind not in (ValueKind.INT, ValueKind.TEXT):
                raise TypeCheckError("AS OF expects an scn integer or a quoted timestamp")
            asof = lit
        return TTableRef(item.table, item.alias or item.table, asof, schema)
    if isinstance(item, DerivedTable):
        inner = analyze_select(item.select, catalog)
        return TDerived(inner, item.alias, inner.schema)
    raise TypeError(f"cannot analyze from-item {item!r}")


def _analyze_one_select(node: Select, catalog) -> TSelect:
    scope = _Scope()
    from_items = []
    for item in node.from_:
        titem = _analyze_from_item(item, catalog)
        scope.add(titem.alias, titem.schema)
        from_items.append(titem)
    columns = []
    if node.items is None:
        if not from_items:
            raise TypeCheckError("SELECT * requires a FROM clause")
        for alias, schema, base in scope.items:
            for i, (col, kind) in enumerate(schema):
                columns.append((col, TColRef(base + i, kind, alias, col)))
    else:
        for i, item in enumerate(node.items):
            expr = analyze_expr(item.expr, scope if from_items else None)
            if expr.kind == BOOL:
                raise TypeCheckError("boolean expression cannot be projected")
            if item.alias:
                name = item.alias
            elif isinstance(item.expr, ColRef):
                name = item.expr.name
            else:
                name = f"col{i + 1}"
            columns.append((name, expr))
    where = None
    if node.where is not None:
        where = analyze_expr(node.where, scope if from_items else None)
        if where.kind != BOOL:
            raise TypeCheckError("WHERE clause must be boolean")
    schema = tuple((name, expr.kind if expr.kind is not None else ValueKind.TEXT)
                   for name, expr in columns)
    return TSelect(tuple(columns), tuple(from_items), where, schema)


def analyze_select(node: Select, catalog) -> TSelect:
    first = _analyze_one_select(Select(node.items, node.from_, node.where), catalog)
    branches = []
    schema = list(first.schema)
    for branch in node.union_all:
        tbranch = _analyze_one_select(branch, catalog)
        if len(tbranch.schema) != len(schema):
            raise TypeCheckError("UNION ALL branches have different column counts")
        for i, (name, kind) in enumerate(schema):
            merged = _unify(kind, tbranch.schema[i][1], "UNION ALL columns")
            schema[i] = (name, merged)
        branches.append(tbranch)
    if branches:
        return TSelect(first.columns, first.from_, first.where, tuple(schema),
                       tuple(branches))
    return first


def analyze(node, catalog):
    """Type-check a bound statement against the catalog.

    ``catalog`` maps table name to its ``Schema``.
    """
    if isinstance(node, Select):
        return analyze_select(node, catalog)
    if isinstance(node, Insert):
        if node.table not in catalog:
            raise UnknownTableError(f"unknown table {node.table!r}")
        schema = tuple(catalog[node.table].columns)
        if isinstance(node.source, ValuesSource):
            rows = []
            for row in node.source.rows:
                if len(row) != len(schema):
                    raise TypeCheckError(
                        f"INSERT row has {len(row)} values, table {node.table!r} "
                        f"has {len(schema)} columns")
                typed_row = []
                for expr, (col, kind) in zip(row, schema):
                    texpr = analyze_expr(expr, None)
                    _storable(texpr.kind, kind, f"column {col!r}")
                    typed_row.append(texpr)
                rows.append(tuple(typed_row))
            return TInsert(node.table, schema, TValues(tuple(rows)))
        source = analyze_select(node.source, catalog)
        if len(source.schema) != len(schema):
            raise TypeCheckError(
                f"INSERT query yields {len(source.schema)} columns, table "
                f"{node.table!r} has {len(schema)}")
        for (col, kind), (_, src_kind) in zip(schema, source.schema):
            _storable(src_kind, kind, f"column {col!r}")
        return TInsert(node.table, schema, source)
    if isinstance(node, Update):
        if node.table not in catalog:
            raise UnknownTableError(f"unknown table {node.table!r}")
        schema = tuple(catalog[node.table].columns)
        scope = _Scope()
        scope.add(node.table, schema)
        sets = []
        seen = set()
        for col, expr in node.sets:
            ordinal = None
            for i, (name, _) in enumerate(schema):
                if name == col:
                    ordinal = i
                    break
            if ordinal is None:
                raise UnknownColumnError(f"unknown column {col!r} in table {node.table!r}")
            if ordinal in seen:
                raise TypeCheckError(f"column {col!r} assigned twice")
            seen.add(ordinal)
            texpr = analyze_expr(expr, scope)
            _storable(texpr.kind, schema[ordinal][1], f"column {col!r}")
            sets.append((ordinal, texpr))
        where = None
        if node.where is not None:
            where = analyze_expr(node.where, scope)
            if where.kind != BOOL:
                raise TypeCheckError("WHERE clause must be boolean")
        return TUpdate(node.table, schema, tuple(sets), where)
    if isinstance(node, Delete):
        if node.table not in catalog:
            raise UnknownTableError(f"unknown table {node.table!r}")
        schema = tuple(catalog[node.table].columns)
        scope = _Scope()
        scope.add(node.table, schema)
        where = None
        if node.where is not None:
            where = analyze_expr(node.where, scope)
            if where.kind != BOOL:
                raise TypeCheckError("WHERE clause must be boolean")
        return TDelete(node.table, schema, where)
    if isinstance(node, ProvenanceRequest):
        if node.xid is not None:
            return TProvenance(node.xid, None)
        return TProvenance(None, analyze_select(node.query, catalog))
    raise TypeError(f"cannot analyze {node!r}")
