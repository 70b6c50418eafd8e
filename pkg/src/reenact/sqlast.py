"""AST node types for the SQL subset, plus the deterministic printer.

Two node families live here: the surface AST the parser produces, and the
typed AST the analyzer produces (column references resolved to slots, every
expression kind-checked). Both print back to SQL text; printing a typed tree
qualifies column references so the text re-analyzes to an equal tree.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal

from .values import ValueKind, format_value

BOOL = "BOOL"  # static type of predicates; never a column kind


# --------------------------------------------------------------------------
# surface expressions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Literal:
    value: object  # int | Decimal | str | None


@dataclass(frozen=True)
class Param:
    name: str  # includes the leading ':'


@dataclass(frozen=True)
class ColRef:
    qualifier: str | None
    name: str


@dataclass(frozen=True)
class RowidRef:
    """Pseudo-column exposing the carrier row id (used by overlay lowering)."""


@dataclass(frozen=True)
class Unary:
    op: str  # 'NOT' | '-'
    operand: object


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / = != < <= > >= AND OR
    left: object
    right: object


@dataclass(frozen=True)
class CaseExpr:
    whens: tuple  # tuple[(cond, result), ...]
    else_: object


# --------------------------------------------------------------------------
# surface statements
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SelectItem:
    expr: object
    alias: str | None


@dataclass(frozen=True)
class TableRef:
    table: str
    alias: str | None
    asof: object | None  # Literal or None


@dataclass(frozen=True)
class DerivedTable:
    select: "Select"
    alias: str


@dataclass(frozen=True)
class Select:
    items: tuple | None  # tuple[SelectItem, ...]; None means '*'
    from_: tuple  # tuple[TableRef | DerivedTable, ...]; may be empty
    where: object | None
    union_all: tuple = ()  # further Select branches


@dataclass(frozen=True)
class ValuesSource:
    rows: tuple  # tuple[tuple[expr, ...], ...]


@dataclass(frozen=True)
class Insert:
    table: str
    source: object  # ValuesSource | Select


@dataclass(frozen=True)
class Update:
    table: str
    sets: tuple  # tuple[(column name, expr), ...]
    where: object | None


@dataclass(frozen=True)
class Delete:
    table: str
    where: object | None


@dataclass(frozen=True)
class ProvenanceRequest:
    xid: int | None
    query: Select | None


# --------------------------------------------------------------------------
# typed nodes
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TLiteral:
    value: object
    kind: object  # ValueKind | None (null literal)


@dataclass(frozen=True)
class TColRef:
    slot: int
    kind: ValueKind
    qualifier: str
    name: str


@dataclass(frozen=True)
class TRowid:
    kind: ValueKind = ValueKind.INT


@dataclass(frozen=True)
class TUnary:
    op: str
    operand: object
    kind: object


@dataclass(frozen=True)
class TBinOp:
    op: str
    left: object
    right: object
    kind: object


@dataclass(frozen=True)
class TCase:
    whens: tuple
    else_: object
    kind: object


@dataclass(frozen=True)
class TTableRef:
    table: str
    alias: str
    asof: object | None  # TLiteral or None
    schema: tuple  # tuple[(name, kind), ...]


@dataclass(frozen=True)
class TDerived:
    select: "TSelect"
    alias: str
    schema: tuple


@dataclass(frozen=True)
class TSelect:
    columns: tuple  # tuple[(name, typed expr), ...]
    from_: tuple  # tuple[TTableRef | TDerived, ...]
    where: object | None
    schema: tuple  # tuple[(name, kind), ...]
    union_all: tuple = ()


@dataclass(frozen=True)
class TValues:
    rows: tuple


@dataclass(frozen=True)
class TInsert:
    table: str
    schema: tuple
    source: object  # TValues | TSelect


@dataclass(frozen=True)
class TUpdate:
    table: str
    schema: tuple
    sets: tuple  # tuple[(ordinal, typed expr), ...]
    where: object | None


@dataclass(frozen=True)
class TDelete:
    table: str
    schema: tuple
    where: object | None


@dataclass(frozen=True)
class TProvenance:
    xid: int | None
    query: TSelect | None


DML_NODES = (Insert, Update, Delete, TInsert, TUpdate, TDelete)


# --------------------------------------------------------------------------
# printer
# --------------------------------------------------------------------------

# precedence levels; children below the required level get parenthesized
_PREC = {"OR": 1, "AND": 2, "=": 4, "!=": 4, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6}


def _quote_text(s: str) -> str:
    return "'" + s.replace("'", "''") + "'"


def _print_literal(value) -> str:
    if value is None:
        return "NULL"
    if isinstance(value, str):
        return _quote_text(value)
    if isinstance(value, Decimal):
        return format_value(value)
    return str(value)


def print_expr(node, prec: int = 0) -> str:
    if isinstance(node, (Literal, TLiteral)):
        return _print_literal(node.value)
    if isinstance(node, Param):
        return node.name
    if isinstance(node, ColRef):
        return f"{node.qualifier}.{node.name}" if node.qualifier else node.name
    if isinstance(node, TColRef):
        return f"{node.qualifier}.{node.name}" if node.qualifier else node.name
    if isinstance(node, (RowidRef, TRowid)):
        return "ROWID"
    if isinstance(node, (Unary, TUnary)):
        if node.op == "NOT":
            inner = print_expr(node.operand, 3)
            text = f"NOT {inner}"
            return f"({text})" if prec > 3 else text
        inner = print_expr(node.operand, 7)
        text = f"-{inner}"
        return f"({text})" if prec > 7 else text
    if isinstance(node, (BinOp, TBinOp)):
        level = _PREC[node.op]
        left = print_expr(node.left, level)
        # left-associative: right child needs one level more
        right = print_expr(node.right, level + 1)
        text = f"{left} {node.op} {right}"
        return f"({text})" if prec > level else text
    if isinstance(node, (CaseExpr, TCase)):
        parts = ["CASE"]
        for cond, result in node.whens:
            parts.append(f"WHEN {print_expr(cond)} THEN {print_expr(result)}")
        parts.append(f"ELSE {print_expr(node.else_)} END")
        return " ".join(parts)
    raise TypeError(f"cannot print expression {node!r}")


def _print_from_item(item) -> str:
    if isinstance(item, (TableRef, TTableRef)):
        text = item.table
        if item.asof is not None:
            text += f" AS OF {print_expr(item.asof)}"
        if item.alias and item.alias != item.table:
            text += f" {item.alias}"
        return text
    if isinstance(item, (DerivedTable, TDerived)):
        return f"({print_statement(item.select)}) {item.alias}"
    raise TypeError(f"cannot print from-item {item!r}")


def _print_one_select(node) -> str:
    parts = ["SELECT"]
    if isinstance(node, Select):
        if node.items is None:
            parts.append("*")
        else:
            cols = []
            for item in node.items:
                text = print_expr(item.expr)
                if item.alias:
                    text += f" AS {item.alias}"
                cols.append(text)
            parts.append(", ".join(cols))
    else:
        cols = []
        for name, expr in node.columns:
            text = print_expr(expr)
            # omit the alias when it restates a bare column reference
            if not (isinstance(expr, (ColRef, TColRef)) and expr.name == name):
                text += f" AS {name}"
            cols.append(text)
        parts.append(", ".join(cols))
    if node.from_:
        parts.append("FROM " + ", ".join(_print_from_item(f) for f in node.from_))
    if node.where is not None:
        parts.append("WHERE " + print_expr(node.where))
    return " ".join(parts)


def print_statement(node) -> str:
    """Deterministic SQL text for any surface or typed statement."""
    if isinstance(node, (Select, TSelect)):
        texts = [_print_one_select(node)]
        for branch in node.union_all:
            texts.append(_print_one_select(branch))
        return " UNION ALL ".join(texts)
    if isinstance(node, Insert):
        if isinstance(node.source, ValuesSource):
            rows = ", ".join(
                "(" + ", ".join(print_expr(v) for v in row) + ")"
                for row in node.source.rows)
            return f"INSERT INTO {node.table} VALUES {rows}"
        return f"INSERT INTO {node.table} ({print_statement(node.source)})"
    if isinstance(node, TInsert):
        if isinstance(node.source, TValues):
            rows = ", ".join(
                "(" + ", ".join(print_expr(v) for v in row) + ")"
                for row in node.source.rows)
            return f"INSERT INTO {node.table} VALUES {rows}"
        return f"INSERT INTO {node.table} ({print_statement(node.source)})"
    if isinstance(node, (Update, TUpdate)):
        if isinstance(node, Update):
            sets = ", ".join(f"{col} = {print_expr(e)}" for col, e in node.sets)
        else:
            sets = ", ".join(
                f"{node.schema[ordinal][0]} = {print_expr(e)}" for ordinal, e in node.sets)
        text = f"UPDATE {node.table} SET {sets}"
        if node.where is not None:
            text += f" WHERE {print_expr(node.where)}"
        return text
    if isinstance(node, (Delete, TDelete)):
        text = f"DELETE FROM {node.table}"
        if node.where is not None:
            text += f" WHERE {print_expr(node.where)}"
        return text
    if isinstance(node, (ProvenanceRequest, TProvenance)):
        if node.xid is not None:
            return f"PROVENANCE OF TRANSACTION {node.xid}"
        return f"PROVENANCE OF ({print_statement(node.query)})"
    raise TypeError(f"cannot print statement {node!r}")
