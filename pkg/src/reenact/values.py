"""Attribute values: integers, exact two-digit decimals, text, and null.

Currency arithmetic must be exact, so decimal columns use ``decimal.Decimal``
quantized to two fractional digits at every step. Comparisons between
different non-null kinds are errors rather than ``False``.
"""
from __future__ import annotations

import enum
from decimal import Decimal, ROUND_HALF_UP

from .errors import TypeCheckError, ValueError_

# A runtime value is one of: int, Decimal, str, None.
Value = object

CENT = Decimal("0.01")


class ValueKind(enum.Enum):
    INT = "INT"
    DEC = "DEC"
    TEXT = "TEXT"

    def __str__(self) -> str:
        return self.value


def kind_of(value) -> ValueKind | None:
    """Kind of a runtime value; None for SQL null."""
    if value is None:
        return None
    if isinstance(value, bool):
        raise TypeCheckError("boolean is not a storable value")
    if isinstance(value, int):
        return ValueKind.INT
    if isinstance(value, Decimal):
        return ValueKind.DEC
    if isinstance(value, str):
        return ValueKind.TEXT
    raise TypeCheckError(f"unsupported value type {type(value).__name__}")


def quantize(value: Decimal) -> Decimal:
    return value.quantize(CENT, rounding=ROUND_HALF_UP)


def coerce(value, kind: ValueKind):
    """Coerce a raw value to a column kind (int literals widen to DEC)."""
    if value is None:
        return None
    have = kind_of(value)
    if have == kind:
        return quantize(value) if kind == ValueKind.DEC else value
    if kind == ValueKind.DEC and have == ValueKind.INT:
        return quantize(Decimal(value))
    raise TypeCheckError(f"cannot store {have} value in {kind} column")


def is_numeric(kind: ValueKind) -> bool:
    return kind in (ValueKind.INT, ValueKind.DEC)


def arith_result_kind(op: str, left: ValueKind, right: ValueKind) -> ValueKind:
    """Static result kind of an arithmetic operator, or raise."""
    if not (is_numeric(left) and is_numeric(right)):
        raise TypeCheckError(f"operator {op!r} requires numeric operands, got {left} and {right}")
    if op == "/":
        return ValueKind.DEC
    if ValueKind.DEC in (left, right):
        return ValueKind.DEC
    return ValueKind.INT


def check_comparable(op: str, left: ValueKind, right: ValueKind) -> None:
    if is_numeric(left) and is_numeric(right):
        return
    if left == right:
        return
    raise TypeCheckError(f"cannot compare {left} with {right} using {op!r}")


def apply_arith(op: str, left, right):
    """Evaluate +,-,*,/ with null propagation and exact DEC results."""
    if left is None or right is None:
        return None
    if op == "/":
        if right == 0:
            raise ValueError_("division by zero")
        return quantize(Decimal(left) / Decimal(right))
    if op == "+":
        out = left + right
    elif op == "-":
        out = left - right
    elif op == "*":
        out = left * right
    else:
        raise ValueError_(f"unknown arithmetic operator {op!r}")
    return quantize(out) if isinstance(out, Decimal) else out


def apply_compare(op: str, left, right) -> bool:
    """Evaluate a comparison; nulls compare equal only to null.

    Ordered comparisons involving null are false. Mixed non-null,
    non-numeric kinds raise (they indicate an analyzer bug at runtime).
    """
    if op == "=":
        if left is None or right is None:
            return left is None and right is None
        _check_runtime_comparable(left, right)
        return left == right
    if op == "!=":
        if left is None or right is None:
            return not (left is None and right is None)
        _check_runtime_comparable(left, right)
        return left != right
    if left is None or right is None:
        return False
    _check_runtime_comparable(left, right)
    if op == "<":
        return left < right
    if op == "<=":
        return left <= right
    if op == ">":
        return left > right
    if op == ">=":
        return left >= right
    raise ValueError_(f"unknown comparison operator {op!r}")


def _check_runtime_comparable(left, right) -> None:
    lk, rk = kind_of(left), kind_of(right)
    if is_numeric(lk) and is_numeric(rk):
        return
    if lk != rk:
        raise ValueError_(f"cannot compare {lk} with {rk}")


def sort_key(value):
    """Total order over mixed-kind values: null < numeric < text."""
    if value is None:
        return (0, 0)
    if isinstance(value, (int, Decimal)):
        return (1, Decimal(value))
    return (2, value)


def row_sort_key(values) -> tuple:
    return tuple(sort_key(v) for v in values)


def format_value(value) -> str:
    """Canonical display form (DEC always shows two fractional digits)."""
    if value is None:
        return "NULL"
    if isinstance(value, Decimal):
        return str(quantize(value))
    return str(value)


def value_to_json(value):
    """JSON encoding; DEC is tagged to stay distinguishable from TEXT."""
    if isinstance(value, Decimal):
        return {"dec": str(quantize(value))}
    return value


def value_from_json(obj):
    if isinstance(obj, dict):
        if set(obj) != {"dec"}:
            raise ValueError_(f"bad value encoding: {obj!r}")
        return Decimal(obj["dec"])
    if obj is None or isinstance(obj, (int, str)):
        if isinstance(obj, bool):
            raise ValueError_("boolean is not a storable value")
        return obj
    raise ValueError_(f"bad value encoding: {obj!r}")


def parse_literal_text(text: str):
    """Parse a numeric literal: '50' -> int, '50.00' -> Decimal."""
    if "." in text:
        return quantize(Decimal(text))
    return int(text)
