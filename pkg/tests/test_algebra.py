"""Algebra evaluator, overlay semantics, and SQL generation round trips."""
import random
from decimal import Decimal

import pytest

from reenact.algebra import (
    AssignIds, ConstRel, EntryMarker, EvalContext, Filter, Join, Overlay,
    Project, TableAccessAsOf, Union, data_signature, evaluate, lower_overlay,
    same_data, translate_select,
)
from reenact.analysis import analyze
from reenact.codegen import sql_codegen
from reenact.errors import ValueError_
from reenact.parser import parse
from reenact.sqlast import BOOL, TBinOp, TCase, TColRef, TLiteral, TUnary
from reenact.values import ValueKind


@pytest.fixture
def db(banking):
    engine, _, _ = banking
    return engine.db


ACCOUNT_SCHEMA = (("cust", ValueKind.TEXT), ("typ", ValueKind.TEXT),
                  ("bal", ValueKind.DEC))


def col(slot, kind, name="c"):
    return TColRef(slot, kind, "t", name)


def lit(value, kind):
    return TLiteral(value, kind)


class TestEvaluate:
    def test_table_access_asof(self, banking):
        engine, t1, _ = banking
        expr = TableAccessAsOf("account", engine.txn_record(t1).begin_scn,
                               ACCOUNT_SCHEMA)
        rel = evaluate(expr, engine.db)
        assert [r.values for r in rel.rows] == [
            ("Alice", "Checking", Decimal("50.00")),
            ("Alice", "Savings", Decimal("30.00"))]
        assert [r.rid for r in rel.rows] == [1, 2]

    def test_reenactment_listing_reproduces_post_update_state(self, banking):
        engine, t1, _ = banking
        begin = engine.txn_record(t1).begin_scn
        sql = (f"SELECT cust, typ, CASE WHEN cust = 'Alice' AND typ = 'Checking' "
               f"THEN bal - 70 ELSE bal END AS bal FROM account AS OF {begin}")
        typed = analyze(parse(sql), engine.catalog())
        expr = translate_select(typed, default_asof=engine.current_scn(),
                                catalog=engine.catalog())
        rel = evaluate(expr, engine.db)
        assert [r.values for r in rel.rows] == [
            ("Alice", "Checking", Decimal("-20.00")),
            ("Alice", "Savings", Decimal("30.00"))]

    def test_union_with_empty_const_is_identity(self, db):
        base = TableAccessAsOf("account", db.current_scn, ACCOUNT_SCHEMA)
        padded = Union(base, ConstRel(ACCOUNT_SCHEMA, ()))
        assert same_data(evaluate(base, db), evaluate(padded, db))

    def test_select_star_translation(self, banking):
        engine, _, _ = banking
        typed = analyze(parse("SELECT * FROM account"), engine.catalog())
        expr = translate_select(typed, default_asof=engine.current_scn(),
                                catalog=engine.catalog())
        assert isinstance(expr, Project)
        assert isinstance(expr.input, TableAccessAsOf)
        assert expr.input.asof == engine.current_scn()

    def test_division_by_zero(self, db):
        base = TableAccessAsOf("account", db.current_scn, ACCOUNT_SCHEMA)
        bad = Project((("x", TBinOp("/", lit(1, ValueKind.INT),
                                    lit(0, ValueKind.INT), ValueKind.DEC)),), base)
        with pytest.raises(ValueError_):
            evaluate(bad, db)

    def test_evaluation_is_pure_and_ordered(self, db):
        rows = (((("B"), 2), None, None, None, None), ((("A"), 1), None, None, None, None))
        const = ConstRel((("name", ValueKind.TEXT), ("n", ValueKind.INT)),
                         ((("B", 2), None, None, None, None),
                          (("A", 1), None, None, None, None)))
        first = evaluate(const, db)
        second = evaluate(const, db)
        assert [r.values for r in first.rows] == [("A", 1), ("B", 2)]
        assert [r.values for r in first.rows] == [r.values for r in second.rows]


class TestOverlay:
    def _rel(self, rows):
        # rows: (values, rid)
        return ConstRel((("name", ValueKind.TEXT), ("n", ValueKind.INT)),
                        tuple((values, rid, 9, 0, None) for values, rid in rows))

    def test_disjoint_keys_behave_like_union(self, db):
        base = self._rel(((("a", 1), 1), (("b", 2), 2)))
        over = self._rel(((("c", 3), 3),))
        overlay = Overlay(base, over, frozenset({3}))
        union = Union(base, over)
        assert data_signature(evaluate(overlay, db)) == \
            data_signature(evaluate(union, db))

    def test_fully_overlapping_keys_take_overlay_side(self, db):
        base = self._rel(((("a", 1), 1), (("b", 2), 2)))
        over = self._rel(((("A", 10), 1), (("B", 20), 2)))
        overlay = Overlay(base, over, frozenset({1, 2}))
        assert data_signature(evaluate(overlay, db)) == \
            data_signature(evaluate(over, db))

    def test_claimed_but_absent_means_deleted(self, db):
        base = self._rel(((("a", 1), 1), (("b", 2), 2)))
        over = self._rel(())
        overlay = Overlay(base, over, frozenset({2}))
        rel = evaluate(overlay, db)
        assert [r.rid for r in rel.rows] == [1]

    def test_lowering_preserves_rows_and_carriers(self, db):
        base = self._rel(((("a", 1), 1), (("b", 2), 2), (("c", 3), 3)))
        over = self._rel(((("B", 20), 2),))
        overlay = Overlay(base, over, frozenset({2, 3}))
        direct = evaluate(overlay, db)
        lowered = evaluate(lower_overlay(overlay), db)
        assert [(r.rid, r.values) for r in direct.rows] == \
            [(r.rid, r.values) for r in lowered.rows]

    def test_lowered_form_round_trips_through_sql(self, db):
        base = TableAccessAsOf("account", db.current_scn, ACCOUNT_SCHEMA)
        over = Filter(TBinOp("=", col(1, ValueKind.TEXT, "typ"),
                             lit("Savings", ValueKind.TEXT), BOOL), base)
        overlay = Overlay(base, over, frozenset({2}))
        text = sql_codegen(overlay)
        typed = analyze(parse(text), {"account": _schema_obj()})
        back = translate_select(typed, default_asof=db.current_scn,
                                catalog={"account": _schema_obj()})
        assert same_data(evaluate(overlay, db), evaluate(back, db))


def _schema_obj():
    from reenact.storage import Schema
    return Schema("account", ACCOUNT_SCHEMA)


class TestCodegen:
    def test_empty_const_rel_uses_one_equals_zero(self, db):
        text = sql_codegen(ConstRel(ACCOUNT_SCHEMA, ()))
        assert "WHERE 1 = 0" in text
        typed = analyze(parse(text), {"account": _schema_obj()})
        back = translate_select(typed, default_asof=db.current_scn,
                                catalog={"account": _schema_obj()})
        assert evaluate(back, db).rows == []

    def test_join_codegen_invents_aliases(self, db):
        asof = db.current_scn
        left = TableAccessAsOf("account", asof, ACCOUNT_SCHEMA)
        right = TableAccessAsOf("account", asof, ACCOUNT_SCHEMA)
        pred = TBinOp("=", col(0, ValueKind.TEXT), col(3, ValueKind.TEXT), BOOL)
        join = Join(left, right, pred)
        text = sql_codegen(join)
        typed = analyze(parse(text), {"account": _schema_obj()})
        back = translate_select(typed, default_asof=asof,
                                catalog={"account": _schema_obj()})
        assert same_data(evaluate(join, db), evaluate(back, db))


# --------------------------------------------------------------------------
# randomized round trips: evaluate(parse(codegen(e))) == evaluate(e)
# --------------------------------------------------------------------------

class _ExprGen:
    """Random well-typed expressions over the banking schema, depth <= 4."""

    def __init__(self, rng, asof):
        self.rng = rng
        self.asof = asof

    def scalar(self, schema, kind, depth):
        rng = self.rng
        candidates = [i for i, (_, k) in enumerate(schema) if k == kind]
        if depth <= 0 or rng.random() < 0.4:
            if candidates and rng.random() < 0.7:
                i = rng.choice(candidates)
                return TColRef(i, kind, "t", schema[i][0])
            if kind == ValueKind.TEXT:
                return lit(rng.choice(["Alice", "Bob", "Checking"]), kind)
            if kind == ValueKind.INT:
                return lit(rng.randint(-3, 3), kind)
            return lit(Decimal(rng.randint(-300, 300)) / 100, kind)
        if kind in (ValueKind.INT, ValueKind.DEC) and rng.random() < 0.5:
            op = rng.choice(["+", "-", "*"])
            left = self.scalar(schema, kind, depth - 1)
            right = self.scalar(schema, kind, depth - 1)
            return TBinOp(op, left, right, kind)
        return TCase(((self.pred(schema, depth - 1),
                       self.scalar(schema, kind, depth - 1)),),
                     self.scalar(schema, kind, depth - 1), kind)

    def pred(self, schema, depth):
        rng = self.rng
        if depth <= 0 or rng.random() < 0.5:
            i = rng.randrange(len(schema))
            name, kind = schema[i]
            op = rng.choice(["=", "!=", "<", "<=", ">", ">="])
            return TBinOp(op, TColRef(i, kind, "t", name),
                          self.scalar(schema, kind, 0), BOOL)
        a = self.pred(schema, depth - 1)
        b = self.pred(schema, depth - 1)
        if rng.random() < 0.2:
            return TUnary("NOT", a, BOOL)
        return TBinOp(self.rng.choice(["AND", "OR"]), a, b, BOOL)

    def expr(self, depth):
        rng = self.rng
        if depth <= 0:
            return TableAccessAsOf("account", rng.randint(2, self.asof),
                                   ACCOUNT_SCHEMA)
        roll = rng.random()
        if roll < 0.25:
            inner = self.expr(depth - 1)
            return Filter(self.pred(inner.schema, 2), inner)
        if roll < 0.50:
            inner = self.expr(depth - 1)
            columns = []
            for i, (name, kind) in enumerate(inner.schema):
                if rng.random() < 0.3:
                    columns.append((name, self.scalar(inner.schema, kind, 2)))
                else:
                    columns.append((name, TColRef(i, kind, "t", name)))
            return Project(tuple(columns), inner)
        if roll < 0.65:
            left = self.expr(depth - 1)
            right = self.expr(depth - 1)
            return Union(left, right)
        if roll < 0.80:
            base = self.expr(depth - 1)
            over = self.expr(depth - 1)
            claimed = frozenset(rng.sample([1, 2], rng.randint(0, 2)))
            return Overlay(base, over, claimed)
        # self-join projected back to the three-column shape
        left = TableAccessAsOf("account", rng.randint(2, self.asof), ACCOUNT_SCHEMA)
        right = self.expr(depth - 1)
        pred = TBinOp("=", TColRef(0, ValueKind.TEXT, "t", "cust"),
                      TColRef(3, ValueKind.TEXT, "t", "cust"), BOOL)
        join = Join(left, right, pred)
        total = TBinOp("+", TColRef(2, ValueKind.DEC, "t", "bal"),
                       TColRef(5, ValueKind.DEC, "t", "bal"), ValueKind.DEC)
        columns = (("cust", TColRef(0, ValueKind.TEXT, "t", "cust")),
                   ("typ", TColRef(4, ValueKind.TEXT, "t", "typ")),
                   ("bal", total))
        return Project(columns, join)


@pytest.mark.parametrize("seed", range(40))
def test_random_expression_codegen_round_trip(banking, seed):
    engine, _, _ = banking
    rng = random.Random(seed)
    gen = _ExprGen(rng, engine.current_scn())
    expr = gen.expr(rng.randint(1, 4))
    direct = evaluate(expr, engine.db)
    text = sql_codegen(expr)
    typed = analyze(parse(text), engine.catalog())
    back = translate_select(typed, default_asof=engine.current_scn(),
                            catalog=engine.catalog())
    round_tripped = evaluate(back, engine.db)
    assert data_signature(direct) == data_signature(round_tripped)
    # static schema kinds match the evaluated schema
    assert direct.schema == expr.schema


def test_schema_soundness_over_generator(banking):
    engine, _, _ = banking
    rng = random.Random(99)
    gen = _ExprGen(rng, engine.current_scn())
    for _ in range(40):
        expr = gen.expr(rng.randint(1, 4))
        rel = evaluate(expr, engine.db)
        assert rel.schema == expr.schema
