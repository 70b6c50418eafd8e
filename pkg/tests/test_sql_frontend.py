"""Parser, binder, analyzer, printer, and the workload script format."""
from decimal import Decimal

import pytest

from reenact.analysis import analyze, bind, collect_params
from reenact.errors import (
    AmbiguousColumnError, SqlSyntaxError, TypeCheckError,
    UnboundParameterError, UnknownColumnError, UnknownTableError,
    WorkloadError,
)
from reenact.fixtures import FIG_WORKLOAD, OVERDRAFT_SQL, T1_BINDS, WITHDRAW_SQL
from reenact.model import IsolationLevel
from reenact.parser import parse
from reenact.sqlast import (
    BinOp, CaseExpr, ColRef, Insert, Literal, Param, ProvenanceRequest,
    Select, Update, ValuesSource, print_statement,
)
from reenact.storage import Schema
from reenact.values import ValueKind
from reenact.workload import parse_workload

CATALOG = {
    "account": Schema("account", (("cust", ValueKind.TEXT),
                                  ("typ", ValueKind.TEXT),
                                  ("bal", ValueKind.DEC))),
    "overdraft": Schema("overdraft", (("cust", ValueKind.TEXT),
                                      ("bal", ValueKind.DEC))),
}


def conjuncts(expr):
    if isinstance(expr, BinOp) and expr.op == "AND":
        return conjuncts(expr.left) + conjuncts(expr.right)
    return [expr]


class TestParse:
    def test_withdraw_update(self):
        ast = parse(WITHDRAW_SQL)
        assert isinstance(ast, Update)
        assert ast.table == "account"
        assert len(ast.sets) == 1
        col, expr = ast.sets[0]
        assert col == "bal"
        assert isinstance(expr, BinOp) and expr.op == "-"
        assert expr.right == Param(":amount")
        assert len(conjuncts(ast.where)) == 2

    def test_overdraft_insert(self):
        ast = parse(OVERDRAFT_SQL)
        assert isinstance(ast, Insert)
        assert ast.table == "overdraft"
        assert isinstance(ast.source, Select)
        aliases = [f.alias for f in ast.source.from_]
        assert aliases == ["a1", "a2"]
        assert len(conjuncts(ast.source.where)) == 4

    def test_syntax_error_position(self):
        with pytest.raises(SqlSyntaxError) as err:
            parse("SELECT FROM account")
        assert err.value.line == 1
        assert err.value.column == 8

    def test_case_expression(self):
        ast = parse("SELECT CASE WHEN bal < 0 THEN 1 ELSE 0 END AS neg FROM account")
        expr = ast.items[0].expr
        assert isinstance(expr, CaseExpr)

    def test_as_of_scn_and_timestamp(self):
        ast = parse("SELECT * FROM account AS OF 5 a1")
        assert ast.from_[0].asof == Literal(5)
        assert ast.from_[0].alias == "a1"
        ast = parse("SELECT * FROM account AS OF '2016-03-01'")
        assert ast.from_[0].asof == Literal("2016-03-01")

    def test_union_all_and_constant_select(self):
        ast = parse("SELECT 1 AS a UNION ALL SELECT 2 AS a")
        assert len(ast.union_all) == 1
        assert ast.from_ == ()

    def test_insert_values_multi_row(self):
        ast = parse("INSERT INTO overdraft VALUES ('X', 1.00), ('Y', -2.50)")
        assert isinstance(ast.source, ValuesSource)
        assert len(ast.source.rows) == 2
        assert ast.source.rows[1][1] == Literal(Decimal("-2.50"))

    def test_provenance_requests(self):
        ast = parse("PROVENANCE OF TRANSACTION 7")
        assert ast == ProvenanceRequest(7, None)
        ast = parse("PROVENANCE OF (SELECT * FROM account)")
        assert ast.query is not None

    def test_derived_table(self):
        ast = parse("SELECT d.bal FROM (SELECT bal FROM account) d WHERE d.bal > 0")
        assert ast.from_[0].alias == "d"

    def test_string_quote_escape(self):
        ast = parse("SELECT * FROM account WHERE cust = 'O''Brien'")
        lit = ast.where.right
        assert lit == Literal("O'Brien")


class TestBind:
    def test_withdraw_binds(self):
        bound = bind(parse(WITHDRAW_SQL), T1_BINDS)
        col, expr = bound.sets[0]
        assert expr.right == Literal(70)
        left, right = conjuncts(bound.where)
        assert left.right == Literal("Alice")
        assert right.right == Literal("Checking")
        assert collect_params(bound) == set()

    def test_bind_idempotent(self):
        once = bind(parse(WITHDRAW_SQL), T1_BINDS)
        twice = bind(once, T1_BINDS)
        assert once == twice

    def test_no_params_identity(self):
        ast = parse("SELECT * FROM account")
        assert bind(ast, {}) == ast

    def test_missing_parameter_named(self):
        with pytest.raises(UnboundParameterError) as err:
            bind(parse(OVERDRAFT_SQL), {})
        assert ":name" in str(err.value)


class TestAnalyze:
    def test_update_resolves_columns(self):
        typed = analyze(bind(parse(WITHDRAW_SQL), T1_BINDS), CATALOG)
        assert typed.table == "account"
        (ordinal, expr), = typed.sets
        assert ordinal == 2
        assert expr.kind == ValueKind.DEC

    def test_unqualified_ambiguous_in_self_join(self):
        sql = "SELECT bal FROM account a1, account a2 WHERE a1.cust = a2.cust"
        with pytest.raises(AmbiguousColumnError) as err:
            analyze(parse(sql), CATALOG)
        assert "a1.bal" in str(err.value) and "a2.bal" in str(err.value)

    def test_text_compared_to_int_rejected(self):
        with pytest.raises(TypeCheckError):
            analyze(parse("SELECT * FROM account WHERE 'Alice' < 5"), CATALOG)

    def test_unknown_table_and_column(self):
        with pytest.raises(UnknownTableError):
            analyze(parse("SELECT * FROM missing"), CATALOG)
        with pytest.raises(UnknownColumnError):
            analyze(parse("SELECT missing FROM account"), CATALOG)

    def test_insert_arity_and_kind_checks(self):
        with pytest.raises(TypeCheckError):
            analyze(parse("INSERT INTO overdraft VALUES ('X')"), CATALOG)
        with pytest.raises(TypeCheckError):
            analyze(parse("INSERT INTO overdraft VALUES (1, 2.00)"), CATALOG)

    def test_side_effect_free_on_catalog(self):
        before = {name: schema.columns for name, schema in CATALOG.items()}
        analyze(bind(parse(OVERDRAFT_SQL), {":name": "Alice"}), CATALOG)
        assert {name: schema.columns for name, schema in CATALOG.items()} == before


ROUND_TRIP_STATEMENTS = [
    "SELECT cust, typ, bal FROM account WHERE bal < 0 AND cust != 'Bob'",
    "SELECT a1.cust AS who, a1.bal + a2.bal AS total FROM account a1, account a2 "
    "WHERE a1.cust = a2.cust AND a1.typ != a2.typ",
    "SELECT * FROM account AS OF 3",
    "SELECT CASE WHEN bal < 0 THEN 0.00 ELSE bal END AS capped FROM account",
    "SELECT d.bal FROM (SELECT bal FROM account WHERE typ = 'Checking') d",
    "SELECT 1 AS a, 'x' AS b UNION ALL SELECT 2, 'y'",
    "UPDATE account SET bal = bal - 70 WHERE cust = 'Alice' AND typ = 'Checking'",
    "UPDATE account SET bal = 0.00, typ = 'Closed'",
    "DELETE FROM overdraft WHERE bal >= 0",
    "INSERT INTO overdraft VALUES ('X', -1.00), ('Y', 2.00)",
    "INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal FROM account a1, "
    "account a2 WHERE a1.cust = a2.cust AND a1.typ != a2.typ AND a1.bal + a2.bal < 0)",
    "SELECT -bal AS flipped FROM account WHERE NOT (bal > 0 OR cust = 'Z')",
    "PROVENANCE OF TRANSACTION 3",
    "PROVENANCE OF (SELECT cust FROM account WHERE bal < 0)",
]


class TestPrinter:
    @pytest.mark.parametrize("sql", ROUND_TRIP_STATEMENTS)
    def test_analyzed_print_parse_round_trip(self, sql):
        typed = analyze(parse(sql), CATALOG)
        printed = print_statement(typed)
        again = analyze(parse(printed), CATALOG)
        assert again == typed

    def test_surface_print_parse_round_trip(self):
        for sql in ROUND_TRIP_STATEMENTS:
            ast = parse(sql)
            assert parse(print_statement(ast)) == ast

    def test_printing_is_deterministic(self):
        typed = analyze(bind(parse(OVERDRAFT_SQL), {":name": "Alice"}), CATALOG)
        assert print_statement(typed) == print_statement(typed)


class TestWorkload:
    def test_fig_script_has_eight_session_commands(self):
        script = parse_workload(FIG_WORKLOAD)
        commands = [c for c in script.commands if c.session in ("s1", "s2")]
        assert len(commands) == 8
        kinds = [c.kind for c in commands]
        assert kinds.count("BEGIN") == 2
        assert kinds.count("STATEMENT") == 4
        assert kinds.count("COMMIT") == 2

    def test_isolation_levels_parsed(self):
        script = parse_workload(
            "a: BEGIN ISOLATION LEVEL READ COMMITTED;\na: COMMIT;\n"
            "b: BEGIN;\nb: ABORT;\n")
        begins = [c for c in script.commands if c.kind == "BEGIN"]
        assert begins[0].isolation is IsolationLevel.READ_COMMITTED
        assert begins[1].isolation is IsolationLevel.SNAPSHOT

    def test_comments_only_script_is_empty(self):
        script = parse_workload("-- nothing here\n   -- still nothing\n")
        assert script.commands == ()

    def test_commit_without_begin_fails_with_line(self):
        with pytest.raises(WorkloadError) as err:
            parse_workload("s1: COMMIT;\n")
        assert err.value.line == 1

    def test_statement_before_begin(self):
        with pytest.raises(WorkloadError):
            parse_workload("s1: DELETE FROM t;\n")

    def test_double_begin(self):
        with pytest.raises(WorkloadError):
            parse_workload("s1: BEGIN;\ns1: BEGIN;\n")

    def test_open_transaction_at_eof(self):
        with pytest.raises(WorkloadError):
            parse_workload("s1: BEGIN;\ns1: DELETE FROM t;\n")

    def test_create_inside_transaction_rejected(self):
        with pytest.raises(WorkloadError):
            parse_workload("s1: BEGIN;\ns1: CREATE TABLE t (a INT);\ns1: COMMIT;\n")

    def test_create_with_initial_rows(self):
        script = parse_workload(
            "s0: CREATE TABLE t (a INT, b TEXT) VALUES (1, 'x'), (-2, 'y');\n")
        create = script.commands[0].create
        assert create.columns == (("a", ValueKind.INT), ("b", ValueKind.TEXT))
        assert create.rows == ((1, "x"), (-2, "y"))

    def test_syntax_error_carries_script_line(self):
        with pytest.raises(SqlSyntaxError) as err:
            parse_workload("s1: BEGIN;\ns1: SELEC * FROM t;\ns1: COMMIT;\n")
        assert err.value.line == 2
