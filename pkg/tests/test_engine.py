"""Transaction manager semantics: visibility, conflicts, workloads."""
from decimal import Decimal

import pytest

from reenact.engine import Engine
from reenact.errors import LifecycleError, WriteConflictAbort
from reenact.fixtures import (
    FIG_WORKLOAD, OVERDRAFT_SQL, PROMOTION_SQL, T1_BINDS, T2_BINDS,
    WITHDRAW_SQL, banking_engine, empty_banking_engine,
)
from reenact.model import IsolationLevel, TxnState
from reenact.values import ValueKind


def final_values(engine, table):
    return [v.values for v in engine.final_states()[table]]


class TestGoldenHistory:
    def test_fig_states_after_each_commit(self, banking):
        engine, t1, t2 = banking
        commit1 = engine.txn_record(t1).commit_scn
        commit2 = engine.txn_record(t2).commit_scn
        assert [v.values for v in engine.scan_asof("account", commit1)] == [
            ("Alice", "Checking", Decimal("-20.00")),
            ("Alice", "Savings", Decimal("30.00"))]
        assert [v.values for v in engine.scan_asof("account", commit2)] == [
            ("Alice", "Checking", Decimal("-20.00")),
            ("Alice", "Savings", Decimal("-10.00"))]
        assert final_values(engine, "overdraft") == []

    def test_t2_reads_stale_checking_balance(self, banking):
        engine, _, t2 = banking
        record = engine.txn_record(t2)
        # view the insert statement read (statement index 1)
        account_view = record.input_views[1]["account"]
        by_rid = {row[0]: row[1] for row in account_view}
        assert by_rid[1] == ("Alice", "Checking", Decimal("50.00"))
        assert by_rid[2] == ("Alice", "Savings", Decimal("-10.00"))

    def test_own_writes_visible_to_later_statements(self):
        engine = empty_banking_engine()
        xid = engine.begin("s1", IsolationLevel.SNAPSHOT)
        engine.execute(xid, WITHDRAW_SQL, T2_BINDS)
        result = engine.execute(
            xid, "SELECT bal FROM account WHERE typ = 'Savings'", {})
        assert result.rows == ((Decimal("-10.00"),),)
        engine.commit(xid)

    def test_write_skew_is_deterministic(self):
        runs = [banking_engine()[0].final_states() for _ in range(3)]
        signatures = [
            {name: [(v.row_id, v.values, v.begin_scn) for v in versions]
             for name, versions in states.items()}
            for states in runs]
        assert signatures[0] == signatures[1] == signatures[2]


class TestConflicts:
    def test_promotion_aborts_second_writer(self, promotion_banking):
        engine, t1, t2, conflict = promotion_banking
        assert conflict is not None
        assert conflict.xid == t2
        assert conflict.conflicting_xid == t1
        assert conflict.table == "account"
        assert engine.txn_record(t2).state is TxnState.ABORTED
        assert engine.txn_record(t1).state is TxnState.COMMITTED

    def test_committed_conflicting_writer_also_aborts(self):
        engine = empty_banking_engine()
        t1 = engine.begin("s1", IsolationLevel.SNAPSHOT)
        t2 = engine.begin("s2", IsolationLevel.SNAPSHOT)
        engine.execute(t1, WITHDRAW_SQL, T1_BINDS)
        engine.commit(t1)
        with pytest.raises(WriteConflictAbort) as err:
            engine.execute(t2, WITHDRAW_SQL, T1_BINDS)
        assert err.value.conflicting_xid == t1

    def test_read_committed_does_not_conflict(self):
        engine = empty_banking_engine()
        t1 = engine.begin("s1", IsolationLevel.SNAPSHOT)
        t2 = engine.begin("s2", IsolationLevel.READ_COMMITTED)
        engine.execute(t1, WITHDRAW_SQL, T1_BINDS)
        engine.commit(t1)
        engine.execute(t2, WITHDRAW_SQL, T1_BINDS)  # reads the committed -20
        engine.commit(t2)
        assert final_values(engine, "account")[0] == \
            ("Alice", "Checking", Decimal("-90.00"))

    def test_aborted_transaction_rejects_further_statements(self, promotion_banking):
        engine, _, t2, _ = promotion_banking
        with pytest.raises(LifecycleError):
            engine.execute(t2, WITHDRAW_SQL, T2_BINDS)
        with pytest.raises(LifecycleError):
            engine.commit(t2)


class TestLifecycle:
    def test_nested_begin_rejected(self):
        engine = empty_banking_engine()
        engine.begin("s1", IsolationLevel.SNAPSHOT)
        with pytest.raises(LifecycleError):
            engine.begin("s1", IsolationLevel.SNAPSHOT)

    def test_two_sessions_have_distinct_active_txns(self):
        engine = empty_banking_engine()
        a = engine.begin("s1", IsolationLevel.SNAPSHOT)
        b = engine.begin("s2", IsolationLevel.SNAPSHOT)
        assert a != b
        assert engine.txn_record(a).begin_scn < engine.txn_record(b).begin_scn

    def test_t2_begins_before_t1_commits(self, banking):
        engine, t1, t2 = banking
        assert engine.txn_record(t2).begin_scn < engine.txn_record(t1).commit_scn

    def test_session_can_begin_again_after_commit(self):
        engine = empty_banking_engine()
        a = engine.begin("s1", IsolationLevel.SNAPSHOT)
        engine.commit(a)
        b = engine.begin("s1", IsolationLevel.READ_COMMITTED)
        assert b == a + 1


class TestReadCommitted:
    def test_rc_insert_sees_committed_checking(self):
        engine, t1, t2 = banking_engine(IsolationLevel.READ_COMMITTED)
        # the overdraft check now sees -20 + -10 = -30 < 0: two join orders insert
        assert final_values(engine, "overdraft") == [
            ("Alice", Decimal("-30.00")), ("Alice", Decimal("-30.00"))]

    def test_non_repeatable_read(self):
        engine = empty_banking_engine()
        reader = engine.begin("r", IsolationLevel.READ_COMMITTED)
        first = engine.execute(reader, "SELECT bal FROM account WHERE typ = 'Checking'", {})
        writer = engine.begin("w", IsolationLevel.SNAPSHOT)
        engine.execute(writer, WITHDRAW_SQL, T1_BINDS)
        engine.commit(writer)
        second = engine.execute(reader, "SELECT bal FROM account WHERE typ = 'Checking'", {})
        engine.commit(reader)
        assert first.rows == ((Decimal("50.00"),),)
        assert second.rows == ((Decimal("-20.00"),),)

    def test_snapshot_repeatable_read(self):
        engine = empty_banking_engine()
        reader = engine.begin("r", IsolationLevel.SNAPSHOT)
        first = engine.execute(reader, "SELECT bal FROM account WHERE typ = 'Checking'", {})
        writer = engine.begin("w", IsolationLevel.SNAPSHOT)
        engine.execute(writer, WITHDRAW_SQL, T1_BINDS)
        engine.commit(writer)
        second = engine.execute(reader, "SELECT bal FROM account WHERE typ = 'Checking'", {})
        engine.commit(reader)
        assert first.rows == second.rows == ((Decimal("50.00"),),)


class TestWorkloads:
    def test_fig_workload_reaches_fig_final_state(self):
        engine = Engine()
        summary = engine.run_workload(FIG_WORKLOAD)
        assert not summary.issues
        assert final_values(engine, "account") == [
            ("Alice", "Checking", Decimal("-20.00")),
            ("Alice", "Savings", Decimal("-10.00"))]
        assert final_values(engine, "overdraft") == []

    def test_serial_order_reports_overdraft(self):
        serial = FIG_WORKLOAD.replace(
            "s1: INSERT", "s1-placeholder: INSERT")  # guard against edits
        assert "s1-placeholder" in serial
        script = """\
s0: CREATE TABLE account (cust TEXT, typ TEXT, bal DEC) VALUES ('Alice', 'Checking', 50.00), ('Alice', 'Savings', 30.00);
s0: CREATE TABLE overdraft (cust TEXT, bal DEC);
s1: BEGIN;
s1: UPDATE account SET bal = bal - 70 WHERE cust = 'Alice' AND typ = 'Checking';
s1: INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal FROM account a1, account a2 WHERE a1.cust = 'Alice' AND a1.cust = a2.cust AND a1.typ != a2.typ AND a1.bal + a2.bal < 0);
s1: COMMIT;
s2: BEGIN;
s2: UPDATE account SET bal = bal - 40 WHERE cust = 'Alice' AND typ = 'Savings';
s2: INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal FROM account a1, account a2 WHERE a1.cust = 'Alice' AND a1.cust = a2.cust AND a1.typ != a2.typ AND a1.bal + a2.bal < 0);
s2: COMMIT;
"""
        engine = Engine()
        summary = engine.run_workload(script)
        assert not summary.issues
        # both join orientations of the self-join produce the -30 total
        assert final_values(engine, "overdraft") == [
            ("Alice", Decimal("-30.00")), ("Alice", Decimal("-30.00"))]

    def test_empty_script(self):
        engine = Engine()
        summary = engine.run_workload("-- nothing\n")
        assert summary.xids == []
        assert engine.log.entries == []

    def test_statement_error_rolls_back_only_that_transaction(self):
        script = """\
s0: CREATE TABLE t (a INT) VALUES (1);
s1: BEGIN;
s2: BEGIN;
s1: UPDATE t SET missing = 2 WHERE a = 1;
s2: UPDATE t SET a = 5 WHERE a = 1;
s1: COMMIT;
s2: COMMIT;
"""
        engine = Engine()
        summary = engine.run_workload(script)
        (issue,) = summary.issues
        assert issue.line == 4
        assert issue.code == "column_not_found"
        assert summary.skipped  # s1's COMMIT was skipped
        t1, t2 = summary.xids
        assert engine.txn_record(t1).state is TxnState.ABORTED
        assert engine.txn_record(t2).state is TxnState.COMMITTED
        assert final_values(engine, "t") == [(5,)]

    def test_conflict_abort_inside_workload(self):
        script = """\
s0: CREATE TABLE t (a INT) VALUES (1);
s1: BEGIN;
s2: BEGIN;
s1: UPDATE t SET a = 2 WHERE a = 1;
s2: UPDATE t SET a = 3 WHERE a = 1;
s1: COMMIT;
s2: COMMIT;
"""
        engine = Engine()
        summary = engine.run_workload(script)
        assert any(i.code == "write_conflict" for i in summary.issues)
        t1, t2 = summary.xids
        assert engine.txn_record(t2).state is TxnState.ABORTED
        assert final_values(engine, "t") == [(2,)]

    def test_explicit_abort(self):
        script = """\
s0: CREATE TABLE t (a INT) VALUES (1);
s1: BEGIN;
s1: UPDATE t SET a = 9;
s1: ABORT;
"""
        engine = Engine()
        summary = engine.run_workload(script)
        assert engine.txn_record(summary.xids[0]).state is TxnState.ABORTED
        assert final_values(engine, "t") == [(1,)]


class TestStatementAtomicity:
    def test_runtime_error_leaves_no_trace(self):
        from reenact.errors import ValueError_
        engine = Engine()
        engine.create_table("t", [("a", ValueKind.INT)], [[1], [2], [0]])
        xid = engine.begin("s1", IsolationLevel.SNAPSHOT)
        with pytest.raises(ValueError_):
            engine.execute(xid, "UPDATE t SET a = 5 WHERE 1 / a >= 0", {})
        record = engine.txn_record(xid)
        assert record.pending == {}
        assert record.statement_results == []
        assert record.input_views == []
        # the transaction is still usable
        result = engine.execute(xid, "UPDATE t SET a = a + 1 WHERE a = 1", {})
        engine.commit(xid)
        assert set(result.affected_row_ids) == {1}


class TestStatementResults:
    def test_update_reports_affected_rows(self, banking):
        engine, t1, _ = banking
        result = engine.txn_record(t1).statement_results[0]
        assert set(result.affected_row_ids) == {1}
        assert result.inserted_row_ids == ()
        assert result.table == "account"

    def test_insert_select_reports_inserted_ids_in_order(self, serial_banking):
        engine, _, t2 = serial_banking
        result = engine.txn_record(t2).statement_results[1]
        assert len(result.inserted_row_ids) == 2
        assert list(result.inserted_row_ids) == sorted(result.inserted_row_ids)

    def test_delete_then_insert_uses_fresh_row_ids(self):
        engine = Engine()
        engine.create_table("t", [("a", ValueKind.INT)], [[1], [2]])
        xid = engine.begin("s1", IsolationLevel.SNAPSHOT)
        engine.execute(xid, "DELETE FROM t WHERE a = 1", {})
        result = engine.execute(xid, "INSERT INTO t VALUES (1)", {})
        engine.commit(xid)
        assert result.inserted_row_ids == (3,)  # never reuses row id 1
