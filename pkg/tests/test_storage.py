"""Versioned storage: creation, time travel, clock, interval invariants."""
from decimal import Decimal

import pytest

from reenact.errors import CatalogError, FutureScnError, UnknownTableError
from reenact.model import TxnState
from reenact.storage import Database, Schema
from reenact.values import ValueKind


def _values(versions):
    return [v.values for v in versions]


def make_db():
    db = Database()
    db.create_table(
        Schema("account", (("cust", ValueKind.TEXT), ("typ", ValueKind.TEXT),
                           ("bal", ValueKind.DEC))),
        [["Alice", "Checking", Decimal("50.00")],
         ["Alice", "Savings", Decimal("30.00")]])
    db.create_table(Schema("overdraft", (("cust", ValueKind.TEXT),
                                         ("bal", ValueKind.DEC))))
    return db


class TestCreateTable:
    def test_initial_rows_become_open_versions(self):
        db = make_db()
        versions = db.scan_asof("account", db.current_scn)
        assert _values(versions) == [
            ("Alice", "Checking", Decimal("50.00")),
            ("Alice", "Savings", Decimal("30.00"))]
        for v in versions:
            assert v.end_scn is None
            assert v.creator_stmt is None
            assert v.creator_xid == 0

    def test_empty_table(self):
        db = make_db()
        assert db.scan_asof("overdraft", db.current_scn) == []

    def test_duplicate_name_rejected(self):
        db = make_db()
        with pytest.raises(CatalogError):
            db.create_table(Schema("account", (("x", ValueKind.INT),)))

    def test_row_arity_mismatch(self):
        db = Database()
        with pytest.raises(CatalogError):
            db.create_table(Schema("t", (("a", ValueKind.INT),)), [[1, 2]])

    def test_int_literals_coerce_into_dec_columns(self):
        db = Database()
        db.create_table(Schema("t", (("a", ValueKind.DEC),)), [[5]])
        (v,) = db.scan_asof("t", db.current_scn)
        assert v.values == (Decimal("5.00"),)


class TestScanAsof:
    def test_snapshot_before_first_commit(self, banking):
        engine, t1, t2 = banking
        commit1 = engine.txn_record(t1).commit_scn
        assert _values(engine.scan_asof("account", commit1 - 1)) == [
            ("Alice", "Checking", Decimal("50.00")),
            ("Alice", "Savings", Decimal("30.00"))]

    def test_snapshot_after_second_commit(self, banking):
        engine, t1, t2 = banking
        commit2 = engine.txn_record(t2).commit_scn
        assert _values(engine.scan_asof("account", commit2)) == [
            ("Alice", "Checking", Decimal("-20.00")),
            ("Alice", "Savings", Decimal("-10.00"))]

    def test_overdraft_empty_at_every_scn(self, banking):
        engine, _, _ = banking
        for scn in range(engine.current_scn() + 1):
            assert engine.scan_asof("overdraft", scn) == []

    def test_unknown_table(self):
        db = make_db()
        with pytest.raises(UnknownTableError):
            db.scan_asof("nope", 0)

    def test_future_scn(self):
        db = make_db()
        with pytest.raises(FutureScnError):
            db.scan_asof("account", db.current_scn + 1)


class TestClock:
    def test_first_scn_is_one(self):
        db = Database()
        assert db.advance_scn() == 1

    def test_strictly_increasing(self):
        db = Database()
        values = [db.advance_scn() for _ in range(10)]
        assert values == sorted(values)
        assert len(set(values)) == 10

    def test_all_log_scns_unique_and_ordered(self, banking):
        engine, _, _ = banking
        scns = [e.stmt_scn for e in engine.log.entries]
        assert len(set(scns)) == len(scns)
        assert scns == sorted(scns)


class TestInvariants:
    def test_at_most_one_visible_version_per_row(self, banking):
        engine, _, _ = banking
        for name, table in engine.db.tables.items():
            for scn in range(engine.current_scn() + 1):
                for rid, chain in table.chains.items():
                    visible = [v for v in chain if v.visible_at(scn)]
                    assert len(visible) <= 1

    def test_intervals_disjoint_and_gap_free(self, banking):
        engine, _, _ = banking
        for table in engine.db.tables.values():
            for chain in table.chains.values():
                ordered = sorted(chain, key=lambda v: v.begin_scn)
                for a, b in zip(ordered, ordered[1:]):
                    assert a.end_scn == b.begin_scn

    def test_time_travel_stability_between_commits(self, banking):
        engine, t1, t2 = banking
        commit1 = engine.txn_record(t1).commit_scn
        commit2 = engine.txn_record(t2).commit_scn
        # no commit touches account in (commit1, commit2)
        reference = _values(engine.scan_asof("account", commit1))
        for scn in range(commit1, commit2):
            assert _values(engine.scan_asof("account", scn)) == reference

    def test_aborted_transactions_leave_no_versions(self, promotion_banking):
        engine, t1, t2, conflict = promotion_banking
        assert engine.txn_record(t2).state is TxnState.ABORTED
        for table in engine.db.tables.values():
            for chain in table.chains.values():
                for version in chain:
                    assert version.creator_xid != t2
        for scn in range(engine.current_scn() + 1):
            for name in engine.db.tables:
                for v in engine.scan_asof(name, scn):
                    assert v.creator_xid != t2

    def test_content_hash_stable_and_sensitive(self):
        db1, db2 = make_db(), make_db()
        assert db1.content_hash() == db2.content_hash()
        db2.advance_scn()
        assert db1.content_hash() != db2.content_hash()
