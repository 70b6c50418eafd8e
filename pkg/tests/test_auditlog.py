"""Audit log queries and the JSON-lines file round trip."""
from decimal import Decimal

import pytest

from reenact.auditlog import AuditLog, wall_clock_of
from reenact.engine import Engine
from reenact.errors import InvalidRangeError, LogFormatError, UnknownTxnError
from reenact.fixtures import T1_BINDS, T2_BINDS
from reenact.model import IsolationLevel


class TestEntries:
    def test_every_statement_has_one_dml_entry(self, banking):
        engine, t1, t2 = banking
        assert len(engine.log.dml_entries(t1)) == 2
        assert len(engine.log.dml_entries(t2)) == 2
        kinds = [e.kind for e in engine.log.entries_for(t1)]
        assert kinds == ["BEGIN", "DML", "DML", "COMMIT"]

    def test_lifecycle_entries_for_aborted_txn(self, promotion_banking):
        engine, _, t2, _ = promotion_banking
        kinds = [e.kind for e in engine.log.entries_for(t2)]
        assert kinds == ["BEGIN", "ABORT"]

    def test_statement_indices_contiguous(self, banking):
        engine, t1, _ = banking
        indices = [e.stmt_index for e in engine.log.dml_entries(t1)]
        assert indices == [0, 1]

    def test_wall_clock_is_deterministic(self, banking):
        engine, _, _ = banking
        for e in engine.log.entries:
            assert e.wall_clock == wall_clock_of(e.stmt_scn)
        assert wall_clock_of(5) == "2016-03-01T00:00:05Z"


class TestSummaries:
    def test_fig_history_summaries(self, banking):
        engine, t1, t2 = banking
        summaries = engine.log.list_transactions()
        assert [s.xid for s in summaries] == [t1, t2]
        for s in summaries:
            assert len(s.statements) == 2
            assert s.state == "COMMITTED"
            # intervals are contiguous: each ends where the next starts
            assert s.statements[0].end_scn == s.statements[1].start_scn
            assert s.statements[1].end_scn == s.commit_scn

    def test_range_after_everything_is_empty(self, banking):
        engine, _, t2 = banking
        high = engine.txn_record(t2).commit_scn
        assert engine.log.list_transactions((high + 1, high + 10)) == []

    def test_commit_to_commit_range_overlaps_both(self, banking):
        engine, t1, t2 = banking
        lo = engine.txn_record(t1).commit_scn
        hi = engine.txn_record(t2).commit_scn
        xids = [s.xid for s in engine.log.list_transactions((lo, hi))]
        assert xids == [t1, t2]

    def test_inverted_range_rejected(self, banking):
        engine, _, _ = banking
        with pytest.raises(InvalidRangeError):
            engine.log.list_transactions((9, 3))

    def test_aborted_transaction_flagged(self, promotion_banking):
        engine, _, t2, _ = promotion_banking
        summary = engine.log.summary(t2)
        assert summary.state == "ABORTED"
        assert summary.commit_scn is None

    def test_get_transaction_detail(self, banking):
        engine, t1, t2 = banking
        s1 = engine.log.summary(t1)
        assert s1.isolation is IsolationLevel.SNAPSHOT
        assert s1.statements[0].binds == T1_BINDS
        s2 = engine.log.summary(t2)
        assert s2.statements[0].binds == T2_BINDS

    def test_unknown_xid(self, banking):
        engine, _, _ = banking
        with pytest.raises(UnknownTxnError):
            engine.log.summary(999)


class TestFileRoundTrip:
    def test_export_import_identity(self, banking, tmp_path):
        engine, _, _ = banking
        path = tmp_path / "history.log"
        engine.export_log(path)
        imported = AuditLog.import_file(path)
        assert len(imported.entries) == len(engine.log.entries)
        for a, b in zip(imported.entries, engine.log.entries):
            assert a == b
        assert [s.xid for s in imported.list_transactions()] == \
            [s.xid for s in engine.log.list_transactions()]

    def test_truncated_file_rejected_and_log_unchanged(self, banking, tmp_path):
        engine, _, _ = banking
        path = tmp_path / "history.log"
        engine.export_log(path)
        text = path.read_text()
        (tmp_path / "bad.log").write_text(text[:len(text) // 2])
        fresh = Engine()
        before = len(fresh.log.entries)
        with pytest.raises(LogFormatError):
            fresh.import_log(tmp_path / "bad.log")
        assert len(fresh.log.entries) == before

    def test_empty_log_exports_header_only(self, tmp_path):
        log = AuditLog()
        path = tmp_path / "empty.log"
        log.export(path)
        lines = path.read_text().strip().splitlines()
        assert len(lines) == 1
        assert AuditLog.import_file(path).entries == []

    def test_binds_preserve_value_kinds(self, tmp_path):
        engine = Engine()
        from reenact.values import ValueKind
        engine.create_table("t", [("a", ValueKind.DEC), ("b", ValueKind.TEXT)])
        xid = engine.begin("s1", IsolationLevel.SNAPSHOT)
        engine.execute(xid, "INSERT INTO t VALUES (:x, :y)",
                       {":x": Decimal("1.50"), ":y": "1.50"})
        engine.commit(xid)
        path = tmp_path / "kinds.log"
        engine.export_log(path)
        imported = AuditLog.import_file(path)
        binds = imported.dml_entries(xid)[0].binds
        assert binds[":x"] == Decimal("1.50")
        assert isinstance(binds[":x"], Decimal)
        assert binds[":y"] == "1.50"
        assert isinstance(binds[":y"], str)


class TestTimestampResolution:
    def test_resolves_to_largest_scn_at_or_before(self, banking):
        engine, _, _ = banking
        assert engine.log.resolve_timestamp("2016-03-01T00:00:07Z") == 7
        assert engine.log.resolve_timestamp("2016-03-01") == 0
        top = max(e.stmt_scn for e in engine.log.entries)
        assert engine.log.resolve_timestamp("2016-03-02") == top

    def test_as_of_timestamp_in_query(self, banking):
        engine, t1, _ = banking
        commit1 = engine.txn_record(t1).commit_scn
        stamp = wall_clock_of(commit1)
        xid = engine.begin("probe", IsolationLevel.SNAPSHOT)
        result = engine.execute(
            xid, f"SELECT bal FROM account AS OF '{stamp}' WHERE typ = 'Checking'", {})
        engine.commit(xid)
        assert result.rows == ((Decimal("-20.00"),),)
