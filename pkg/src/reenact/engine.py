"""Transaction engine: interleaved sessions over the versioned store.

Statements execute atomically one at a time in submission order; concurrency
is logical interleaving. Each transaction reads a private view (snapshot at
begin for SNAPSHOT isolation, snapshot at statement start for READ
COMMITTED) overlaid with its own pending writes. Write-write conflicts
between concurrent SNAPSHOT transactions abort the later writer eagerly
(first-updater-wins).

Native statement application here is deliberately independent from the
algebra evaluator: it is the ground truth that reenactment is verified
against. Ground-truth read views are captured after every statement.
"""
from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

from .analysis import analyze, bind
from .algebra import compile_scalar
from .auditlog import AuditLog, AuditLogEntry, wall_clock_of
from .errors import (
    EngineError, LifecycleError, UnknownTxnError, ValueError_,
    WorkloadError, WriteConflictAbort,
)
from .model import IsolationLevel, StatementResult, TxnRecord, TxnState
from .parser import parse
from .sqlast import TDelete, TDerived, TInsert, TProvenance, TSelect, TTableRef, TUpdate, TValues
from .storage import Database, Schema, TupleVersion
from .values import coerce, row_sort_key
from .workload import WorkloadScript, parse_workload


@dataclass
class PendingWrite:
    kind: str  # UPDATE | INSERT | DELETE
    values: tuple | None
    stmt_index: int


@dataclass
class WorkloadIssue:
    line: int
    code: str
    message: str


@dataclass
class WorkloadSummary:
    xids: list
    issues: list
    skipped: list  # (line, reason)


def _view_key(item):
    rid, values = item[0], item[1]
    return rid


class Engine:
    """Single-process engine facade: storage + transactions + audit log."""

    def __init__(self):
        self.db = Database()
        self.log = AuditLog()
        self.txns: dict[int, TxnRecord] = {}
        self.sessions: dict[str, int | None] = {}
        self._next_xid = 1
        self._lock = threading.RLock()
        self._execute_gate = threading.Lock()

    # ------------------------------------------------------------------
    # catalog / storage passthrough
    # ------------------------------------------------------------------

    def create_table(self, name: str, columns, rows=()):
        with self._lock:
            return self.db.create_table(Schema(name, tuple(columns)), rows)

    def catalog(self):
        return self.db.catalog()

    def scan_asof(self, table: str, asof: int):
        with self._lock:
            return self.db.scan_asof(table, asof)

    def current_scn(self) -> int:
        return self.db.current_scn

    def resolve_asof(self, literal) -> int:
        """Map an AS OF literal (scn int or quoted timestamp) to an scn."""
        if isinstance(literal, int):
            return literal
        return self.log.resolve_timestamp(literal)

    def state_hash(self) -> str:
        """Content hash of storage, log, and transaction records."""
        with self._lock:
            digest = hashlib.sha256()
            digest.update(self.db.content_hash().encode())
            digest.update(self.log.export_lines().encode())
            for xid in sorted(self.txns):
                t = self.txns[xid]
                digest.update(repr((t.xid, t.session, t.isolation.value,
                                    t.begin_scn, t.commit_scn, t.end_scn,
                                    t.state.value, sorted(t.write_set))).encode())
            return digest.hexdigest()

    # ------------------------------------------------------------------
    # transaction lifecycle
    # ------------------------------------------------------------------

    def begin(self, session: str, isolation: IsolationLevel = IsolationLevel.SNAPSHOT) -> int:
        with self._lock:
            if self.sessions.get(session) is not None:
                raise LifecycleError(
                    f"session {session!r} already has an active transaction")
            xid = self._next_xid
            self._next_xid += 1
            scn = self.db.advance_scn()
            txn = TxnRecord(xid=xid, session=session, isolation=isolation,
                            begin_scn=scn)
            txn._si_base = {}  # per-table begin-snapshot cache
            self.txns[xid] = txn
            self.sessions[session] = xid
            self.log.record(AuditLogEntry(
                xid=xid, stmt_index=None, kind="BEGIN", sql_text=None, binds={},
                stmt_scn=scn, wall_clock=wall_clock_of(scn), session=session,
                isolation=isolation))
            return xid

    def _active_txn(self, xid: int) -> TxnRecord:
        txn = self.txns.get(xid)
        if txn is None:
            raise UnknownTxnError(f"unknown transaction {xid}")
        if txn.state is not TxnState.ACTIVE:
            raise LifecycleError(f"transaction {xid} is {txn.state.value}")
        return txn

    def commit(self, xid: int) -> int:
        with self._lock:
            txn = self._active_txn(xid)
            scn = self.db.advance_scn()
            for (table_name, rid), pw in sorted(txn.pending.items()):
                table = self.db.table(table_name)
                if pw.kind in ("UPDATE", "DELETE"):
                    open_version = table.open_version(rid)
                    if open_version is not None:
                        open_version.end_scn = scn
                if pw.kind in ("UPDATE", "INSERT"):
                    table.append_version(TupleVersion(
                        row_id=rid, values=pw.values, begin_scn=scn,
                        end_scn=None, creator_xid=xid, creator_stmt=pw.stmt_index))
            txn.write_set = set(txn.pending)
            txn.pending = {}
            txn.state = TxnState.COMMITTED
            txn.commit_scn = scn
            txn.end_scn = scn
            self.sessions[txn.session] = None
            self.log.record(AuditLogEntry(
                xid=xid, stmt_index=None, kind="COMMIT", sql_text=None, binds={},
                stmt_scn=scn, wall_clock=wall_clock_of(scn), session=txn.session,
                isolation=txn.isolation))
            return scn

    def abort(self, xid: int, reason: str | None = None) -> int:
        with self._lock:
            txn = self._active_txn(xid)
            return self._abort_locked(txn, reason)

    def _abort_locked(self, txn: TxnRecord, reason: str | None) -> int:
        scn = self.db.advance_scn()
        txn.pending = {}
        txn.state = TxnState.ABORTED
        txn.end_scn = scn
        txn.abort_reason = reason
        self.sessions[txn.session] = None
        self.log.record(AuditLogEntry(
            xid=txn.xid, stmt_index=None, kind="ABORT", sql_text=None, binds={},
            stmt_scn=scn, wall_clock=wall_clock_of(scn), session=txn.session,
            isolation=txn.isolation))
        return scn

    # ------------------------------------------------------------------
    # read views
    # ------------------------------------------------------------------

    def _base_snapshot(self, txn: TxnRecord, table: str, stmt_scn: int) -> dict:
        """Committed rows visible to a statement, before own writes."""
        if txn.isolation is IsolationLevel.SNAPSHOT:
            cache = txn._si_base
            if table not in cache:
                cache[table] = {
                    v.row_id: (v.values, v.creator_xid, v.creator_stmt, v.begin_scn)
                    for v in self.db.scan_asof(table, txn.begin_scn)}
            return cache[table]
        return {v.row_id: (v.values, v.creator_xid, v.creator_stmt, v.begin_scn)
                for v in self.db.scan_asof(table, stmt_scn)}

    def _txn_view(self, txn: TxnRecord, table: str, stmt_scn: int) -> dict:
        """rid -> (values, creator_xid, creator_stmt, begin_scn|None)."""
        view = dict(self._base_snapshot(txn, table, stmt_scn))
        for (t, rid), pw in txn.pending.items():
            if t != table:
                continue
            if pw.kind == "DELETE":
                view.pop(rid, None)
            else:
                view[rid] = (pw.values, txn.xid, pw.stmt_index, None)
        return view

    def _capture_views(self, txn: TxnRecord, stmt_scn: int) -> dict:
        captured = {}
        for table in self.db.tables:
            view = self._txn_view(txn, table, stmt_scn)
            captured[table] = tuple(
                (rid,) + view[rid] for rid in sorted(view))
        return captured

    # ------------------------------------------------------------------
    # statement execution
    # ------------------------------------------------------------------

    def execute(self, xid: int, sql_text: str, binds: dict | None = None) -> StatementResult:
        """Parse, bind, analyze, and apply one statement of a transaction."""
        with self._lock:
            txn = self._active_txn(xid)
            ast = parse(sql_text)
            bound = bind(ast, binds or {})
            typed = analyze(bound, self.catalog())
            scn = self.db.advance_scn()
            stmt_index = len(txn.statement_results)
            input_views = self._capture_views(txn, scn)

            # statement application is atomic: any error leaves no trace
            result = self._apply_statement(txn, typed, scn, stmt_index)

            txn.input_views.append(input_views)
            if stmt_index == 0:
                txn.initial_views = input_views

            self.log.record(AuditLogEntry(
                xid=xid, stmt_index=stmt_index, kind="DML", sql_text=sql_text,
                binds=dict(binds or {}), stmt_scn=scn,
                wall_clock=wall_clock_of(scn), session=txn.session,
                isolation=txn.isolation,
                affected_row_ids=tuple(sorted(result.affected_row_ids)),
                inserted_row_ids=tuple(result.inserted_row_ids),
                target_table=result.table))
            txn.statement_results.append(result)
            txn.recorded_views.append(self._capture_views(txn, scn))
            return result

    def _apply_statement(self, txn, typed, scn, stmt_index) -> StatementResult:
        input_scn = (txn.begin_scn if txn.isolation is IsolationLevel.SNAPSHOT
                     else scn)
        if isinstance(typed, TUpdate):
            return self._apply_update(txn, typed, scn, stmt_index, input_scn)
        if isinstance(typed, TDelete):
            return self._apply_delete(txn, typed, scn, stmt_index, input_scn)
        if isinstance(typed, TInsert):
            return self._apply_insert(txn, typed, scn, stmt_index, input_scn)
        if isinstance(typed, TSelect):
            rows = self._eval_select(txn, typed, scn)
            return StatementResult(frozenset(), (), input_scn, None,
                                   tuple(values for _, values in rows))
        if isinstance(typed, TProvenance):
            rows = self._eval_provenance_request(txn, typed, scn)
            return StatementResult(frozenset(), (), input_scn, None, tuple(rows))
        raise EngineError(f"unsupported statement {type(typed).__name__}")

    def _first_updater_check(self, txn, table: str, rid: int):
        """Abort the calling transaction if the row was concurrently written."""
        if txn.isolation is not IsolationLevel.SNAPSHOT:
            return
        if (table, rid) in txn.pending:
            return  # own earlier write
        for other in self.txns.values():
            if other.xid != txn.xid and other.state is TxnState.ACTIVE \
                    and (table, rid) in other.pending:
                self._conflict_abort(txn, other.xid, table, rid)
        base = self.db.table(table).version_at(rid, txn.begin_scn)
        if base is not None and base.end_scn is not None:
            # closed after we began: find the committing writer
            closer = None
            for other in self.txns.values():
                if other.commit_scn == base.end_scn:
                    closer = other.xid
                    break
            self._conflict_abort(txn, closer if closer is not None else -1,
                                 table, rid)

    def _conflict_abort(self, txn, other_xid: int, table: str, rid: int):
        reason = (f"write-write conflict with transaction {other_xid} "
                  f"on {table!r} row {rid}")
        self._abort_locked(txn, reason)
        raise WriteConflictAbort(txn.xid, other_xid, table, rid)

    def _apply_update(self, txn, typed: TUpdate, scn, stmt_index, input_scn):
        view = self._txn_view(txn, typed.table, scn)
        pred = compile_scalar(typed.where) if typed.where is not None else None
        matches = []
        for rid in sorted(view):
            values = view[rid][0]
            if pred is None or pred(values, rid):
                matches.append(rid)
        for rid in matches:
            self._first_updater_check(txn, typed.table, rid)
        set_fns = [(ordinal, compile_scalar(expr)) for ordinal, expr in typed.sets]
        kinds = tuple(kind for _, kind in typed.schema)
        staged = []
        for rid in matches:
            old_values = view[rid][0]
            new_values = list(old_values)
            for ordinal, fn in set_fns:
                new_values[ordinal] = coerce(fn(old_values, rid), kinds[ordinal])
            staged.append((rid, tuple(new_values)))
        for rid, new_values in staged:
            existing = txn.pending.get((typed.table, rid))
            kind = "INSERT" if existing is not None and existing.kind == "INSERT" else "UPDATE"
            txn.pending[(typed.table, rid)] = PendingWrite(kind, new_values, stmt_index)
        return StatementResult(frozenset(matches), (), input_scn, typed.table)

    def _apply_delete(self, txn, typed: TDelete, scn, stmt_index, input_scn):
        view = self._txn_view(txn, typed.table, scn)
        pred = compile_scalar(typed.where) if typed.where is not None else None
        matches = []
        for rid in sorted(view):
            values = view[rid][0]
            if pred is None or pred(values, rid):
                matches.append(rid)
        for rid in matches:
            self._first_updater_check(txn, typed.table, rid)
        for rid in matches:
            existing = txn.pending.get((typed.table, rid))
            if existing is not None and existing.kind == "INSERT":
                del txn.pending[(typed.table, rid)]
            else:
                txn.pending[(typed.table, rid)] = PendingWrite("DELETE", None, stmt_index)
        return StatementResult(frozenset(matches), (), input_scn, typed.table)

    def _apply_insert(self, txn, typed: TInsert, scn, stmt_index, input_scn):
        table = self.db.table(typed.table)
        kinds = tuple(kind for _, kind in typed.schema)
        if isinstance(typed.source, TValues):
            raw_rows = []
            for row in typed.source.rows:
                raw_rows.append(tuple(compile_scalar(e)((), None) for e in row))
        else:
            raw_rows = [values for _, values in
                        self._eval_select(txn, typed.source, scn)]
        inserted = []
        for values in raw_rows:
            values = tuple(coerce(v, k) for v, k in zip(values, kinds))
            rid = table.allocate_row_id()
            txn.pending[(typed.table, rid)] = PendingWrite("INSERT", values, stmt_index)
            inserted.append(rid)
        return StatementResult(frozenset(), tuple(inserted), input_scn, typed.table)

    # ------------------------------------------------------------------
    # native query evaluation (independent of the algebra evaluator)
    # ------------------------------------------------------------------

    def _source_rows(self, txn, item, stmt_scn) -> list:
        if isinstance(item, TTableRef):
            if item.asof is not None:
                asof = self.resolve_asof(item.asof.value)
                return [(v.row_id, v.values)
                        for v in self.db.scan_asof(item.table, asof)]
            if txn is not None:
                view = self._txn_view(txn, item.table, stmt_scn)
                return [(rid, view[rid][0]) for rid in sorted(view)]
            return [(v.row_id, v.values)
                    for v in self.db.scan_asof(item.table, stmt_scn)]
        if isinstance(item, TDerived):
            return self._eval_select(txn, item.select, stmt_scn)
        raise EngineError(f"unsupported FROM item {item!r}")

    def _eval_select(self, txn, tsel: TSelect, stmt_scn) -> list:
        """Rows as (carrier rid or None, values), in canonical order."""
        out = []
        for branch in (tsel,) + tsel.union_all:
            if not branch.from_:
                fns = [compile_scalar(e) for _, e in branch.columns]
                rows = [(None, tuple(fn((), None) for fn in fns))]
                if branch.where is not None:
                    pred = compile_scalar(branch.where)
                    rows = [r for r in rows if pred(r[1], None)]
                out.extend(rows)
                continue
            combined = [(None, ())]
            single = len(branch.from_) == 1
            for item in branch.from_:
                source = self._source_rows(txn, item, stmt_scn)
                combined = [
                    (srid if single else None, values + svalues)
                    for (_, values) in combined
                    for (srid, svalues) in source
                ]
            if branch.where is not None:
                pred = compile_scalar(branch.where)
                combined = [(rid, values) for rid, values in combined
                            if pred(values, rid)]
            fns = [compile_scalar(e) for _, e in branch.columns]
            for rid, values in combined:
                out.append((rid, tuple(fn(values, rid) for fn in fns)))
        out.sort(key=lambda r: (0, r[0], row_sort_key(r[1])) if r[0] is not None
                 else (1, 0, row_sort_key(r[1])))
        return out

    def _eval_provenance_request(self, txn, typed: TProvenance, scn) -> list:
        from . import provenance as prov_mod
        return prov_mod.evaluate_provenance_request(self, txn, typed, scn)

    # ------------------------------------------------------------------
    # workload runner
    # ------------------------------------------------------------------

    def run_workload(self, script) -> WorkloadSummary:
        if isinstance(script, str):
            script = parse_workload(script)
        assert isinstance(script, WorkloadScript)
        with self._lock:
            xids: list[int] = []
            issues: list[WorkloadIssue] = []
            skipped: list = []
            poisoned: set[str] = set()
            for cmd in script.commands:
                if cmd.session in poisoned:
                    skipped.append((cmd.line, f"session {cmd.session!r} rolled back"))
                    if cmd.kind in ("COMMIT", "ABORT"):
                        poisoned.discard(cmd.session)
                    continue
                try:
                    if cmd.kind == "CREATE":
                        self.create_table(cmd.create.table, cmd.create.columns,
                                          cmd.create.rows)
                    elif cmd.kind == "BEGIN":
                        xid = self.begin(cmd.session, cmd.isolation)
                        xids.append(xid)
                    elif cmd.kind == "COMMIT":
                        self.commit(self._session_xid(cmd.session, cmd.line))
                    elif cmd.kind == "ABORT":
                        self.abort(self._session_xid(cmd.session, cmd.line))
                    else:
                        self.execute(self._session_xid(cmd.session, cmd.line),
                                     cmd.sql, {})
                except WriteConflictAbort as exc:
                    issues.append(WorkloadIssue(cmd.line, exc.code, exc.message))
                    poisoned.add(cmd.session)
                except EngineError as exc:
                    xid = self.sessions.get(cmd.session)
                    if xid is not None:
                        self.abort(xid, f"statement error: {exc.message}")
                        poisoned.add(cmd.session)
                    issues.append(WorkloadIssue(cmd.line, exc.code, exc.message))
            return WorkloadSummary(xids, issues, skipped)

    def _session_xid(self, session: str, line: int) -> int:
        xid = self.sessions.get(session)
        if xid is None:
            raise WorkloadError(f"session {session!r} has no active transaction", line)
        return xid

    # ------------------------------------------------------------------
    # log export / import
    # ------------------------------------------------------------------

    def export_log(self, path) -> None:
        with self._lock:
            self.log.export(path)

    def import_log(self, path) -> None:
        """Replace the audit log and rebuild transaction records from it.

        Storage history is kept as-is; replay needs both.
        """
        new_log = AuditLog.import_file(path)
        with self._lock:
            self.log = new_log
            self.txns = {}
            self.sessions = {}
            for xid in new_log.known_xids():
                summary = new_log.summary(xid)
                write_set = set()
                for e in new_log.dml_entries(xid):
                    for rid in tuple(e.affected_row_ids) + tuple(e.inserted_row_ids):
                        write_set.add((e.target_table, rid))
                state = {"COMMITTED": TxnState.COMMITTED,
                         "ABORTED": TxnState.ABORTED}.get(summary.state, TxnState.ACTIVE)
                rec = TxnRecord(xid=xid, session=summary.session,
                                isolation=summary.isolation,
                                begin_scn=summary.begin_scn,
                                commit_scn=summary.commit_scn,
                                end_scn=summary.end_scn, state=state,
                                write_set=write_set)
                rec._si_base = {}
                self.txns[xid] = rec
            self._next_xid = max(self.txns, default=0) + 1

    # ------------------------------------------------------------------
    # inspection
    # ------------------------------------------------------------------

    def txn_record(self, xid: int) -> TxnRecord:
        txn = self.txns.get(xid)
        if txn is None:
            raise UnknownTxnError(f"unknown transaction {xid}")
        return txn

    def final_states(self) -> dict:
        """Committed state of every table at the current scn."""
        with self._lock:
            return {name: self.db.scan_asof(name, self.db.current_scn)
                    for name in sorted(self.db.tables)}
