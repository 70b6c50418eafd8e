"""Query-able log of executed statements and transaction lifecycle events.

The log plus committed storage history is everything replay needs: DML
entries carry the verbatim SQL text, the separate bind values, the statement
scn, and the row ids the statement touched. Wall-clock instants are
synthesized deterministically from the scn (display only).

File format: JSON lines, one self-describing record per line after a header
line. Field names: xid, stmtIndex, kind, sqlText, binds, stmtScn, wallClock,
session, isolation (DML records add affectedRowIds / insertedRowIds).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from .errors import InvalidRangeError, LogFormatError, UnknownTxnError
from .model import IsolationLevel
from .values import value_from_json, value_to_json

WALL_CLOCK_BASE = datetime(2016, 3, 1, tzinfo=timezone.utc)

FILE_HEADER = {"format": "reenact-audit-log", "version": 1}

KINDS = ("DML", "BEGIN", "COMMIT", "ABORT")


def wall_clock_of(scn: int) -> str:
    return (WALL_CLOCK_BASE + timedelta(seconds=scn)).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_wall_clock(text: str) -> datetime:
    forms = ("%Y-%m-%dT%H:%M:%SZ", "%Y-%m-%d %H:%M:%S", "%Y-%m-%d")
    for form in forms:
        try:
            return datetime.strptime(text, form).replace(tzinfo=timezone.utc)
        except ValueError:
            continue
    raise LogFormatError(f"unparseable timestamp {text!r}")


@dataclass
class AuditLogEntry:
    xid: int
    stmt_index: int | None  # None for lifecycle entries
    kind: str
    sql_text: str | None
    binds: dict
    stmt_scn: int
    wall_clock: str
    session: str
    isolation: IsolationLevel
    affected_row_ids: tuple = ()
    inserted_row_ids: tuple = ()
    target_table: str | None = None

    def to_json(self) -> dict:
        doc = {
            "xid": self.xid,
            "stmtIndex": self.stmt_index,
            "kind": self.kind,
            "sqlText": self.sql_text,
            "binds": {k: value_to_json(v) for k, v in self.binds.items()},
            "stmtScn": self.stmt_scn,
            "wallClock": self.wall_clock,
            "session": self.session,
            "isolation": self.isolation.value,
        }
        if self.kind == "DML":
            doc["affectedRowIds"] = list(self.affected_row_ids)
            doc["insertedRowIds"] = list(self.inserted_row_ids)
            doc["targetTable"] = self.target_table
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "AuditLogEntry":
        try:
            kind = doc["kind"]
            if kind not in KINDS:
                raise LogFormatError(f"unknown entry kind {kind!r}")
            return cls(
                xid=int(doc["xid"]),
                stmt_index=doc["stmtIndex"],
                kind=kind,
                sql_text=doc["sqlText"],
                binds={k: value_from_json(v) for k, v in doc["binds"].items()},
                stmt_scn=int(doc["stmtScn"]),
                wall_clock=doc["wallClock"],
                session=doc["session"],
                isolation=IsolationLevel(doc["isolation"]),
                affected_row_ids=tuple(doc.get("affectedRowIds", ())),
                inserted_row_ids=tuple(doc.get("insertedRowIds", ())),
                target_table=doc.get("targetTable"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise LogFormatError(f"malformed log record: {exc}") from exc


@dataclass
class StatementInterval:
    stmt_index: int
    start_scn: int
    end_scn: int
    sql_text: str
    binds: dict
    kind: str  # update | insert | delete | select | provenance


@dataclass
class TransactionSummary:
    xid: int
    session: str
    isolation: IsolationLevel
    begin_scn: int
    commit_scn: int | None
    end_scn: int | None
    state: str  # ACTIVE | COMMITTED | ABORTED
    statements: list


def _statement_kind(sql_text: str) -> str:
    head = sql_text.lstrip().split(None, 1)
    word = head[0].upper() if head else ""
    return {"UPDATE": "update", "INSERT": "insert", "DELETE": "delete",
            "SELECT": "select", "PROVENANCE": "provenance"}.get(word, "statement")


class AuditLog:
    def __init__(self):
        self.entries: list[AuditLogEntry] = []

    # -- append (engine-internal; serialized by the engine lock) -----------

    def record(self, entry: AuditLogEntry) -> None:
        self.entries.append(entry)

    # -- queries -------------------------------------------------------------

    def max_scn(self) -> int:
        return max((e.stmt_scn for e in self.entries), default=0)

    def entries_for(self, xid: int) -> list[AuditLogEntry]:
        return [e for e in self.entries if e.xid == xid]

    def dml_entries(self, xid: int) -> list[AuditLogEntry]:
        return [e for e in self.entries if e.xid == xid and e.kind == "DML"]

    def known_xids(self) -> list[int]:
        seen = []
        for e in self.entries:
            if e.xid not in seen:
                seen.append(e.xid)
        return seen

    def summary(self, xid: int) -> TransactionSummary:
        entries = self.entries_for(xid)
        if not entries:
            raise UnknownTxnError(f"unknown transaction {xid}")
        begin_scn = entries[0].stmt_scn
        session = entries[0].session
        isolation = entries[0].isolation
        commit_scn = None
        end_scn = None
        state = "ACTIVE"
        for e in entries:
            if e.kind == "COMMIT":
                commit_scn = e.stmt_scn
                end_scn = e.stmt_scn
                state = "COMMITTED"
            elif e.kind == "ABORT":
                end_scn = e.stmt_scn
                state = "ABORTED"
        dml = [e for e in entries if e.kind == "DML"]
        horizon = end_scn if end_scn is not None else self.max_scn()
        statements = []
        for i, e in enumerate(dml):
            stop = dml[i + 1].stmt_scn if i + 1 < len(dml) else horizon
            statements.append(StatementInterval(
                e.stmt_index, e.stmt_scn, stop, e.sql_text, e.binds,
                _statement_kind(e.sql_text)))
        return TransactionSummary(xid, session, isolation, begin_scn,
                                  commit_scn, end_scn, state, statements)

    def list_transactions(self, scn_range=None) -> list[TransactionSummary]:
        """Transactions whose active interval overlaps the range, by begin scn."""
        if scn_range is not None:
            low, high = scn_range
            if low is not None and high is not None and low > high:
                raise InvalidRangeError(f"inverted range [{low}, {high}]")
        summaries = [self.summary(xid) for xid in self.known_xids()]
        summaries.sort(key=lambda s: s.begin_scn)
        if scn_range is None:
            return summaries
        low, high = scn_range
        out = []
        for s in summaries:
            end = s.end_scn if s.end_scn is not None else self.max_scn()
            if high is not None and s.begin_scn > high:
                continue
            if low is not None and end < low:
                continue
            out.append(s)
        return out

    def resolve_timestamp(self, text: str) -> int:
        """Largest recorded scn whose wall clock is at or before the instant."""
        target = parse_wall_clock(text)
        best = 0
        for e in self.entries:
            if parse_wall_clock(e.wall_clock) <= target:
                best = max(best, e.stmt_scn)
        return best

    # -- validation & file round trip ------------------------------------------

    def validate(self) -> None:
        seen_scns = set()
        per_txn: dict[int, list[AuditLogEntry]] = {}
        for e in self.entries:
            if e.stmt_scn in seen_scns:
                raise LogFormatError(f"duplicate scn {e.stmt_scn} in log")
            seen_scns.add(e.stmt_scn)
            per_txn.setdefault(e.xid, []).append(e)
        for xid, entries in per_txn.items():
            indices = [e.stmt_index for e in entries if e.kind == "DML"]
            if indices != list(range(len(indices))):
                raise LogFormatError(f"transaction {xid}: statement indices not contiguous")
            scns = [e.stmt_scn for e in entries]
            if scns != sorted(scns):
                raise LogFormatError(f"transaction {xid}: scns not increasing")

    def export_lines(self) -> str:
        lines = [json.dumps(FILE_HEADER)]
        for e in self.entries:
            lines.append(json.dumps(e.to_json()))
        return "\n".join(lines) + "\n"

    def export(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.export_lines())

    @classmethod
    def import_lines(cls, text: str) -> "AuditLog":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines:
            raise LogFormatError("empty log file")
        try:
            header = json.loads(lines[0])
        except json.JSONDecodeError as exc:
            raise LogFormatError(f"bad header line: {exc}") from exc
        if header != FILE_HEADER:
            raise LogFormatError(f"unrecognized log header {header!r}")
        log = cls()
        for i, line in enumerate(lines[1:], start=2):
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LogFormatError(f"line {i}: {exc}") from exc
            log.record(AuditLogEntry.from_json(doc))
        log.validate()
        return log

    @classmethod
    def import_file(cls, path) -> "AuditLog":
        with open(path, encoding="utf-8") as fh:
            return cls.import_lines(fh.read())
