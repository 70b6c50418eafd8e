"""Shared transaction-level types."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class IsolationLevel(enum.Enum):
    SNAPSHOT = "SNAPSHOT"
    READ_COMMITTED = "READ_COMMITTED"


class TxnState(enum.Enum):
    ACTIVE = "ACTIVE"
    COMMITTED = "COMMITTED"
    ABORTED = "ABORTED"


@dataclass
class StatementResult:
    """Row ids touched by one executed statement, plus the snapshot it read."""

    affected_row_ids: frozenset = frozenset()
    inserted_row_ids: tuple = ()
    recorded_input_scn: int = 0
    table: str | None = None
    rows: tuple = ()  # result rows for SELECT-like statements


@dataclass
class TxnRecord:
    xid: int
    session: str
    isolation: IsolationLevel
    begin_scn: int
    commit_scn: int | None = None
    end_scn: int | None = None  # commit or abort scn once terminal
    state: TxnState = TxnState.ACTIVE
    # pending (uncommitted) net effect per (table, row id); see engine module
    pending: dict = field(default_factory=dict)
    # committed write set: set of (table, row id)
    write_set: set = field(default_factory=set)
    statement_results: list = field(default_factory=list)
    # ground-truth read views captured during execution, for verification:
    # initial_views[table] and recorded_views[i][table] are tuples of
    # (row_id, values, creator_xid, creator_stmt, begin_scn|None);
    # input_views[i] is the view each statement read, pre-application
    initial_views: dict = field(default_factory=dict)
    recorded_views: list = field(default_factory=list)
    input_views: list = field(default_factory=list)
    abort_reason: str | None = None

    def is_concurrent_with(self, other: "TxnRecord") -> bool:
        """Lifetimes overlap (neither ended before the other began)."""
        self_end = self.end_scn if self.end_scn is not None else float("inf")
        other_end = other.end_scn if other.end_scn is not None else float("inf")
        return self.begin_scn < other_end and other.begin_scn < self_end
