"""Versioned in-memory tables with a global logical clock and time travel.

Each table keeps full version chains per row. Committed versions carry
half-open validity intervals ``[begin_scn, end_scn)`` stamped with the
creating transaction; scans resolve a snapshot at any past clock tick.
History is never vacuumed: it is the substrate the debugger works on.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

from .errors import CatalogError, FutureScnError, UnknownTableError
from .values import ValueKind, coerce, format_value

# end_scn value for versions that are still current
OPEN = None

# Reserved transaction id for initial table loads.
BOOTSTRAP_XID = 0


@dataclass(frozen=True)
class Schema:
    table: str
    columns: tuple[tuple[str, ValueKind], ...]

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise CatalogError(f"duplicate column name in table {self.table!r}")

    def column_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.columns)

    def kinds(self) -> tuple[ValueKind, ...]:
        return tuple(kind for _, kind in self.columns)

    def ordinal(self, name: str) -> int | None:
        for i, (col, _) in enumerate(self.columns):
            if col == name:
                return i
        return None


@dataclass
class TupleVersion:
    """One immutable version of a row.

    ``creator_stmt`` is the 0-based statement index within the creating
    transaction, or None for initial-load versions.
    """

    row_id: int
    values: tuple
    begin_scn: int
    end_scn: int | None
    creator_xid: int
    creator_stmt: int | None

    def visible_at(self, scn: int) -> bool:
        return self.begin_scn <= scn and (self.end_scn is None or scn < self.end_scn)


class Table:
    def __init__(self, schema: Schema):
        self.schema = schema
        self.chains: dict[int, list[TupleVersion]] = {}
        self.next_row_id = 1

    def allocate_row_id(self) -> int:
        rid = self.next_row_id
        self.next_row_id += 1
        return rid

    def append_version(self, version: TupleVersion) -> None:
        self.chains.setdefault(version.row_id, []).append(version)

    def open_version(self, row_id: int) -> TupleVersion | None:
        for version in reversed(self.chains.get(row_id, [])):
            if version.end_scn is None:
                return version
        return None

    def version_at(self, row_id: int, scn: int) -> TupleVersion | None:
        for version in self.chains.get(row_id, []):
            if version.visible_at(scn):
                return version
        return None

    def version_beginning(self, row_id: int, begin_scn: int) -> TupleVersion | None:
        for version in self.chains.get(row_id, []):
            if version.begin_scn == begin_scn:
                return version
        return None

    def prior_version(self, version: TupleVersion) -> TupleVersion | None:
        """Chain predecessor: the version whose interval ends where this begins."""
        for candidate in self.chains.get(version.row_id, []):
            if candidate.end_scn == version.begin_scn:
                return candidate
        return None


class Database:
    """Owns the tables and the logical clock.

    All mutation goes through the engine's single-writer lock; this class
    itself is not thread-safe.
    """

    def __init__(self):
        self.tables: dict[str, Table] = {}
        self._scn = 0

    # -- clock ------------------------------------------------------------

    @property
    def current_scn(self) -> int:
        return self._scn

    def advance_scn(self) -> int:
        self._scn += 1
        return self._scn

    # -- catalog ----------------------------------------------------------

    def create_table(self, schema: Schema, initial_rows=()) -> Table:
        if schema.table in self.tables:
            raise CatalogError(f"table {schema.table!r} already exists")
        table = Table(schema)
        scn = self.advance_scn()
        kinds = schema.kinds()
        for raw in initial_rows:
            if len(raw) != len(kinds):
                raise CatalogError(
                    f"row arity {len(raw)} does not match table {schema.table!r} "
                    f"({len(kinds)} columns)"
                )
            values = tuple(coerce(v, k) for v, k in zip(raw, kinds))
            table.append_version(TupleVersion(
                row_id=table.allocate_row_id(),
                values=values,
                begin_scn=scn,
                end_scn=OPEN,
                creator_xid=BOOTSTRAP_XID,
                creator_stmt=None,
            ))
        self.tables[schema.table] = table
        return table

    def table(self, name: str) -> Table:
        try:
            return self.tables[name]
        except KeyError:
            raise UnknownTableError(f"unknown table {name!r}") from None

    def catalog(self) -> dict[str, Schema]:
        return {name: t.schema for name, t in self.tables.items()}

    # -- time travel --------------------------------------------------------

    def scan_asof(self, name: str, asof: int) -> list[TupleVersion]:
        """Committed snapshot of a table at a past clock tick, ordered by row id."""
        if asof > self._scn:
            raise FutureScnError(f"scn {asof} is in the future (current {self._scn})")
        table = self.table(name)
        out = []
        for rid in sorted(table.chains):
            version = table.version_at(rid, asof)
            if version is not None:
                out.append(version)
        return out

    # -- integrity ----------------------------------------------------------

    def content_hash(self) -> str:
        """Hash of every version of every table plus the clock position."""
        digest = hashlib.sha256()
        digest.update(str(self._scn).encode())
        for name in sorted(self.tables):
            table = self.tables[name]
            digest.update(name.encode())
            digest.update(repr([(c, k.value) for c, k in table.schema.columns]).encode())
            digest.update(str(table.next_row_id).encode())
            for rid in sorted(table.chains):
                for v in table.chains[rid]:
                    row = [v.row_id, [format_value(x) for x in v.values],
                           v.begin_scn, v.end_scn, v.creator_xid, v.creator_stmt]
                    digest.update(json.dumps(row).encode())
        return digest.hexdigest()
