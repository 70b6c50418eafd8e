"""Exception hierarchy shared across the engine.

Every error carries a stable machine-readable ``code`` so the HTTP layer and
the CLI can map failures without string matching.
"""
from __future__ import annotations


class EngineError(Exception):
    """Base class for all domain errors."""

    code = "engine_error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class CatalogError(EngineError):
    code = "catalog_error"


class UnknownTableError(CatalogError):
    code = "table_not_found"


class UnknownColumnError(CatalogError):
    code = "column_not_found"


class AmbiguousColumnError(CatalogError):
    code = "ambiguous_column"


class TypeCheckError(EngineError):
    code = "type_mismatch"


class ValueError_(EngineError):
    """Runtime value errors (bad comparisons, division by zero)."""

    code = "value_error"


class SqlSyntaxError(EngineError):
    code = "syntax_error"

    def __init__(self, message: str, line: int = 1, column: int = 1,
                 expected: tuple[str, ...] = ()):
        detail = f"{message} at line {line}, column {column}"
        if expected:
            detail += " (expected: " + ", ".join(sorted(expected)) + ")"
        super().__init__(detail)
        self.line = line
        self.column = column
        self.expected = expected


class UnboundParameterError(EngineError):
    code = "unbound_parameter"

    def __init__(self, name: str):
        super().__init__(f"no value bound for parameter {name}")
        self.name = name


class LifecycleError(EngineError):
    """BEGIN/COMMIT/ABORT sequencing violation."""

    code = "lifecycle_error"


class UnknownTxnError(EngineError):
    code = "txn_not_found"


class FutureScnError(EngineError):
    code = "future_scn"


class InvalidRangeError(EngineError):
    code = "invalid_range"


class WriteConflictAbort(EngineError):
    """Raised when first-updater-wins aborts a transaction.

    The transaction is already rolled back when this propagates; callers only
    need to report it.
    """

    code = "write_conflict"

    def __init__(self, xid: int, conflicting_xid: int, table: str, row_id: int):
        super().__init__(
            f"transaction {xid} aborted: row {row_id} of {table!r} was "
            f"concurrently written by transaction {conflicting_xid}"
        )
        self.xid = xid
        self.conflicting_xid = conflicting_xid
        self.table = table
        self.row_id = row_id


class WorkloadError(EngineError):
    code = "workload_error"

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class LogFormatError(EngineError):
    code = "log_format_error"


class ScenarioError(EngineError):
    code = "invalid_scenario"


class ProvenanceRefError(EngineError):
    code = "unresolvable_ref"


class ExecutionBusyError(EngineError):
    code = "execute_busy"
