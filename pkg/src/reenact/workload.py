"""Workload script format: one `<session> : <command> ;` per line.

Commands are BEGIN [ISOLATION LEVEL ...], COMMIT, ABORT, CREATE TABLE (an
engine bootstrap, only outside transactions), or any statement of the SQL
subset. `--` starts a comment. Bind parameters are not allowed here;
scripts carry literals inline.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import SqlSyntaxError, WorkloadError
from .lexer import tokenize
from .model import IsolationLevel
from .parser import _Parser, parse
from .sqlast import Literal
from .values import ValueKind


@dataclass(frozen=True)
class CreateTableCommand:
    table: str
    columns: tuple  # tuple[(name, ValueKind), ...]
    rows: tuple  # tuple[tuple[value, ...], ...]


@dataclass(frozen=True)
class WorkloadCommand:
    session: str
    line: int
    kind: str  # BEGIN | COMMIT | ABORT | CREATE | STATEMENT
    isolation: IsolationLevel | None = None
    sql: str | None = None
    ast: object = None
    create: CreateTableCommand | None = None


@dataclass(frozen=True)
class WorkloadScript:
    commands: tuple


_KIND_WORDS = {"INT": ValueKind.INT, "DEC": ValueKind.DEC, "TEXT": ValueKind.TEXT}


def _strip_comment(line: str) -> str:
    in_string = False
    i = 0
    while i < len(line):
        ch = line[i]
        if ch == "'":
            in_string = not in_string
        elif not in_string and line.startswith("--", i):
            return line[:i]
        i += 1
    return line


def _parse_create(p: _Parser, line: int) -> CreateTableCommand:
    p.expect_keyword("CREATE")
    p.expect_keyword("TABLE")
    table = p.expect_ident("table name")
    p.expect_symbol("(")
    columns = []
    while True:
        name = p.expect_ident("column name")
        kind_tok = p.expect_keyword("INT", "DEC", "TEXT")
        columns.append((name, _KIND_WORDS[kind_tok.text]))
        if not p.accept_symbol(","):
            break
    p.expect_symbol(")")
    rows = []
    if p.accept_keyword("VALUES"):
        while True:
            p.expect_symbol("(")
            row = []
            while True:
                expr = p._unary_expr()
                if not isinstance(expr, Literal):
                    raise WorkloadError("CREATE TABLE VALUES accepts literals only", line)
                row.append(expr.value)
                if not p.accept_symbol(","):
                    break
            p.expect_symbol(")")
            rows.append(tuple(row))
            if not p.accept_symbol(","):
                break
    return CreateTableCommand(table, tuple(columns), tuple(rows))


def _parse_command(session: str, text: str, line: int) -> WorkloadCommand:
    tokens = tokenize(text, line_offset=line - 1)
    head = tokens[0]
    if head.kind == "KEYWORD" and head.text == "BEGIN":
        p = _Parser(tokens)
        p.advance()
        isolation = IsolationLevel.SNAPSHOT
        if p.accept_keyword("ISOLATION"):
            p.expect_keyword("LEVEL")
            tok = p.expect_keyword("SNAPSHOT", "READ")
            if tok.text == "READ":
                p.expect_keyword("COMMITTED")
                isolation = IsolationLevel.READ_COMMITTED
        p.finish()
        return WorkloadCommand(session, line, "BEGIN", isolation=isolation)
    if head.kind == "KEYWORD" and head.text in ("COMMIT", "ABORT"):
        p = _Parser(tokens)
        p.advance()
        p.finish()
        return WorkloadCommand(session, line, head.text)
    if head.kind == "KEYWORD" and head.text == "CREATE":
        p = _Parser(tokens)
        create = _parse_create(p, line)
        p.finish()
        return WorkloadCommand(session, line, "CREATE", create=create)
    ast = parse(text, line_offset=line - 1)
    return WorkloadCommand(session, line, "STATEMENT", sql=text, ast=ast)


def parse_workload(text: str) -> WorkloadScript:
    """Parse and lifecycle-check a workload script."""
    commands: list[WorkloadCommand] = []
    active: dict[str, bool] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw).strip()
        if not line:
            continue
        if ":" not in line:
            raise WorkloadError("missing '<session> :' prefix", lineno)
        session_part, rest = line.split(":", 1)
        session = session_part.strip().lower()
        if not session or not all(c.isalnum() or c == "_" for c in session):
            raise WorkloadError(f"bad session id {session_part.strip()!r}", lineno)
        rest = rest.strip()
        if not rest.endswith(";"):
            raise WorkloadError("command must end with ';'", lineno)
        rest = rest[:-1].strip()
        if not rest:
            raise WorkloadError("empty command", lineno)
        try:
            command = _parse_command(session, rest, lineno)
        except SqlSyntaxError:
            raise
        commands.append(command)
        # lifecycle word per session: (BEGIN (DML)* (COMMIT|ABORT))*
        if command.kind == "BEGIN":
            if active.get(session):
                raise WorkloadError(f"session {session!r} already has an open transaction", lineno)
            active[session] = True
        elif command.kind in ("COMMIT", "ABORT"):
            if not active.get(session):
                raise WorkloadError(f"{command.kind} without BEGIN in session {session!r}", lineno)
            active[session] = False
        elif command.kind == "STATEMENT":
            if not active.get(session):
                raise WorkloadError(f"statement before BEGIN in session {session!r}", lineno)
        elif command.kind == "CREATE":
            if active.get(session):
                raise WorkloadError("CREATE TABLE is not allowed inside a transaction", lineno)
    for session, open_ in active.items():
        if open_:
            raise WorkloadError(f"session {session!r} ends with an open transaction",
                                len(text.splitlines()))
    return WorkloadScript(tuple(commands))
