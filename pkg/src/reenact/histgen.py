"""Seeded random history generator and failure shrinking.

Histories are emitted as self-contained workload scripts: two small tables,
up to five transactions of up to four statements each, values in {-3..3},
names in {A, B, C}, both isolation levels, arbitrary interleavings. Small
enough for brute-force provenance checking, rich enough for write-skew.
"""
from __future__ import annotations

import random

from .workload import parse_workload
from .errors import EngineError

NAMES = ("A", "B", "C")
MAX_TXNS = 5
MAX_STMTS = 4
MAX_ROWS = 8


def _value(rng) -> int:
    return rng.randint(-3, 3)


def _name(rng) -> str:
    return f"'{rng.choice(NAMES)}'"


def _pred(rng, alias: str = "", table: str = "r") -> str:
    q = f"{alias}." if alias else ""
    cols = ("name", "a", "b") if table == "r" else ("name", "c")
    col = rng.choice(cols)
    if col == "name":
        term = f"{q}name {rng.choice(('=', '!='))} {_name(rng)}"
    else:
        op = rng.choice(("=", "!=", "<", "<=", ">", ">="))
        term = f"{q}{col} {op} {_value(rng)}"
    if rng.random() < 0.3:
        other = _pred(rng, alias, table)
        return f"{term} {rng.choice(('AND', 'OR'))} {other}"
    return term


def _update_expr(rng, table: str) -> str:
    if table == "r":
        choices = (f"a + {_value(rng)}", f"b - {_value(rng)}", str(_value(rng)),
                   "a + b", "-a")
    else:
        choices = (f"c + {_value(rng)}", str(_value(rng)), "-c")
    return rng.choice(choices)


def _statement(rng) -> str:
    roll = rng.random()
    if roll < 0.30:
        col = rng.choice(("a", "b"))
        return f"UPDATE r SET {col} = {_update_expr(rng, 'r')} WHERE {_pred(rng, table='r')}"
    if roll < 0.45:
        return f"UPDATE s SET c = {_update_expr(rng, 's')} WHERE {_pred(rng, table='s')}"
    if roll < 0.55:
        table = rng.choice(("r", "s"))
        return f"DELETE FROM {table} WHERE {_pred(rng, table=table)}"
    if roll < 0.70:
        rows = ", ".join(f"({_name(rng)}, {_value(rng)}, {_value(rng)})"
                         for _ in range(rng.randint(1, 2)))
        return f"INSERT INTO r VALUES {rows}"
    if roll < 0.80:
        return f"INSERT INTO s VALUES ({_name(rng)}, {_value(rng)})"
    if roll < 0.90:
        return (f"INSERT INTO s (SELECT name, {rng.choice(('a', 'b', 'a + b'))} "
                f"FROM r WHERE {_pred(rng, table='r')})")
    if roll < 0.97:
        return (f"INSERT INTO s (SELECT r1.name, r1.a + r2.b FROM r r1, r r2 "
                f"WHERE r1.name = r2.name AND {_pred(rng, 'r1', 'r')})")
    return f"SELECT * FROM {rng.choice(('r', 's'))}"


def generate_history(seed: int) -> str:
    """Deterministic workload script for one seed."""
    rng = random.Random(seed)
    lines = [f"-- generated history, seed {seed}"]
    r_rows = ", ".join(f"({_name(rng)}, {_value(rng)}, {_value(rng)})"
                       for _ in range(rng.randint(1, MAX_ROWS)))
    s_rows = ", ".join(f"({_name(rng)}, {_value(rng)})"
                       for _ in range(rng.randint(0, MAX_ROWS // 2)))
    lines.append(f"s0: CREATE TABLE r (name TEXT, a INT, b INT) VALUES {r_rows};")
    if s_rows:
        lines.append(f"s0: CREATE TABLE s (name TEXT, c INT) VALUES {s_rows};")
    else:
        lines.append("s0: CREATE TABLE s (name TEXT, c INT);")

    n_txns = rng.randint(1, MAX_TXNS)
    queues = []
    for t in range(n_txns):
        session = f"s{t + 1}"
        isolation = rng.choice(("SNAPSHOT", "READ COMMITTED"))
        commands = [f"{session}: BEGIN ISOLATION LEVEL {isolation};"]
        for _ in range(rng.randint(1, MAX_STMTS)):
            commands.append(f"{session}: {_statement(rng)};")
        terminal = "ABORT" if rng.random() < 0.10 else "COMMIT"
        commands.append(f"{session}: {terminal};")
        queues.append(commands)

    # random merge preserving per-session order
    while any(queues):
        pick = rng.choice([q for q in queues if q])
        lines.append(pick.pop(0))
    return "\n".join(lines) + "\n"


# --------------------------------------------------------------------------
# shrinking
# --------------------------------------------------------------------------

def _still_valid(script: str) -> bool:
    try:
        parse_workload(script)
        return True
    except EngineError:
        return False


def _drop_line(script: str, index: int) -> str:
    lines = script.splitlines()
    del lines[index]
    return "\n".join(lines) + "\n"


def _drop_transaction(script: str, session: str) -> str:
    lines = [line for line in script.splitlines()
             if not line.strip().lower().startswith(f"{session}:")]
    return "\n".join(lines) + "\n"


def shrink_history(script: str, is_failing) -> str:
    """Minimize a failing script by deleting transactions, then statements.

    ``is_failing(script) -> bool`` must stay true for every kept reduction.
    """
    changed = True
    while changed:
        changed = False
        sessions = []
        for line in script.splitlines():
            head = line.split(":", 1)[0].strip().lower()
            if head and head != "s0" and head not in sessions and ":" in line:
                sessions.append(head)
        for session in sessions:
            candidate = _drop_transaction(script, session)
            if _still_valid(candidate) and is_failing(candidate):
                script = candidate
                changed = True
                break
    changed = True
    while changed:
        changed = False
        lines = script.splitlines()
        for i in range(len(lines)):
            text = lines[i].strip()
            if not text or text.startswith("--"):
                continue
            head = text.split(":", 1)
            if len(head) < 2:
                continue
            body = head[1].strip().upper()
            if body.startswith(("BEGIN", "COMMIT", "ABORT", "CREATE")):
                continue
            candidate = _drop_line(script, i)
            if _still_valid(candidate) and is_failing(candidate):
                script = candidate
                changed = True
                break
    return script
