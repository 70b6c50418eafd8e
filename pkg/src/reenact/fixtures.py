"""The banking write-skew fixture used by tests, the CLI demo, and serve.

Two concurrent withdrawals under snapshot isolation each read the other
account's stale balance, so neither inserts the overdraft record even though
the committed balances end up at -20 and -10.
"""
from __future__ import annotations

from decimal import Decimal

from .engine import Engine
from .model import IsolationLevel
from .values import ValueKind

WITHDRAW_SQL = ("UPDATE account SET bal = bal - :amount "
                "WHERE cust = :name AND typ = :type")

OVERDRAFT_SQL = ("INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal "
                 "FROM account a1, account a2 "
                 "WHERE a1.cust = :name AND a1.cust = a2.cust "
                 "AND a1.typ != a2.typ AND a1.bal + a2.bal < 0)")

PROMOTION_SQL = "UPDATE account SET bal = bal WHERE cust = :name"

T1_BINDS = {":name": "Alice", ":amount": 70, ":type": "Checking"}
T2_BINDS = {":name": "Alice", ":amount": 40, ":type": "Savings"}


def empty_banking_engine() -> Engine:
    engine = Engine()
    engine.create_table("account", [("cust", ValueKind.TEXT),
                                    ("typ", ValueKind.TEXT),
                                    ("bal", ValueKind.DEC)],
                        [["Alice", "Checking", Decimal("50.00")],
                         ["Alice", "Savings", Decimal("30.00")]])
    engine.create_table("overdraft", [("cust", ValueKind.TEXT),
                                      ("bal", ValueKind.DEC)])
    return engine


def banking_engine(isolation: IsolationLevel = IsolationLevel.SNAPSHOT):
    """The interleaved two-transaction history; returns (engine, t1, t2)."""
    engine = empty_banking_engine()
    t1 = engine.begin("s1", isolation)
    t2 = engine.begin("s2", isolation)
    engine.execute(t1, WITHDRAW_SQL, T1_BINDS)
    engine.execute(t2, WITHDRAW_SQL, T2_BINDS)
    engine.execute(t1, OVERDRAFT_SQL, {":name": "Alice"})
    engine.commit(t1)
    engine.execute(t2, OVERDRAFT_SQL, {":name": "Alice"})
    engine.commit(t2)
    return engine, t1, t2


def serial_banking_engine():
    """Same two transactions run one after the other (no anomaly)."""
    engine = empty_banking_engine()
    t1 = engine.begin("s1", IsolationLevel.SNAPSHOT)
    engine.execute(t1, WITHDRAW_SQL, T1_BINDS)
    engine.execute(t1, OVERDRAFT_SQL, {":name": "Alice"})
    engine.commit(t1)
    t2 = engine.begin("s2", IsolationLevel.SNAPSHOT)
    engine.execute(t2, WITHDRAW_SQL, T2_BINDS)
    engine.execute(t2, OVERDRAFT_SQL, {":name": "Alice"})
    engine.commit(t2)
    return engine, t1, t2


FIG_WORKLOAD = """\
-- banking write-skew history (interleaved, snapshot isolation)
s0: CREATE TABLE account (cust TEXT, typ TEXT, bal DEC) VALUES ('Alice', 'Checking', 50.00), ('Alice', 'Savings', 30.00);
s0: CREATE TABLE overdraft (cust TEXT, bal DEC);
s1: BEGIN ISOLATION LEVEL SNAPSHOT;
s2: BEGIN ISOLATION LEVEL SNAPSHOT;
s1: UPDATE account SET bal = bal - 70 WHERE cust = 'Alice' AND typ = 'Checking';
s2: UPDATE account SET bal = bal - 40 WHERE cust = 'Alice' AND typ = 'Savings';
s1: INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal FROM account a1, account a2 WHERE a1.cust = 'Alice' AND a1.cust = a2.cust AND a1.typ != a2.typ AND a1.bal + a2.bal < 0);
s1: COMMIT;
s2: INSERT INTO overdraft (SELECT a1.cust, a1.bal + a2.bal FROM account a1, account a2 WHERE a1.cust = 'Alice' AND a1.cust = a2.cust AND a1.typ != a2.typ AND a1.bal + a2.bal < 0);
s2: COMMIT;
"""
