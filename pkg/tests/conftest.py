import pytest

from reenact.errors import WriteConflictAbort
from reenact.fixtures import (
    PROMOTION_SQL, T1_BINDS, T2_BINDS, WITHDRAW_SQL, OVERDRAFT_SQL,
    banking_engine, empty_banking_engine, serial_banking_engine,
)
from reenact.model import IsolationLevel


@pytest.fixture
def banking():
    """Interleaved write-skew history: (engine, t1, t2)."""
    return banking_engine()


@pytest.fixture
def serial_banking():
    return serial_banking_engine()


@pytest.fixture
def promotion_banking():
    """Both withdrawals prefixed with the promotion update; T2 aborts."""
    engine = empty_banking_engine()
    t1 = engine.begin("s1", IsolationLevel.SNAPSHOT)
    t2 = engine.begin("s2", IsolationLevel.SNAPSHOT)
    engine.execute(t1, PROMOTION_SQL, {":name": "Alice"})
    engine.execute(t1, WITHDRAW_SQL, T1_BINDS)
    conflict = None
    try:
        engine.execute(t2, PROMOTION_SQL, {":name": "Alice"})
    except WriteConflictAbort as exc:
        conflict = exc
    engine.execute(t1, OVERDRAFT_SQL, {":name": "Alice"})
    engine.commit(t1)
    return engine, t1, t2, conflict
