"""reenact: a post-mortem transaction debugger.

Records an interleaved multi-version transactional history, replays any past
transaction as a query over time-travel reads, exposes intermediate table
states and tuple-version provenance graphs, and evaluates what-if variants —
all without modifying the recorded history.
"""
from .engine import Engine
from .model import IsolationLevel, TxnState
from .values import ValueKind

__all__ = ["Engine", "IsolationLevel", "TxnState", "ValueKind"]

__version__ = "0.1.0"
