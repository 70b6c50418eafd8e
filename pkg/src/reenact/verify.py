"""Native-vs-reenactment equivalence checking over recorded histories.

For every committed transaction of a history, every reenactment-plan entry
must evaluate bit-exactly equal to the state the engine recorded natively
after the corresponding statement, statement prefixes must agree, the final
written rows must match the committed snapshot, and aborted transactions
must be invisible at every clock tick. Used by the CLI `verify` command and
the acceptance suite.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .engine import Engine
from .errors import EngineError
from .histgen import generate_history, shrink_history
from .model import TxnState
from .reenactor import expr_signature, reenact_transaction


@dataclass
class HistoryReport:
    issues: list = field(default_factory=list)

    def ok(self) -> bool:
        return not self.issues

    def add(self, message: str):
        self.issues.append(message)


def _view_signature(view_rows) -> list:
    # recorded views store (rid, values, creator_xid, creator_stmt, begin_scn)
    return [(r[0], r[1], r[2], r[3]) for r in view_rows]


def _relation_signature(rel) -> list:
    return [(r.rid, r.values, r.creator_xid, r.creator_stmt) for r in rel.rows]


def check_transaction(engine: Engine, xid: int, report: HistoryReport) -> None:
    record = engine.txn_record(xid)
    plan = reenact_transaction(engine, xid)
    evaluation = plan.evaluate(engine.db)

    if record.initial_views:
        for table, want in record.initial_views.items():
            got = _relation_signature(evaluation.initial[table])
            if got != _view_signature(want):
                report.add(f"txn {xid}: initial view of {table!r} diverges")

    for i, entry in enumerate(evaluation.entries):
        want_views = record.recorded_views[i]
        for table in plan.tables:
            got = _relation_signature(entry[table])
            want = _view_signature(want_views[table])
            if got != want:
                report.add(
                    f"txn {xid} stmt {i}: reenacted {table!r} diverges: "
                    f"{got!r} != {want!r}")

    for i, spec in enumerate(plan.stmts):
        native = record.statement_results[i]
        if frozenset(spec.affected_ids) != frozenset(native.affected_row_ids):
            report.add(f"txn {xid} stmt {i}: affected-row sets diverge")
        if tuple(spec.inserted_ids) != tuple(native.inserted_row_ids):
            report.add(f"txn {xid} stmt {i}: inserted-row ids diverge")

    # final state of written rows equals the committed snapshot at commit scn
    final_entry = evaluation.entries[-1] if evaluation.entries else evaluation.initial
    for table, rid in sorted(record.write_set):
        version = engine.db.table(table).version_at(rid, record.commit_scn)
        plan_row = None
        for r in final_entry[table].rows:
            if r.rid == rid:
                plan_row = r
                break
        if version is None and plan_row is not None:
            report.add(f"txn {xid}: row {rid} of {table!r} should be deleted")
        elif version is not None and plan_row is None:
            report.add(f"txn {xid}: row {rid} of {table!r} missing from plan")
        elif version is not None and version.values != plan_row.values:
            report.add(f"txn {xid}: row {rid} of {table!r} value mismatch")

    # prefix plans are subtrees of the full plan and evaluate identically
    for i in range(len(plan.stmts)):
        prefix = reenact_transaction(engine, xid, up_to=i)
        for table in plan.tables:
            if expr_signature(prefix.entries[i][table]) != \
                    expr_signature(plan.entries[i][table]):
                report.add(f"txn {xid}: prefix plan {i} is not a subtree")
                break


def check_aborted_invisible(engine: Engine, report: HistoryReport) -> None:
    aborted = {xid for xid, t in engine.txns.items() if t.state is TxnState.ABORTED}
    if not aborted:
        return
    for name, table in engine.db.tables.items():
        for chain in table.chains.values():
            for version in chain:
                if version.creator_xid in aborted:
                    report.add(
                        f"aborted txn {version.creator_xid} left a version "
                        f"in {name!r}")


def check_history(script: str) -> HistoryReport:
    """Run a workload natively, then verify reenactment reproduces it."""
    report = HistoryReport()
    engine = Engine()
    try:
        engine.run_workload(script)
    except EngineError as exc:
        report.add(f"workload failed to run: {exc.message}")
        return report
    before = engine.state_hash()
    committed = [xid for xid, t in sorted(engine.txns.items())
                 if t.state is TxnState.COMMITTED]
    for xid in committed:
        try:
            check_transaction(engine, xid, report)
        except EngineError as exc:
            report.add(f"txn {xid}: reenactment raised {exc.code}: {exc.message}")
    check_aborted_invisible(engine, report)
    if engine.state_hash() != before:
        report.add("reenactment modified engine state")
    return report


@dataclass
class VerificationFailure:
    seed: int
    issues: list
    script: str
    shrunk: str


@dataclass
class VerificationResult:
    total: int
    passed: int
    failures: list

    def ok(self) -> bool:
        return self.passed == self.total


def run_verification(seeds: int, base_seed: int = 0, check=check_history,
                     shrink: bool = True) -> VerificationResult:
    failures = []
    passed = 0
    for seed in range(base_seed, base_seed + seeds):
        script = generate_history(seed)
        report = check(script)
        if report.ok():
            passed += 1
            continue
        shrunk = script
        if shrink:
            shrunk = shrink_history(script, lambda s: not check(s).ok())
        failures.append(VerificationFailure(seed, report.issues, script, shrunk))
    return VerificationResult(seeds, passed, failures)
