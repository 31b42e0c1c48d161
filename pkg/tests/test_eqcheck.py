"""The equation corpus and both checking modes."""

import pytest

from sfpc.dist import finite_support, FALSE_POINT, TRUE_POINT
from sfpc.eqcheck import (
    INDICATOR,
    EquationCase,
    builtin_corpus,
    check_exact,
    check_statistical,
    probe_expectation,
    run_case,
)
from sfpc.parser import parse
from sfpc.syntax import BOOL

TRIALS = 20_000  # module-level runs use a reduced but still strict budget

REQUIRED_CASES = {
    "score-fusion",
    "commutativity",
    "gauss-sign-vs-coin",
    "gt-irreflexive",
    "beta-bernoulli-conjugacy",
    "resample-two-point",
    "resample-continuous",
    "importance-sampling",
    "sentinel-unequal",
}


class TestCorpusShape:
    def test_at_least_twelve_equal_cases(self):
        cases = builtin_corpus()
        equal_cases = [c for c in cases if c.expect_equal]
        assert len(equal_cases) >= 12

    def test_required_cases_present(self):
        names = {c.name for c in builtin_corpus()}
        assert REQUIRED_CASES <= names

    def test_three_higher_order_reductions(self):
        ho = [c for c in builtin_corpus() if "hand-reduced" in c.note
              or c.name == "expectation-combinator"]
        assert len(ho) >= 3

    def test_modes_are_valid(self):
        for c in builtin_corpus():
            assert c.mode in ("exact", "statistical", "both")
            # every side typechecks at the same type
            from sfpc.typecheck import check_program

            assert check_program(c.left).ty == check_program(c.right).ty


class TestVerdicts:
    @pytest.mark.parametrize(
        "case", [c for c in builtin_corpus() if c.mode in ("exact", "both")],
        ids=lambda c: c.name,
    )
    def test_exact_cases(self, case):
        v = check_exact(case)
        assert v.equal == case.expect_equal, v.details

    @pytest.mark.parametrize(
        "case", [c for c in builtin_corpus() if c.mode in ("statistical", "both")],
        ids=lambda c: c.name,
    )
    def test_statistical_cases(self, case):
        v = check_statistical(case, trials=TRIALS, seed=0)
        assert v.equal == case.expect_equal, v.details

    def test_sentinel_fails_decisively(self):
        (case,) = [c for c in builtin_corpus() if not c.expect_equal]
        v = check_statistical(case, trials=TRIALS, seed=0)
        assert not v.equal and v.ok
        probe = v.details["comparisons"]["probe:p_true"]
        assert probe["diff"] > 5 * probe["bound"]

    def test_exact_cases_also_pass_statistical(self):
        """Consistency of the two checkers, on every case where the
        statistical mode is calibrated."""
        for case in builtin_corpus():
            if case.mode not in ("exact", "both") or not case.expect_equal:
                continue
            if not case.statistical_consistent:
                continue
            v = check_statistical(case, trials=10_000, seed=1)
            assert v.equal, (case.name, v.details)

    def test_verdicts_deterministic(self):
        case = [c for c in builtin_corpus() if c.name == "gauss-sign-vs-coin"][0]
        a = check_statistical(case, trials=5000, seed=3)
        b = check_statistical(case, trials=5000, seed=3)
        assert a.details == b.details

    def test_run_case_dispatches_both(self):
        case = [c for c in builtin_corpus() if c.name == "monad-right-unit"][0]
        verdicts = run_case(case, trials=2000, seed=0)
        assert [v.mode for v in verdicts] == ["exact", "statistical"]

    def test_verdict_json_shape(self):
        case = [c for c in builtin_corpus() if c.name == "score-fusion"][0]
        js = check_exact(case).to_json()
        assert js["verdict"] == "PASS" and js["ok"] is True


class TestProbes:
    def test_exact_expectation_on_finite_table(self):
        d = finite_support([(0.25, TRUE_POINT), (0.75, FALSE_POINT)], BOOL)
        mean, se = probe_expectation(d, INDICATOR, __import__("sfpc.prims", fromlist=["DEFAULT_REGISTRY"]).DEFAULT_REGISTRY)
        assert mean == 0.25 and se == 0.0

    def test_mismatched_types_fail_cleanly(self):
        case = EquationCase(
            "bad", parse("return(1.0)"), parse("return(true)"), "exact"
        )
        v = check_exact(case)
        assert not v.equal and "type" in v.details.get("reason", "")
