"""The compositional semantics, its laws, and agreement with the machine."""

import math

import pytest

from conftest import assert_measures_equal
from sfpc import corpus
from sfpc.dist import (
    FALSE_POINT,
    TRUE_POINT,
    UNIT_POINT,
    finite_support,
    render_point,
)
from sfpc.errors import HigherOrderUnsupported, NotEnumerable
from sfpc.machine import Machine
from sfpc.measures import (
    InfiniteEvidence,
    Success,
    WeightedMeasure,
    ZeroEvidence,
    iota,
    measures_close,
)
from sfpc.oracle import denote_program
from sfpc.parser import parse
from sfpc.syntax import BOOL, REAL, UNIT
from sfpc.typecheck import check_program


def measure_of(src: str) -> WeightedMeasure:
    return denote_program(parse(src))


class TestDenotationExamples:
    def test_return_true_is_a_point_mass(self):
        m = measure_of("return(true)")
        assert m.entries == [(1.0, 1.0, TRUE_POINT)]

    def test_two_point_table(self):
        m = denote_program(corpus.program("two_point_posterior")).merged()
        assert sorted(m.entries) == [
            (0.25, 5.0, TRUE_POINT),
            (0.75, 2.0, FALSE_POINT),
        ]

    def test_scores_multiply_through_let(self):
        m = measure_of("let x = score(2.0) in score(3.0); return(*)")
        assert m.merged().entries == [(1.0, 6.0, UNIT_POINT)]

    def test_continuous_site_raises(self):
        with pytest.raises(NotEnumerable):
            measure_of("sample(gauss(0.0, 1.0))")

    def test_function_cannot_enter_a_measure(self):
        with pytest.raises(HigherOrderUnsupported):
            measure_of("return(\\x : real. x)")

    def test_internal_higher_order_is_fine(self):
        m = measure_of("let f = return(\\x : real. x + 1.0) in return(f (1.0))")
        assert m.entries == [(1.0, 1.0, 2.0)]


class TestSequencingLaws:
    """Equalities of denotations, checked as exact measure equality."""

    def law(self, left: str, right: str):
        assert_measures_equal(measure_of(left), measure_of(right))

    def test_left_unit(self):
        self.law(
            "let x = return(true) in (if x then score(2.0) else score(3.0)); return(x)",
            "(if true then score(2.0) else score(3.0)); return(true)",
        )

    def test_right_unit(self):
        self.law(
            "let x = sample(bern(0.25)) in return(x)",
            "sample(bern(0.25))",
        )

    def test_associativity(self):
        self.law(
            "let y = (let x = sample(bern(0.5)) in (if x then score(2.0) else score(3.0)); return(x)) in return(y)",
            "let x = sample(bern(0.5)) in let y = ((if x then score(2.0) else score(3.0)); return(x)) in return(y)",
        )

    def test_commutativity(self):
        self.law(
            "let x = sample(bern(0.5)) in let y = sample(bern(0.25)) in return((x, y))",
            "let y = sample(bern(0.25)) in let x = sample(bern(0.5)) in return((x, y))",
        )

    def test_commutativity_with_scores(self):
        self.law(
            "let x = sample(bern(0.5)) in let y = (score(2.0); return(*)) in return((x, y))",
            "let y = (score(2.0); return(*)) in let x = sample(bern(0.5)) in return((x, y))",
        )

    def test_score_fusion(self):
        a = measure_of("score(7.0); score(6.1); return(*)")
        b = measure_of("score(42.7); return(*)")
        assert measures_close(a, b, 1e-12)

    def test_score_fusion_parametrized(self):
        for x, y in [(2.0, 3.0), (0.5, 8.0), (1.0, 0.0)]:
            a = measure_of(f"score({x}); score({y}); return(*)")
            b = measure_of(f"score({x * y}); return(*)")
            assert measures_close(a, b, 1e-12)

    def test_score_clamping(self):
        self.law("score(-1.0); return(*)", "score(0.0); return(*)")


class TestIota:
    def test_two_point_normalization(self):
        m = WeightedMeasure(
            [(0.25, 5.0, TRUE_POINT), (0.75, 2.0, FALSE_POINT)], BOOL
        )
        r = iota(m)
        assert isinstance(r, Success)
        assert abs(r.evidence - 2.75) <= 1e-12
        masses = dict((render_point(v, BOOL), p) for p, v in r.posterior.entries)
        assert abs(masses["true"] - 5.0 / 11.0) <= 1e-12
        assert abs(masses["false"] - 6.0 / 11.0) <= 1e-12

    def test_zero_evidence(self):
        assert isinstance(
            iota(WeightedMeasure([(1.0, 0.0, UNIT_POINT)], UNIT)), ZeroEvidence
        )

    def test_unweighted_dirac(self):
        r = iota(WeightedMeasure([(1.0, 1.0, 42.0)], REAL))
        assert isinstance(r, Success) and r.evidence == 1.0
        assert r.posterior == finite_support([(1.0, 42.0)], REAL)

    def test_infinite_score(self):
        r = iota(WeightedMeasure([(1.0, math.inf, 42.0)], REAL))
        assert isinstance(r, InfiniteEvidence)

    def test_posterior_masses_sum_to_one(self):
        m = WeightedMeasure(
            [(0.2, 1.5, 1.0), (0.3, 0.5, 2.0), (0.5, 2.5, 3.0)], REAL
        )
        r = iota(m)
        assert abs(sum(p for p, _ in r.posterior.entries) - 1.0) <= 1e-12
        assert r.evidence > 0

    def test_refinement_invariance(self):
        """Splitting any atom in half (twice) leaves iota unchanged."""
        base = WeightedMeasure(
            [(0.25, 5.0, TRUE_POINT), (0.75, 2.0, FALSE_POINT)], BOOL
        )
        split = WeightedMeasure(
            [(0.125, 5.0, TRUE_POINT), (0.125, 5.0, TRUE_POINT),
             (0.375, 2.0, FALSE_POINT), (0.375, 2.0, FALSE_POINT)],
            BOOL,
        )
        a, b = iota(base), iota(split)
        assert abs(a.evidence - b.evidence) <= 1e-12
        assert a.posterior == b.posterior


class TestSoundness:
    """The operational enumerator and the compositional semantics give
    identical merged measures on every countably-branching program."""

    @pytest.mark.parametrize("name", [n for n in corpus.DISCRETE
                                      if corpus.checked(n).mode == "p"])
    def test_enumerator_matches_denotation(self, name, machine):
        checked = corpus.checked(name)
        om = denote_program(checked)
        entries = machine.enumerate_config(machine.config(checked.term, checked.ty))
        mm = WeightedMeasure(list(entries), checked.ty)
        assert_measures_equal(om, mm, 1e-12)

    def test_deterministic_programs_agree_too(self, machine):
        for name in corpus.DISCRETE:
            checked = corpus.checked(name)
            if checked.mode != "d":
                continue
            point = denote_program(checked)
            final, _ = machine.eval_det(machine.config(checked.term, checked.ty))
            from sfpc.machine import sem_value

            assert sem_value(final.term, final.env) == point
