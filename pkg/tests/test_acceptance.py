"""Acceptance suite: every advertised behavior at its stated tolerance.

Each test carries its tolerances inline; a summary line per criterion is
printed at the end of the run (see conftest.pytest_terminal_summary).
Timing bounds are asserted where the contract states them.
"""

import json
import math
import subprocess
import sys
import time
from importlib import resources

import numpy as np

from conftest import assert_measures_equal, random_measurable_ty, random_point
from sfpc import corpus
from sfpc.backends import (
    McConfig,
    QuadConfig,
    machine_nu_mc,
    normalize_mc,
    normalize_quadrature,
)
from sfpc.dist import decompose, enumerate_dist, rebuild, render_point
from sfpc.eqcheck import INDICATOR, builtin_corpus, probe_expectation, run_case
from sfpc.prims import DEFAULT_REGISTRY
from sfpc.machine import Machine, env_ctx
from sfpc.measures import InfiniteEvidence, Success, WeightedMeasure
from sfpc.oracle import denote_program
from sfpc.parser import parse
from sfpc.printer import pretty
from sfpc.rng import substream
from sfpc.syntax import alpha_eq, is_p_value, is_value
from sfpc.typecheck import infer

EVIDENCE_CLOSED_FORM = math.exp(-25.0 / 20.0) / math.sqrt(2.0 * math.pi * 10.0)


def program_path(name: str) -> str:
    return str(resources.files("sfpc").joinpath(f"programs/{name}.sfpc"))


def posterior_mass(result, rendered: str) -> float:
    atoms = enumerate_dist(result.posterior)
    return sum(
        p for p, v in atoms if render_point(v, result.posterior.over) == rendered
    )


def test_criterion_1_exact_discrete_posterior():
    """Exact normalization of the two-point model: evidence 2.75 and
    posterior (true -> 5/11, false -> 6/11), each within 1e-12, through
    the command-line interface, in under a second."""
    start = time.time()
    proc = subprocess.run(
        [sys.executable, "-m", "sfpc.cli", "norm",
         program_path("two_point_posterior"), "--backend", "exact"],
        capture_output=True, text=True,
    )
    elapsed = time.time() - start
    assert proc.returncode == 0, proc.stderr
    got = json.loads(proc.stdout)
    assert got["tag"] == 0
    assert abs(got["evidence"] - 2.75) <= 1e-12
    atoms = dict((k, v) for k, v in got["posterior"]["atoms"])
    assert abs(atoms["true"] - 5.0 / 11.0) <= 1e-12
    assert abs(atoms["false"] - 6.0 / 11.0) <= 1e-12
    assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_2_gaussian_conditioning_quadrature():
    """Quadrature (512 nodes, 8 sigma, 3 doublings) on the Gaussian
    conditioning program: P(true) = 0.5 within 1e-3 and evidence equal to
    the closed-form marginal density within 1e-4, in under five seconds.

    The reported evidence matches the independently derived closed form
    N(5; 0, sqrt(10)) ~= 0.03614; see the README for the note on the
    posterior/evidence pair this program is sometimes quoted with."""
    start = time.time()
    result = normalize_quadrature(
        corpus.checked("gaussian_conditioning"),
        QuadConfig(nodes=512, radius=8.0, doublings=3),
    )
    elapsed = time.time() - start
    assert isinstance(result, Success)
    assert abs(result.evidence - EVIDENCE_CLOSED_FORM) <= 1e-4
    assert abs(posterior_mass(result, "true") - 0.5) <= 1e-3
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_criterion_3_infinite_evidence():
    """The score that exactly cancels an exponential prior diverges: the
    quadrature backend reports infinite evidence in under five seconds."""
    start = time.time()
    result = normalize_quadrature(
        corpus.checked("exp_score_diverges"),
        QuadConfig(nodes=512, radius=8.0, doublings=3),
    )
    elapsed = time.time() - start
    assert isinstance(result, InfiniteEvidence)
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


def test_criterion_4_monte_carlo_consistency():
    """Monte Carlo with 100000 trials at seed 0 reproduces the exact
    two-point answers within four reported standard errors; the reported
    evidence standard error is below 0.02; under ten seconds."""
    start = time.time()
    result = normalize_mc(
        corpus.checked("two_point_posterior"), McConfig(trials=100_000, seed=0)
    )
    elapsed = time.time() - start
    assert isinstance(result, Success)
    assert result.stderr < 0.02
    assert abs(result.evidence - 2.75) <= 4.0 * result.stderr
    p_true, se_p = probe_expectation(result.posterior, INDICATOR, DEFAULT_REGISTRY)
    assert abs(p_true - 5.0 / 11.0) <= 4.0 * se_p
    assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_criterion_5_soundness_and_adequacy():
    """On at least 20 countably-branching programs, including nested
    normalization and higher-order terms at ground type, the operational
    enumerator and the compositional semantics produce identical merged
    measures within 1e-12."""
    prob_discrete = [n for n in corpus.DISCRETE if corpus.checked(n).mode == "p"]
    assert len(prob_discrete) >= 20
    assert "resample_two_point" in prob_discrete  # nested normalization
    assert "double_norm" in prob_discrete
    for name in ["apply_lambda", "force_thunk", "reified_sampler",
                 "expectation_combinator"]:
        assert name in prob_discrete  # higher-order at ground type
    machine = Machine()
    for name in prob_discrete:
        checked = corpus.checked(name)
        oracle_measure = denote_program(checked)
        entries = machine.enumerate_config(machine.config(checked.term, checked.ty))
        assert_measures_equal(
            oracle_measure, WeightedMeasure(list(entries), checked.ty), 1e-12
        )


def test_criterion_6_equation_corpus():
    """Every builtin equation passes its designated checker (exact where
    enumerable, statistical with 100000 trials and k = 4 otherwise) while
    the unequal sentinel fails, all within sixty seconds."""
    start = time.time()
    cases = builtin_corpus()
    assert len([c for c in cases if c.expect_equal]) >= 12
    failures = []
    sentinel_seen = False
    for case in cases:
        for verdict in run_case(case, trials=100_000, seed=0, k=4.0):
            if not verdict.ok:
                failures.append((verdict.case, verdict.mode, verdict.details))
            if case.name == "sentinel-unequal":
                sentinel_seen = True
                assert not verdict.equal
    elapsed = time.time() - start
    assert sentinel_seen
    assert not failures, failures
    assert elapsed < 60.0, f"took {elapsed:.2f}s"


def test_criterion_7_termination():
    """Every corpus program reaches a (probabilistic) value within the
    step budget across 1000 seeded runs."""
    nu = machine_nu_mc(McConfig(trials=256, seed=99))
    machine = Machine(nu=nu, step_budget=1_000_000)
    runs = 1000
    for name in corpus.ALL:
        checked = corpus.checked(name)
        cfg = machine.config(checked.term, checked.ty)
        if checked.mode == "d":
            for i in range(runs):
                final, steps = machine.eval_det(cfg)
                assert is_value(final.term)
        else:
            for i in range(runs):
                result = machine.eval_prob(cfg, substream(1000, name, i))
                assert is_p_value(result.config.term)


def test_criterion_8_behavioral_conservativity():
    """Three higher-order programs of ground type agree with their
    hand-reduced first-order forms under the appropriate checkers."""
    names = {"reified-sampler-discrete", "expectation-combinator",
             "beta-reduced-comparison", "reified-sampler-continuous"}
    cases = [c for c in builtin_corpus() if c.name in names]
    assert len(cases) >= 3
    for case in cases:
        for verdict in run_case(case, trials=50_000, seed=0, k=4.0):
            assert verdict.ok, (case.name, verdict.details)


def test_criterion_9_structural_properties():
    """Decompose/rebuild round-trips and stepwise type preservation hold
    on ten thousand fuzzed instances each; parsing round-trips the whole
    corpus."""
    # decomposition round-trip
    rng = np.random.default_rng(2024)
    for _ in range(10_000):
        ty = random_measurable_ty(rng)
        point = random_point(rng, ty)
        assert rebuild(decompose(point, ty)) == point

    # type preservation across machine steps, sampling fresh traces until
    # ten thousand steps have been checked
    machine = Machine()
    checked_steps = 0
    trace_index = 0
    names = [n for n in corpus.DISCRETE if corpus.checked(n).mode == "p"]
    while checked_steps < 10_000:
        name = names[trace_index % len(names)]
        checked = corpus.checked(name)
        cfg = machine.config(checked.term, checked.ty)
        stream = substream(31337, trace_index)
        while not is_p_value(cfg.term):
            out = machine.step_prob(cfg, stream)
            assert infer("p", env_ctx(out.next.env), out.next.term) == checked.ty
            cfg = out.next
            checked_steps += 1
        trace_index += 1

    # parser round-trip over the full corpus
    for name in corpus.ALL:
        term = corpus.program(name)
        assert alpha_eq(parse(pretty(term)), term)
