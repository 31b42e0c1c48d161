"""Shared helpers: random measurable types and points, a measure
comparison with a readable diff, and a summary line per acceptance
criterion at the end of a run."""

from __future__ import annotations

import numpy as np
import pytest

from sfpc.dist import (
    Tagged,
    UNIT_POINT,
    bern,
    density,
    dirac,
    finite_support,
    gauss,
    render_point,
)
from sfpc.machine import Machine
from sfpc.measures import WeightedMeasure, measures_close
from sfpc.syntax import BOOL, REAL, UNIT, DensTy, ProbTy, ProdTy, SumTy, Ty


@pytest.fixture
def machine() -> Machine:
    return Machine()


def random_measurable_ty(rng: np.random.Generator, depth: int = 3) -> Ty:
    kinds = ["real", "unit", "prob", "dens"]
    if depth > 0:
        kinds += ["prod", "sum", "sum", "prod"]
    kind = kinds[rng.integers(len(kinds))]
    if kind == "real":
        return REAL
    if kind == "unit":
        return UNIT
    if kind == "prob":
        return ProbTy(random_measurable_ty(rng, 0))
    if kind == "dens":
        return DensTy(REAL)
    if kind == "prod":
        return ProdTy(
            random_measurable_ty(rng, depth - 1), random_measurable_ty(rng, depth - 1)
        )
    # one-arm sums are legal in the abstract syntax but have no surface
    # form, so the generator sticks to the expressible ones
    arms = tuple(
        random_measurable_ty(rng, depth - 1) for _ in range(int(rng.integers(2, 4)))
    )
    return SumTy(arms)


def random_point(rng: np.random.Generator, ty: Ty):
    if ty == REAL:
        return float(np.round(rng.normal(), 6))
    if ty == UNIT:
        return UNIT_POINT
    if isinstance(ty, ProbTy):
        if ty.inner == REAL and rng.random() < 0.5:
            return gauss(float(rng.normal()), 1.0 + float(rng.random()))
        if ty.inner == BOOL and rng.random() < 0.5:
            return bern(float(rng.random()))
        if rng.random() < 0.5:
            return dirac(random_point(rng, ty.inner), ty.inner)
        return finite_support(
            [(0.5, random_point(rng, ty.inner)), (0.5, random_point(rng, ty.inner))],
            ty.inner,
        )
    if isinstance(ty, DensTy):
        return density("gauss", float(rng.normal()), 1.0 + float(rng.random()))
    if isinstance(ty, ProdTy):
        return (random_point(rng, ty.left), random_point(rng, ty.right))
    if isinstance(ty, SumTy):
        tag = int(rng.integers(len(ty.arms)))
        return Tagged(tag, random_point(rng, ty.arms[tag]))
    raise AssertionError(ty)


def assert_measures_equal(a: WeightedMeasure, b: WeightedMeasure, tol: float = 1e-12):
    __tracebackhide__ = True
    if not measures_close(a, b, tol):
        fmt = lambda m: [
            (p, s, render_point(v, m.over)) for p, s, v in m.merged().entries
        ]
        pytest.fail(f"measures differ:\n  left:  {fmt(a)}\n  right: {fmt(b)}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, ()):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                number = nodeid.split("test_criterion_")[1].split("[")[0]
                label = "PASS" if outcome == "passed" else "FAIL"
                lines.append((int(number.split("_")[0]), number, label))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, number, label in sorted(lines):
            terminalreporter.write_line(f"criterion {number.replace('_', ' ')}: {label}")
