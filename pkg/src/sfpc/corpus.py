"""The bundled program corpus (src/sfpc/programs/*.sfpc).

DISCRETE programs have countable branching only, so the exact enumerator
and the compositional semantics both apply to them. CONTINUOUS programs
draw from densities and are exercised by the quadrature and Monte Carlo
backends.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .parser import SourceProgram, parse
from .typecheck import CheckedProgram, check_program

DISCRETE: tuple[str, ...] = (
    "two_point_posterior",
    "two_point_likelihood",
    "return_unit",
    "score_chain",
    "coin_pair",
    "coin_merge",
    "resample_two_point",
    "hard_reject",
    "tagged_choice",
    "pair_projection",
    "arithmetic",
    "unit_equality",
    "apply_lambda",
    "force_thunk",
    "reified_sampler",
    "expectation_combinator",
    "evidence_of_dirac",
    "three_coins",
    "score_by_case",
    "let_assoc",
    "case_sum_reals",
    "sample_dirac",
    "sample_dirac_pair",
    "double_norm",
    "density_eval",
)

CONTINUOUS: tuple[str, ...] = (
    "gaussian_conditioning",
    "gaussian_conditioning_norm",
    "exp_score_diverges",
    "beta_bernoulli_lhs",
    "beta_bernoulli_rhs",
    "gauss_positive",
    "importance_direct",
    "importance_weighted",
    "smc_resample_continuous",
    "uniform_mean",
)

ALL: tuple[str, ...] = DISCRETE + CONTINUOUS


def source(name: str) -> str:
    return resources.files("sfpc").joinpath(f"programs/{name}.sfpc").read_text("utf-8")


@lru_cache(maxsize=None)
def checked(name: str) -> CheckedProgram:
    return check_program(parse(SourceProgram(source(name), f"{name}.sfpc")))


def program(name: str):
    return checked(name).term
