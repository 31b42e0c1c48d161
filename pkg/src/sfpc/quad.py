"""Deterministic quadrature over continuous sample sites.

Each continuous site is truncated to a range stated in prior standard
deviations and covered by an equal-prior-mass grid of n cells, each
represented by its mass midpoint (bounded-support families use their full
support). Cells of a let-bound sample additionally refine adaptively: a
cell splits when the two half-cell continuations disagree in discrete
shape with the whole-cell continuation, which pins down case/comparison
boundaries to a 2^-depth fraction of a cell. Everything is deterministic.

Evidence is recomputed while doubling the truncation range; failing the
relative Cauchy test across doublings reports infinite evidence. The
truncated grid is a sub-probability measure; normalization scales this
out of the posterior, and evidence approaches the true value as the
captured prior mass does 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

from .dist import (
    DistValue,
    Parametric,
    Tagged,
    UNIT_POINT,
    enumerate_dist,
    finite_support,
)
from .direct import DirectEvaluator, LamClosure, ThunkClosure
from .errors import NormDepthExceeded, TooManyContinuousSites
from .measures import InfiniteEvidence, NormResult, Success, ZeroEvidence
from .prims import DEFAULT_REGISTRY, PrimRegistry
from .syntax import (
    CaseP,
    Force,
    Let,
    Norm,
    Return,
    Sample,
    Score,
    Term,
)
from .typecheck import CheckedProgram, check_program


@dataclass(frozen=True)
class QuadConfig:
    nodes: int = 512
    radius: float = 8.0  # in prior standard deviations per site
    doublings: int = 3
    eps: float = 1e-3  # relative Cauchy tolerance on evidence
    max_sites: int = 3  # continuous sites per trace
    max_depth: int = 8  # nested normalization
    refine_depth: int = 10  # adaptive cell splitting at shape boundaries

    def __post_init__(self) -> None:
        if self.nodes < 2 or self.doublings < 1:
            raise ValueError("quadrature needs nodes >= 2 and doublings >= 1")


# -- family geometry ---------------------------------------------------------


def _site_bounds(d: Parametric, radius: float) -> tuple[float, float]:
    kind, params = d.kind, d.params
    if kind == "gauss":
        mu, sigma = params
        return mu - radius * sigma, mu + radius * sigma
    if kind == "expdist":
        mean = 1.0 / params[0]
        return 0.0, mean + radius * mean
    if kind == "uniform":
        return params[0], params[1]
    if kind == "beta":
        return 0.0, 1.0
    raise AssertionError(f"no quadrature support for family {kind}")


def _site_cdf(d: Parametric, x: float) -> float:
    kind, params = d.kind, d.params
    if kind == "gauss":
        return NormalDist(params[0], params[1]).cdf(x)
    if kind == "expdist":
        return 0.0 if x <= 0.0 else 1.0 - math.exp(-params[0] * x)
    if kind == "uniform":
        a, b = params
        return min(1.0, max(0.0, (x - a) / (b - a)))
    if kind == "beta":
        from scipy.special import betainc

        return float(betainc(params[0], params[1], min(1.0, max(0.0, x))))
    raise AssertionError(kind)


def _site_quantile(d: Parametric, u: float) -> float:
    kind, params = d.kind, d.params
    if kind == "gauss":
        # clamp away from 0/1: wide truncation ranges underflow the cdf
        u = min(max(u, 1e-300), 1.0 - 2.0**-53)
        return NormalDist(params[0], params[1]).inv_cdf(u)
    if kind == "expdist":
        u = min(max(u, 0.0), 1.0 - 2.0**-53)
        return -math.log1p(-u) / params[0]
    if kind == "uniform":
        a, b = params
        return a + u * (b - a)
    if kind == "beta":
        from scipy.special import betaincinv

        return float(betaincinv(params[0], params[1], u))
    raise AssertionError(kind)


def grid_atoms(d: Parametric, nodes: int, radius: float) -> list[tuple[float, float]]:
    """(prior mass, node) pairs of the truncated equal-mass midpoint grid."""
    lo, hi = _site_bounds(d, radius)
    ulo, uhi = _site_cdf(d, lo), _site_cdf(d, hi)
    if not uhi > ulo:
        raise ValueError(f"degenerate quadrature range for {d!r}")
    cell = (uhi - ulo) / nodes
    return [
        (cell, _site_quantile(d, ulo + (i + 0.5) * cell)) for i in range(nodes)
    ]


# -- signatures: the discrete shape of a continuation's outcomes -------------


def _shape(v) -> object:
    if isinstance(v, float):
        return "R"
    if isinstance(v, tuple):
        return tuple(_shape(p) for p in v)
    if isinstance(v, Tagged):
        return (v.tag, _shape(v.payload))
    if isinstance(v, DistValue):
        return type(v).__name__
    if isinstance(v, (LamClosure, ThunkClosure)):
        return "closure"
    return "density"


def _signature(atoms) -> tuple:
    return tuple(sorted(repr((_shape(v), s == 0.0)) for _, s, v, _ in atoms))


# -- the evaluator ------------------------------------------------------------

Atom = tuple  # (mass, weight, value, continuous_sites_used)


class _QuadRun:
    """One enumeration pass at a fixed truncation radius."""

    def __init__(self, qcfg: QuadConfig, radius: float, norm):
        self.qcfg = qcfg
        self.radius = radius
        self.det = DirectEvaluator(norm_handler=norm).det

    def prob(self, t: Term, env: dict, sites: int) -> list[Atom]:
        match t:
            case Return(body):
                return [(1.0, 1.0, self.det(body, env), sites)]
            case Let(var, bound, body):
                if isinstance(bound, Sample):
                    d = self.det(bound.body, env)
                    if enumerate_dist(d) is None:
                        return self._refinable_site(d, var, body, env, sites)
                out = []
                for m, w, a, s in self.prob(bound, env, sites):
                    env2 = {**env, var: a}
                    out.extend(
                        (m * m2, w * w2, b, s2)
                        for m2, w2, b, s2 in self.prob(body, env2, s)
                    )
                return out
            case CaseP(scrut, arms):
                sv = self.det(scrut, env)
                arm = arms[sv.tag]
                return self.prob(arm.body, {**env, arm.var: sv.payload}, sites)
            case Sample(body):
                d = self.det(body, env)
                assert isinstance(d, DistValue)
                atoms = enumerate_dist(d)
                if atoms is None:
                    sites = self._count_site(sites)
                    atoms = grid_atoms(d, self.qcfg.nodes, self.radius)
                return [(m, 1.0, v, sites) for m, v in atoms]
            case Score(body):
                s = self.det(body, env)
                return [(1.0, s if s > 0.0 else 0.0, UNIT_POINT, sites)]
            case Force(body):
                tv = self.det(body, env)
                assert isinstance(tv, ThunkClosure)
                return self.prob(tv.body, tv.env, sites)
        raise AssertionError(f"not a probabilistic term: {t!r}")

    def _count_site(self, sites: int) -> int:
        if sites + 1 > self.qcfg.max_sites:
            raise TooManyContinuousSites(
                f"more than {self.qcfg.max_sites} continuous sample sites on one trace"
            )
        return sites + 1

    def _refinable_site(
        self, d: Parametric, var: str, body: Term, env: dict, sites: int
    ) -> list[Atom]:
        sites = self._count_site(sites)
        lo, hi = _site_bounds(d, self.radius)
        ulo, uhi = _site_cdf(d, lo), _site_cdf(d, hi)
        if not uhi > ulo:
            raise ValueError(f"degenerate quadrature range for {d!r}")
        n = self.qcfg.nodes
        cell = (uhi - ulo) / n

        def continue_at(u: float) -> list[Atom]:
            point = _site_quantile(d, u)
            return self.prob(body, {**env, var: point}, sites)

        # Signatures at the n+1 cell edges locate shape changes exactly
        # (up to multiple crossings inside one cell); each flagged cell
        # bisects toward the crossing.
        edge_sigs = [
            _signature(continue_at(ulo + i * cell)) for i in range(n + 1)
        ]
        out: list[Atom] = []
        for i in range(n):
            a, b = ulo + i * cell, ulo + (i + 1) * cell
            out.extend(
                self._cell(
                    continue_at, a, b, edge_sigs[i], edge_sigs[i + 1],
                    self.qcfg.refine_depth,
                )
            )
        return out

    def _cell(self, continue_at, a, b, sig_a, sig_b, depth: int) -> list[Atom]:
        """Midpoint atom of the cell [a, b], bisected while the endpoint
        and midpoint continuation signatures disagree."""
        down = continue_at((a + b) / 2.0)
        sig_mid = _signature(down)
        if depth > 0 and not (sig_a == sig_mid == sig_b):
            mid = (a + b) / 2.0
            return self._cell(continue_at, a, mid, sig_a, sig_mid, depth - 1) + (
                self._cell(continue_at, mid, b, sig_mid, sig_b, depth - 1)
            )
        mass = b - a
        return [(mass * m, w, v, s) for m, w, v, s in down]


# -- normalization ------------------------------------------------------------


def _normalize_atoms(atoms: list[Atom], over) -> tuple[float, NormResult]:
    evidence = math.fsum(m * w for m, w, _, _ in atoms)
    if evidence == 0.0:
        return 0.0, ZeroEvidence()
    if not math.isfinite(evidence):
        return math.inf, InfiniteEvidence()
    posterior = finite_support(
        ((m * w / evidence, v) for m, w, v, _ in atoms), over
    )
    return evidence, Success(evidence, posterior)


def _quad_normalize(t: Term, env: dict, over, qcfg: QuadConfig, norm) -> NormResult:
    evidences: list[float] = []
    result: NormResult = ZeroEvidence()
    for i in range(qcfg.doublings + 1):
        radius = qcfg.radius * (2.0**i)
        atoms = _QuadRun(qcfg, radius, norm).prob(t, env, 0)
        z, result = _normalize_atoms(atoms, over)
        evidences.append(z)
    for za, zb in zip(evidences, evidences[1:]):
        if not math.isfinite(zb) or abs(zb - za) > qcfg.eps * abs(za):
            return InfiniteEvidence()
    return result


def quad_normalizer(qcfg: QuadConfig):
    """Handler for nested normalization sites (shared depth guard)."""
    depth = [0]

    def norm(evaluator, node: Norm, env: dict) -> NormResult:
        if node._over is None:
            raise ValueError("norm not typed; typecheck the program first")
        if depth[0] >= qcfg.max_depth:
            raise NormDepthExceeded(f"norm nesting deeper than {qcfg.max_depth}")
        depth[0] += 1
        try:
            return _quad_normalize(node.body, env, node._over, qcfg, norm)
        finally:
            depth[0] -= 1

    return norm


def normalize_quadrature(
    prog, qcfg: QuadConfig = QuadConfig(), registry: PrimRegistry = DEFAULT_REGISTRY
) -> NormResult:
    checked = prog if isinstance(prog, CheckedProgram) else check_program(prog, registry)
    if checked.mode != "p":
        raise ValueError("normalization expects a probabilistic term")
    return _quad_normalize(checked.term, {}, checked.ty, qcfg, quad_normalizer(qcfg))
