"""Normalization backends: exact enumeration, deterministic quadrature,
and Monte Carlo.

Exact: enumerate the program's (weight, value) outcomes with the machine
and normalize; available whenever every reachable sample site has
countable support. Never reports infinite evidence (finite sums are
finite); its zero-evidence verdict is definitive.

Quadrature (see quad.py): continuous sites become truncated equal-mass
grids with adaptive cell refinement; evidence divergence across
truncation doublings reports infinite evidence.

Monte Carlo: average the weights of independent traces. Evidence is the
mean weight with a reported standard error; the posterior is the weighted
empirical ensemble of results. All weights zero reports zero evidence
(best effort, flagged by construction since sampling cannot prove a zero
integral); infinite evidence is never claimed. Nested normalization
recurses into the same backend with a seed derived from the normalization
site, making the result a deterministic function of (program, seed,
trials) and letting sites reached many times be normalized once.

Trace streams are chunked with a fixed chunk size and a per-chunk derived
generator, so results are identical no matter how chunks are scheduled.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .direct import DirectEvaluator, norm_site_key
from .dist import Empirical
from .errors import NormDepthExceeded
from .machine import Config, Machine, env_lookup
from .measures import NormResult, Success, ZeroEvidence
from .prims import DEFAULT_REGISTRY, PrimRegistry
from .printer import pretty
from .quad import QuadConfig, normalize_quadrature, quad_normalizer
from .rng import substream
from .syntax import Norm, free_vars
from .typecheck import CheckedProgram, check_program

__all__ = [
    "McConfig",
    "QuadConfig",
    "normalize_exact",
    "normalize_quadrature",
    "normalize_mc",
    "mc_evaluator",
    "machine_nu_exact",
    "machine_nu_quad",
    "machine_nu_mc",
]


@dataclass(frozen=True)
class McConfig:
    trials: int = 100_000
    seed: int = 0
    max_depth: int = 8
    engine: str = "direct"  # or "machine"
    jobs: int = 1
    chunk: int = 1024

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("Monte Carlo needs trials >= 1")


def _as_checked(prog, registry: PrimRegistry) -> CheckedProgram:
    checked = prog if isinstance(prog, CheckedProgram) else check_program(prog, registry)
    if checked.mode != "p":
        raise ValueError("normalization expects a probabilistic term")
    return checked


# ---------------------------------------------------------------------------
# Exact


def normalize_exact(
    prog, registry: PrimRegistry = DEFAULT_REGISTRY, machine: Machine | None = None
) -> NormResult:
    checked = _as_checked(prog, registry)
    machine = machine or Machine(registry)
    return machine.nu_exact(machine.config(checked.term, checked.ty))


# ---------------------------------------------------------------------------
# Monte Carlo


def normalize_mc(
    prog, mcfg: McConfig = McConfig(), registry: PrimRegistry = DEFAULT_REGISTRY
) -> NormResult:
    checked = _as_checked(prog, registry)
    if mcfg.engine == "machine":
        weights, values = _machine_traces(checked, mcfg, registry)
    else:
        weights, values = _direct_traces(checked, mcfg)
    return _mc_result(weights, values, checked.ty, mcfg.trials)


def _mc_result(weights, values, over, trials: int) -> NormResult:
    w = np.asarray(weights, dtype=np.float64)
    evidence = float(w.mean())
    if evidence == 0.0:
        return ZeroEvidence()
    stderr = float(w.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    posterior = Empirical(
        [(wi, vi) for wi, vi in zip(weights, values) if wi > 0.0], over
    )
    return Success(evidence, posterior, stderr)


def _chunks(trials: int, chunk: int):
    for index, start in enumerate(range(0, trials, chunk)):
        yield index, min(chunk, trials - start)


def mc_evaluator(mcfg: McConfig) -> DirectEvaluator:
    """Big-step evaluator whose normalization sites run Monte Carlo with a
    site-derived seed, computed once per distinct site."""
    memo: dict[str, NormResult] = {}
    depth = [0]

    def handler(evaluator: DirectEvaluator, norm: Norm, env: dict) -> NormResult:
        key = norm_site_key(norm, env)
        if key in memo:
            return memo[key]
        if depth[0] >= mcfg.max_depth:
            raise NormDepthExceeded(f"norm nesting deeper than {mcfg.max_depth}")
        depth[0] += 1
        try:
            weights, values = [], []
            for index, size in _chunks(mcfg.trials, mcfg.chunk):
                rng = substream(mcfg.seed, "norm", key, index)
                for _ in range(size):
                    w, v = evaluator.trace(norm.body, env, rng)
                    weights.append(w)
                    values.append(v)
            result = _mc_result(weights, values, norm._over, mcfg.trials)
        finally:
            depth[0] -= 1
        memo[key] = result
        return result

    return DirectEvaluator(norm_handler=handler)


def _direct_traces(checked: CheckedProgram, mcfg: McConfig):
    if mcfg.jobs > 1:
        return _direct_traces_parallel(checked, mcfg)
    evaluator = mc_evaluator(mcfg)
    weights: list[float] = []
    values: list = []
    for index, size in _chunks(mcfg.trials, mcfg.chunk):
        rng = substream(mcfg.seed, "mc", index)
        for _ in range(size):
            w, v = evaluator.trace(checked.term, {}, rng)
            weights.append(w)
            values.append(v)
    return weights, values


def _mc_worker(args):
    src, seed, index, size, trials, max_depth, chunk = args
    from .parser import parse

    # nested normalization sites still run the full trial count
    mcfg = McConfig(trials=trials, seed=seed, max_depth=max_depth, chunk=chunk)
    checked = check_program(parse(src))
    evaluator = mc_evaluator(mcfg)
    rng = substream(seed, "mc", index)
    out = []
    for _ in range(size):
        out.append(evaluator.trace(checked.term, {}, rng))
    return index, out


def _direct_traces_parallel(checked: CheckedProgram, mcfg: McConfig):
    src = pretty(checked.term)
    tasks = [
        (src, mcfg.seed, index, size, mcfg.trials, mcfg.max_depth, mcfg.chunk)
        for index, size in _chunks(mcfg.trials, mcfg.chunk)
    ]
    results: dict[int, list] = {}
    with ProcessPoolExecutor(max_workers=mcfg.jobs) as pool:
        for index, out in pool.map(_mc_worker, tasks):
            results[index] = out
    weights: list[float] = []
    values: list = []
    for index in sorted(results):
        for w, v in results[index]:
            weights.append(w)
            values.append(v)
    return weights, values


def _machine_traces(checked: CheckedProgram, mcfg: McConfig, registry: PrimRegistry):
    machine = Machine(registry, nu=machine_nu_mc(mcfg))
    cfg = machine.config(checked.term, checked.ty)
    weights: list[float] = []
    values: list = []
    for index, size in _chunks(mcfg.trials, mcfg.chunk):
        rng = substream(mcfg.seed, "mc", index)
        for _ in range(size):
            r = machine.eval_prob(cfg, rng)
            weights.append(r.weight)
            values.append(r.point())
    return weights, values


# ---------------------------------------------------------------------------
# Normalizers for Machine instances. A machine environment holds only
# ground slots, so a configuration converts directly to an evaluator
# environment.


def machine_nu_exact():
    return None  # Machine defaults to its own exact normalizer


def machine_nu_quad(qcfg: QuadConfig = QuadConfig()):
    handler = quad_normalizer(qcfg)

    def nu(machine: Machine, config: Config) -> NormResult:
        node = Norm(config.term, _over=config.ty)
        return handler(None, node, dict(config.env))

    return nu


def machine_nu_mc(mcfg: McConfig = McConfig()):
    memo: dict[str, NormResult] = {}
    depth = [0]

    def nu(machine: Machine, config: Config) -> NormResult:
        key = _machine_norm_key(config)
        if key in memo:
            return memo[key]
        if depth[0] >= mcfg.max_depth:
            raise NormDepthExceeded(f"norm nesting deeper than {mcfg.max_depth}")
        depth[0] += 1
        try:
            weights, values = [], []
            for index, size in _chunks(mcfg.trials, mcfg.chunk):
                rng = substream(mcfg.seed, "norm", key, index)
                for _ in range(size):
                    r = machine.eval_prob(config, rng)
                    weights.append(r.weight)
                    values.append(r.point())
            result = _mc_result(weights, values, config.ty, mcfg.trials)
        finally:
            depth[0] -= 1
        memo[key] = result
        return result

    return nu


def _machine_norm_key(config: Config) -> str:
    from .direct import describe_value

    names = sorted(free_vars(config.term))
    bound = ",".join(f"{n}={describe_value(env_lookup(config.env, n))}" for n in names)
    return f"{pretty(config.term)}|{bound}"
