"""Derivative-free optimization of circuit parameters and interrogation time.

Angles are periodic and are wrapped into [0, 2pi) rather than boxed.  The
interrogation time is searched in log space and clipped to ``t_bounds``.
All routines *minimize* internally and report maximized objectives.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import optimize as sopt

from .ansatz import ProposalExhausted, default_hyper_schedule, propose
from .circuit import CircuitStructure, ConnectivityGraph, Hyperparams, bind_parameters
from .metrics import ObjectiveConfig, classical_fisher, default_floor, distribution_and_derivative, objective
from .noise import NoiseModel
from .simulator import ExactBackend, seed_sequence

log = logging.getLogger(__name__)

TWO_PI = 2 * np.pi
OPTIMIZER_NAMES = ("powell", "nelder-mead")


@dataclass(frozen=True)
class OptimizerSettings:
    kind: str = "powell"
    max_evaluations: int = 4000
    x_tolerance: float = 1e-4
    f_tolerance: float = 1e-6
    t_bounds: tuple[float, float] = (0.1e-6, 1e-3)
    restarts: int = 1

    def __post_init__(self):
        if self.kind.lower() not in OPTIMIZER_NAMES:
            raise ValueError(f"unknown optimizer {self.kind!r}; choose from {OPTIMIZER_NAMES}")
        lo, hi = self.t_bounds
        if not 0 < lo < hi:
            raise ValueError(f"bad t_bounds {self.t_bounds}")
        if self.x_tolerance <= 0 or self.f_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_evaluations < 1 or self.restarts < 1:
            raise ValueError("max_evaluations and restarts must be positive")


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    nfev: int
    budget_exhausted: bool
    trace: list[float] = field(default_factory=list)


class _Budget(Exception):
    pass


class _Counted:
    """Wraps ``f``, tracks the incumbent and stops after ``budget`` calls."""

    def __init__(self, f, budget):
        self.f = f
        self.budget = budget
        self.nfev = 0
        self.best_x = None
        self.best_f = np.inf
        self.trace: list[float] = []

    def __call__(self, x):
        if self.nfev >= self.budget:
            raise _Budget
        self.nfev += 1
        v = float(self.f(np.asarray(x, dtype=float)))
        if not np.isfinite(v):
            v = np.inf
        if v < self.best_f:
            self.best_f, self.best_x = v, np.array(x, dtype=float)
        self.trace.append(self.best_f)
        return v


def _run(method, f, x0, settings: OptimizerSettings, bounds=None, options=None) -> MinimizeResult:
    wrapped = _Counted(f, settings.max_evaluations)
    try:
        sopt.minimize(
            wrapped,
            np.asarray(x0, dtype=float),
            method=method,
            bounds=bounds,
            options=dict(maxfev=settings.max_evaluations, **(options or {})),
        )
    except _Budget:
        pass
    exhausted = wrapped.nfev >= settings.max_evaluations
    return MinimizeResult(wrapped.best_x, wrapped.best_f, wrapped.nfev, exhausted, wrapped.trace)


def nelder_mead(f, x0, settings: OptimizerSettings = OptimizerSettings(kind="nelder-mead"), initial_step: float | None = None) -> MinimizeResult:
    """Simplex search with reflection 1, expansion 2, contraction 0.5, shrink 0.5."""
    x0 = np.asarray(x0, dtype=float)
    opts = dict(xatol=settings.x_tolerance, fatol=settings.f_tolerance, adaptive=False)
    if initial_step is not None:
        opts["initial_simplex"] = np.vstack([x0] + [x0 + initial_step * e for e in np.eye(x0.size)])
    return _run("Nelder-Mead", f, x0, settings, options=opts)


def powell(f, x0, settings: OptimizerSettings = OptimizerSettings(), bounds=None) -> MinimizeResult:
    """Direction-set search with bounded line minimizations."""
    opts = dict(xtol=settings.x_tolerance, ftol=settings.f_tolerance)
    return _run("Powell", f, x0, settings, bounds=bounds, options=opts)


OPTIMIZERS = {"powell": powell, "nelder-mead": nelder_mead}


def wrap_angles(theta: np.ndarray) -> np.ndarray:
    return np.mod(theta, TWO_PI)


# ---------------------------------------------------------------------------
# circuit objective


class CircuitObjective:
    """Maps (theta, t) of a structure to the per-time Fisher information."""

    def __init__(
        self,
        structure: CircuitStructure,
        noise: NoiseModel,
        omega: float,
        config: ObjectiveConfig = ObjectiveConfig(),
        backend=None,
        seed=None,
    ):
        self.structure = structure
        self.noise = noise
        self.omega = omega
        self.config = config
        self.backend = backend or ExactBackend()
        # sampled backends draw a fresh child seed per evaluation
        self._seeds = None if self.backend.shots is None else seed_sequence(seed)
        self.floor = config.epsilon_floor if self.backend.shots is None else default_floor(self.backend)
        # overhead depends only on the gate layout, not on the angles
        probe = bind_parameters(structure, np.zeros(structure.n_params))
        self.t_overhead = config.overhead_for(probe, noise)

    def cfi(self, theta, t) -> float:
        circuit = bind_parameters(self.structure, wrap_angles(theta))
        seed = None if self._seeds is None else self._seeds.spawn(1)[0]
        p, dp = distribution_and_derivative(self.backend, circuit, self.omega * t, t, self.noise, seed)
        return classical_fisher(p, dp, self.floor)

    def __call__(self, theta, t) -> float:
        return objective(self.cfi(theta, t), t, self.t_overhead, self.config.T_unit)


def initial_time(noise: NoiseModel, settings: OptimizerSettings, t0: float = 10e-6) -> float:
    """10 us, pulled into [T2/10, T2] when T2 is finite, then into ``t_bounds``."""
    if np.isfinite(noise.T2):
        t0 = min(max(t0, noise.T2 / 10), noise.T2)
    lo, hi = settings.t_bounds
    return float(np.clip(t0, lo, hi))


def optimize_continuous(
    objective_fn: Callable[[np.ndarray, float], float],
    n_params: int,
    settings: OptimizerSettings,
    seed,
    t0: float = 10e-6,
    optimize_t: bool = True,
    warm_start=None,
) -> tuple[np.ndarray, float, float, MinimizeResult]:
    """Maximize ``objective_fn(theta, t)`` from a uniform random start.

    Returns ``(theta, t, value, raw)`` where ``raw.trace`` holds the negated
    incumbent after each evaluation.  With ``restarts > 1`` independent
    starts are drawn from the same seed and the best one is kept.  Angle
    vectors in ``warm_start`` (one vector or a list) are tried first.
    """
    lo, hi = settings.t_bounds
    log_lo, log_hi = np.log(lo), np.log(hi)
    rng = np.random.default_rng(seed)
    t_fixed = float(np.clip(t0, lo, hi))

    def unpack(x):
        theta = wrap_angles(x[:n_params])
        t = float(np.exp(np.clip(x[n_params], log_lo, log_hi))) if optimize_t else t_fixed
        return theta, t

    def f(x):
        theta, t = unpack(x)
        return -objective_fn(theta, t)

    starts = [rng.uniform(0, TWO_PI, n_params) for _ in range(settings.restarts)]
    if warm_start is not None:
        warm = np.atleast_2d(np.asarray(warm_start, dtype=float))
        starts = [w for w in warm] + starts
    best = None
    for x0 in starts:
        if optimize_t:
            x0 = np.append(x0, np.log(t_fixed))
        if x0.size == 0:
            val = f(x0)
            res = MinimizeResult(x0, val, 1, False, [val])
        elif settings.kind.lower() == "powell":
            bounds = [(None, None)] * n_params + ([(log_lo, log_hi)] if optimize_t else [])
            res = powell(f, x0, settings, bounds=bounds)
        else:
            res = nelder_mead(f, x0, settings)
        if best is None or res.fun < best.fun:
            best = res
    theta, t = unpack(best.x)
    return theta, t, -best.fun, best


# ---------------------------------------------------------------------------
# outer loop


@dataclass
class ProposalRecord:
    iteration: int
    hyperparams: Hyperparams | None
    structure: CircuitStructure | None
    theta: np.ndarray | None
    t: float | None
    objective: float
    evaluations: int
    skipped: str | None = None

    def to_dict(self) -> dict:
        hp = self.hyperparams
        return {
            "iteration": self.iteration,
            "hyperparams": None if hp is None else {"l": hp.l, "k": hp.k, "m": hp.m},
            "structure": None if self.structure is None else self.structure.to_dict(),
            "theta": None if self.theta is None else [float(v) for v in self.theta],
            "t": self.t,
            "objective": self.objective,
            "evaluations": self.evaluations,
            "skipped": self.skipped,
        }


@dataclass
class SearchResult:
    best_structure: CircuitStructure | None
    best_theta: np.ndarray | None
    best_t: float | None
    best_objective: float
    evaluation_trace: list[tuple[int, float]]
    records: list[ProposalRecord]

    def to_dict(self) -> dict:
        return {
            "best_structure": None if self.best_structure is None else self.best_structure.to_dict(),
            "best_theta": None if self.best_theta is None else [float(v) for v in self.best_theta],
            "best_t": self.best_t,
            "best_objective": self.best_objective,
            "evaluation_trace": [[i, v] for i, v in self.evaluation_trace],
            "records": [r.to_dict() for r in self.records],
        }


def max_workers() -> int:
    env = os.environ.get("METROFORGE_THREADS")
    cap = int(env) if env else 1
    return max(1, min(cap, os.cpu_count() or 1))


def _one_iteration(args) -> ProposalRecord:
    i, n, graph, hyper, seq, make_objective, settings, t0, optimize_t = args
    s_prop, s_opt = seq.spawn(2)
    try:
        structure = propose(n, graph, hyper, s_prop)
    except ProposalExhausted as exc:
        return ProposalRecord(i, hyper, None, None, None, -np.inf, 0, skipped=str(exc))
    fn = make_objective(structure)
    theta, t, val, raw = optimize_continuous(fn, structure.n_params, settings, s_opt, t0=t0, optimize_t=optimize_t)
    return ProposalRecord(i, hyper, structure, theta, t, val, raw.nfev)


def outer_loop(
    n: int,
    graph: ConnectivityGraph,
    hyper_schedule: Sequence[Hyperparams] | None,
    iter_max: int,
    make_objective: Callable[[CircuitStructure], Callable],
    settings: OptimizerSettings,
    seed,
    t0: float = 10e-6,
    workers: int | None = None,
    optimize_t: bool = True,
) -> SearchResult:
    """Propose a structure and optimize it, ``iter_max`` times; keep the best.

    ``make_objective(structure)`` returns the ``(theta, t) -> value`` callable.
    Each iteration draws its hyperparameters from ``hyper_schedule`` (cycled
    in order) and gets its own child seed, so iterations are independent.
    Ties keep the lowest iteration index.  With ``optimize_t=False`` the
    time stays at ``t0``.
    """
    if iter_max < 1:
        raise ValueError("iter_max must be at least 1")
    schedule = list(hyper_schedule or default_hyper_schedule(n, graph))
    seqs = np.random.SeedSequence(seed).spawn(iter_max)
    jobs = [
        (i, n, graph, schedule[i % len(schedule)], seqs[i], make_objective, settings, t0, optimize_t)
        for i in range(iter_max)
    ]
    workers = workers or max_workers()
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            records = list(ex.map(_one_iteration, jobs))
    else:
        records = [_one_iteration(j) for j in jobs]

    best = None
    trace = []
    for r in records:
        if r.skipped:
            log.info("iteration %d skipped: %s", r.iteration, r.skipped)
        elif best is None or r.objective > best.objective:
            best = r
        trace.append((r.iteration, -np.inf if best is None else best.objective))
    if best is None:
        return SearchResult(None, None, None, -np.inf, trace, records)
    return SearchResult(best.structure, best.theta, best.t, best.objective, trace, records)


def circuit_objective_factory(noise: NoiseModel, omega: float, config: ObjectiveConfig = ObjectiveConfig(), backend=None, seed=None):
    """``make_objective`` for :func:`outer_loop` built on :class:`CircuitObjective`."""
    return _Factory(noise, omega, config, backend, seed)


@dataclass
class _Factory:
    noise: NoiseModel
    omega: float
    config: ObjectiveConfig
    backend: object = None
    seed: object = None

    def __call__(self, structure):
        return CircuitObjective(structure, self.noise, self.omega, self.config, self.backend, self.seed)
