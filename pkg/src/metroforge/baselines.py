"""Reference protocols: parallel Ramsey and the two GHZ decoders."""

from __future__ import annotations

from enum import Enum

import numpy as np

from .circuit import CNOT, H, CircuitStructure, ConcreteCircuit, bind_parameters
from .metrics import ObjectiveConfig, cfi_phi, objective
from .noise import NoiseModel
from .simulator import ExactBackend


class BaselineKind(str, Enum):
    PARALLEL_RAMSEY = "parallel-ramsey"
    GHZ_H = "ghz-h"
    GHZ_INV = "ghz-inv"

    @classmethod
    def parse(cls, s) -> "BaselineKind":
        if isinstance(s, cls):
            return s
        key = str(s).lower().replace("_", "-")
        aliases = {"ramsey": "parallel-ramsey", "parallelramsey": "parallel-ramsey", "ghzh": "ghz-h", "ghzinv": "ghz-inv"}
        return cls(aliases.get(key, key))


def baseline_structure(kind, n: int) -> CircuitStructure:
    """Parameter-free structure of a baseline; layers are single gates."""
    kind = BaselineKind.parse(kind)
    if n < 1:
        raise ValueError("need at least one qubit")
    chain = [CNOT(i, i + 1) for i in range(n - 1)]
    if kind is BaselineKind.PARALLEL_RAMSEY:
        enc = [H(q) for q in range(n)]
        dec = [H(q) for q in range(n)]
    elif kind is BaselineKind.GHZ_H:
        enc = [H(0), *chain]
        dec = [H(q) for q in range(n)]
    else:
        enc = [H(0), *chain]
        dec = [*reversed(chain), H(0)]
    return CircuitStructure(n, [[g] for g in enc], [[g] for g in dec], n_params=0)


def build_baseline(kind, n: int) -> ConcreteCircuit:
    return bind_parameters(baseline_structure(kind, n), np.zeros(0))


def default_t_grid(t_min: float = 0.1e-6, t_max: float = 1e-3, points: int = 400) -> np.ndarray:
    return np.geomspace(t_min, t_max, points)


def baseline_t_sweep(
    kind,
    n: int,
    noise: NoiseModel,
    t_grid,
    omega: float,
    config: ObjectiveConfig = ObjectiveConfig(),
    backend=None,
) -> tuple[float, float]:
    """Best (t, objective) over ``t_grid``; ties go to the smaller t."""
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("empty t grid")
    backend = backend or ExactBackend()
    circuit = build_baseline(kind, n)
    t_o = config.overhead_for(circuit, noise)
    best_t, best_val = None, -np.inf
    for t in np.sort(t_grid):
        val = objective(cfi_phi(backend, circuit, omega * t, t, noise), t, t_o, config.T_unit)
        if val > best_val:
            best_t, best_val = float(t), val
    return best_t, float(best_val)
