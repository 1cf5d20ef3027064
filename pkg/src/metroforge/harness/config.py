"""Experiment configuration: TOML loading, validation and hashing."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from ..circuit import ConnectivityGraph, Hyperparams, SignalSpec
from ..metrics import ObjectiveConfig
from ..noise import NoiseError, NoiseModel
from ..optimize import OptimizerSettings

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MAX_QUBITS = 8


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SignalDistribution:
    """Prior over the accumulated angle.

    ``kind`` picks the actual distribution.  Gaussian widths in ``stddevs`` are
    swept in order; the flat reference prior always spans ``uniform_range``.
    """

    kind: str = "gaussian"
    mean: float = 1.0
    stddevs: tuple[float, ...] = (0.1, 0.3, 0.6, 1.0)
    nodes: int = 9
    uniform_nodes: int = 16
    uniform_range: tuple[float, float] = (0.0, 2 * np.pi)
    t: float = 20e-6

    def __post_init__(self):
        lo, hi = self.uniform_range
        if not hi > lo:
            raise ConfigError("uniform range must have positive width")
        if self.kind not in ("gaussian", "uniform"):
            raise ConfigError(f"unknown distribution kind {self.kind!r}")
        if any(s <= 0 for s in self.stddevs):
            raise ConfigError("gaussian stddev must be positive")
        if self.nodes < 1 or self.uniform_nodes < 1:
            raise ConfigError("quadrature needs at least one node")
        if self.t <= 0:
            raise ConfigError("interrogation time must be positive")


def gaussian_nodes(mean: float, std: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes and weights for an expectation under N(mean, std^2)."""
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return mean + std * x, w / w.sum()


def uniform_nodes(n: int, low: float = 0.0, high: float = 2 * np.pi) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature for a flat distribution on [low, high).

    A full period uses equally spaced nodes, exact for trig polynomials below
    degree n; other ranges use Gauss-Legendre.
    """
    if np.isclose(high - low, 2 * np.pi):
        return low + 2 * np.pi * np.arange(n) / n, np.full(n, 1.0 / n)
    x, w = np.polynomial.legendre.leggauss(n)
    return low + (high - low) * (x + 1) / 2, w / w.sum()


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    seed: int | None = None
    qubits: tuple[int, ...] = (1, 2, 3)
    shots: int | None = None
    noise: NoiseModel = field(default_factory=NoiseModel.ibm_average)
    graph: str = "chain"
    signal: SignalSpec = SignalSpec(omega=1e4)
    objective: ObjectiveConfig = ObjectiveConfig()
    optimizer: OptimizerSettings = OptimizerSettings()
    iter_max: int = 30
    hyper_schedule: tuple[Hyperparams, ...] | None = None
    t_grid: tuple[float, float, int] = (0.1e-6, 1e-3, 400)
    decomposition_t: float = 20e-6
    decomposition_circuits: tuple[str, ...] = ("parallel-ramsey", "ghz-h", "ghz-inv")
    distribution: SignalDistribution | None = None

    def __post_init__(self):
        if any(not 1 <= n <= MAX_QUBITS for n in self.qubits):
            raise ConfigError(f"qubit counts must lie in [1, {MAX_QUBITS}]")
        if self.graph not in ("chain", "complete"):
            raise ConfigError(f"graph must be 'chain' or 'complete', got {self.graph!r}")
        if self.iter_max < 1:
            raise ConfigError("iter_max must be at least 1")
        lo, hi, pts = self.t_grid
        if not (0 < lo < hi and pts >= 1):
            raise ConfigError(f"bad t grid {self.t_grid}")
        if self.shots is not None and self.shots < 1:
            raise ConfigError("shots must be positive")

    def graph_for(self, n: int) -> ConnectivityGraph:
        return ConnectivityGraph.chain(n) if self.graph == "chain" else ConnectivityGraph.complete(n)

    def t_values(self) -> np.ndarray:
        lo, hi, pts = self.t_grid
        return np.geomspace(lo, hi, int(pts))

    def to_dict(self) -> dict:
        noise = self.noise.to_dict()
        for key in ("T1", "T2"):
            if np.isinf(noise[key]):
                noise[key] = None
        d = {
            "experiment": {"name": self.name, "seed": self.seed, "qubits": list(self.qubits), "shots": self.shots},
            "noise": noise,
            "graph": {"kind": self.graph},
            "signal": {"omega": self.signal.omega, "echo": self.signal.echo, "echo_pulses": self.signal.echo_pulses},
            "objective": {"t_overhead": self.objective.t_overhead, "T_unit": self.objective.T_unit, "epsilon_floor": self.objective.epsilon_floor},
            "optimizer": {
                "kind": self.optimizer.kind,
                "max_evaluations": self.optimizer.max_evaluations,
                "x_tolerance": self.optimizer.x_tolerance,
                "f_tolerance": self.optimizer.f_tolerance,
                "t_bounds": list(self.optimizer.t_bounds),
                "restarts": self.optimizer.restarts,
            },
            "search": {
                "iter_max": self.iter_max,
                "hyper_schedule": None if self.hyper_schedule is None else [[h.l, h.k, h.m] for h in self.hyper_schedule],
            },
            "sweep": {"t_min": self.t_grid[0], "t_max": self.t_grid[1], "points": self.t_grid[2]},
            "decomposition": {"t": self.decomposition_t, "circuits": list(self.decomposition_circuits)},
            "distribution": None,
        }
        if self.distribution is not None:
            dist = self.distribution
            d["distribution"] = {
                "kind": dist.kind,
                "mean": dist.mean,
                "stddevs": list(dist.stddevs),
                "nodes": dist.nodes,
                "uniform_nodes": dist.uniform_nodes,
                "uniform_range": list(dist.uniform_range),
                "t": dist.t,
            }
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()

    def with_noise(self, noise: NoiseModel) -> "ExperimentConfig":
        return replace(self, noise=noise)


def _drop_none(d: dict) -> dict:
    return {k: v for k, v in d.items() if v is not None}


def config_from_dict(d: dict) -> ExperimentConfig:
    """Build a config from the nested TOML/JSON layout; missing keys take defaults."""
    try:
        exp = d.get("experiment", {}) or {}
        noise_d = dict(d.get("noise", {}) or {})
        for key in ("T1", "T2"):
            if key in noise_d and noise_d[key] is None:
                noise_d[key] = float("inf")
        noise = NoiseModel.from_dict(noise_d) if noise_d else NoiseModel.ibm_average()
        sig = d.get("signal", {}) or {}
        obj = _drop_none(d.get("objective", {}) or {})
        opt = dict(_drop_none(d.get("optimizer", {}) or {}))
        if "t_bounds" in opt:
            opt["t_bounds"] = tuple(opt["t_bounds"])
        search = d.get("search", {}) or {}
        sched = search.get("hyper_schedule")
        sweep = d.get("sweep", {}) or {}
        dec = d.get("decomposition", {}) or {}
        dist = d.get("distribution")
        kwargs = dict(
            name=exp.get("name", "experiment"),
            seed=exp.get("seed"),
            qubits=tuple(exp.get("qubits", (1, 2, 3))),
            shots=exp.get("shots"),
            noise=noise,
            graph=(d.get("graph", {}) or {}).get("kind", "chain"),
            signal=SignalSpec(
                omega=float(sig.get("omega", 1e4)),
                echo=bool(sig.get("echo", False)),
                echo_pulses=int(sig.get("echo_pulses", 1)),
            ),
            objective=ObjectiveConfig(**obj),
            optimizer=OptimizerSettings(**opt),
            iter_max=int(search.get("iter_max", 30)),
            hyper_schedule=None if sched is None else tuple(Hyperparams(*map(int, h)) for h in sched),
            t_grid=(float(sweep.get("t_min", 0.1e-6)), float(sweep.get("t_max", 1e-3)), int(sweep.get("points", 400))),
            decomposition_t=float(dec.get("t", 20e-6)),
            decomposition_circuits=tuple(dec.get("circuits", ("parallel-ramsey", "ghz-h", "ghz-inv"))),
        )
        if dist:
            dist = dict(dist)
            for key in ("stddevs", "uniform_range"):
                if key in dist:
                    dist[key] = tuple(dist[key])
            kwargs["distribution"] = SignalDistribution(**dist)
        return ExperimentConfig(**kwargs)
    except ConfigError:
        raise
    except (NoiseError, ValueError, TypeError, KeyError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_dict(data)


def preset_names() -> list[str]:
    return sorted(p.name[:-5] for p in resources.files("metroforge.presets").iterdir() if p.name.endswith(".toml"))


def load_preset(name: str) -> ExperimentConfig:
    res = resources.files("metroforge.presets") / f"{name}.toml"
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return config_from_dict(tomllib.loads(res.read_text()))
