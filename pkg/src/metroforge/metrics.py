"""Fisher information, parameter-shift signal derivatives and the sensing objective."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass

import numpy as np

from .circuit import ConcreteCircuit, Gate
from .noise import NoiseModel
from .simulator import ExactBackend, STAGES, run_circuit

log = logging.getLogger(__name__)

SHIFT = np.pi / 2
EXACT_FLOOR = 1e-12
EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class ObjectiveConfig:
    """``t_overhead=None`` derives the overhead from gate durations of each circuit."""

    t_overhead: float | None = None
    T_unit: float = 1.0
    epsilon_floor: float = EXACT_FLOOR

    def __post_init__(self):
        if self.t_overhead is not None and self.t_overhead < 0:
            raise ValueError("t_overhead must be non-negative")
        if self.T_unit <= 0:
            raise ValueError("T_unit must be positive")
        if not 0 < self.epsilon_floor <= 1e-6:
            raise ValueError("epsilon_floor must lie in (0, 1e-6]")

    def overhead_for(self, circuit: ConcreteCircuit, noise: NoiseModel) -> float:
        if self.t_overhead is not None:
            return self.t_overhead
        return circuit_overhead(circuit, noise.gate_durations)


@dataclass(frozen=True)
class ObjectiveReport:
    cfi_phi: float
    cfi_omega: float
    qfi_phi: float | None
    t: float
    t_overhead: float
    objective_value: float

    def to_dict(self) -> dict:
        return asdict(self)


def critical_path(gates: list[Gate], n_qubits: int, durations: dict) -> float:
    clock = np.zeros(n_qubits)
    for g in gates:
        start = max(clock[q] for q in g.qubits)
        for q in g.qubits:
            clock[q] = start + durations.get(g.kind, 0.0)
    return float(clock.max()) if n_qubits else 0.0


def circuit_overhead(circuit: ConcreteCircuit, durations: dict) -> float:
    """Encoder plus decoder critical-path time plus one measurement."""
    n = circuit.n_qubits
    return (
        critical_path(list(circuit.encoder), n, durations)
        + critical_path(list(circuit.decoder), n, durations)
        + durations.get("measure", 0.0)
    )


# ---------------------------------------------------------------------------
# derivatives


def shifted_signal_angles(phi: float, n: int) -> list[np.ndarray]:
    """Unshifted angles followed by (+pi/2, -pi/2) on each qubit in turn."""
    base = np.full(n, float(phi))
    out = [base]
    for i in range(n):
        for s in (SHIFT, -SHIFT):
            v = base.copy()
            v[i] += s
            out.append(v)
    return out


def _split_shifts(dists: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    plus = dists[1::2][:n]
    minus = dists[2::2][:n]
    return dists[0], 0.5 * (plus - minus).sum(axis=0)


def distribution_and_derivative(backend, circuit, phi, t, noise, seed=None):
    """P(x|phi) and dP(x)/dphi from 2N+1 backend evaluations."""
    n = circuit.n_qubits
    dists = backend.evaluate_batch(circuit, shifted_signal_angles(phi, n), t, noise, seed=seed)
    return _split_shifts(np.asarray(dists), n)


def signal_derivative_param_shift(backend, circuit, phi, t, noise, seed=None) -> np.ndarray:
    """dP(x)/dphi as the sum over qubits of half the +-pi/2 shifted differences."""
    return distribution_and_derivative(backend, circuit, phi, t, noise, seed)[1]


def classical_fisher(p: np.ndarray, dp: np.ndarray, floor: float = EXACT_FLOOR) -> float:
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    low = p < floor
    if np.any(low & (np.abs(dp) > np.sqrt(floor))):
        log.warning("outcomes %s have P below the floor but a large derivative", np.flatnonzero(low & (np.abs(dp) > np.sqrt(floor))))
    return float(np.sum(dp**2 / np.maximum(p, floor)))


def default_floor(backend) -> float:
    shots = getattr(backend, "shots", None)
    return EXACT_FLOOR if shots is None else 0.5 / shots


def cfi_phi(backend, circuit, phi, t, noise, seed=None, floor=None) -> float:
    p, dp = distribution_and_derivative(backend, circuit, phi, t, noise, seed)
    return classical_fisher(p, dp, default_floor(backend) if floor is None else floor)


def expected_cfi(backend, circuit, phis, weights, t, noise, seed=None, floor=None) -> float:
    """Weighted average of CFI(phi) over quadrature nodes, in one batched evaluation."""
    n = circuit.n_qubits
    phis = np.atleast_1d(np.asarray(phis, dtype=float))
    per = 2 * n + 1
    angles = [a for phi in phis for a in shifted_signal_angles(phi, n)]
    dists = np.asarray(backend.evaluate_batch(circuit, angles, t, noise, seed=seed))
    floor = default_floor(backend) if floor is None else floor
    vals = [classical_fisher(*_split_shifts(dists[j * per : (j + 1) * per], n), floor) for j in range(phis.size)]
    return float(np.dot(weights, vals))


# ---------------------------------------------------------------------------
# quantum Fisher information


def qfi_from_state(rho: np.ndarray, drho: np.ndarray, cutoff: float = EIG_CUTOFF) -> float:
    """SLD quantum Fisher information from a state and its derivative."""
    lam, vecs = np.linalg.eigh(rho)
    d = vecs.conj().T @ drho @ vecs
    s = lam[:, None] + lam[None, :]
    mask = s > cutoff
    return float(2 * np.sum(np.abs(d[mask]) ** 2 / s[mask]))


def state_and_derivative(circuit, phi, t, noise, echo=False, echo_pulses=1, ideal=()):
    """Final density matrix and its exact phi-derivative via the shift rule."""
    n = circuit.n_qubits
    angles = shifted_signal_angles(phi, n)
    states = [run_circuit(circuit, a, t, noise, echo, echo_pulses, ideal) for a in angles]
    drho = 0.5 * sum(states[1 + 2 * i] - states[2 + 2 * i] for i in range(n))
    return states[0], drho


def qfi_phi(circuit, phi, t, noise, echo=False, echo_pulses=1, ideal=()) -> float:
    rho, drho = state_and_derivative(circuit, phi, t, noise, echo, echo_pulses, ideal)
    return qfi_from_state(rho, drho)


# ---------------------------------------------------------------------------
# objective


def cfi_omega(cfi_phi_value: float, t: float) -> float:
    return t**2 * cfi_phi_value


def objective(cfi_phi_value: float, t: float, t_overhead: float, T_unit: float = 1.0) -> float:
    """Fisher information about the frequency per unit wall-clock time."""
    if t <= 0:
        raise ValueError("interrogation time must be positive")
    return cfi_omega(cfi_phi_value, t) / (t + t_overhead) * T_unit


def snr_bound(cfi_omega_value: float, repetitions: float = 1.0) -> float:
    """sqrt(M * CFI(omega)), the inverse of the Cramer-Rao standard deviation."""
    if repetitions < 1:
        raise ValueError("need at least one repetition")
    return float(np.sqrt(repetitions * cfi_omega_value))


def evaluate_report(
    circuit: ConcreteCircuit,
    omega: float,
    t: float,
    noise: NoiseModel,
    config: ObjectiveConfig = ObjectiveConfig(),
    backend=None,
    with_qfi: bool = True,
    seed=None,
) -> ObjectiveReport:
    backend = backend or ExactBackend()
    phi = omega * t
    c = cfi_phi(backend, circuit, phi, t, noise, seed=seed)
    q = qfi_phi(circuit, phi, t, noise, backend.echo, backend.echo_pulses) if with_qfi else None
    t_o = config.overhead_for(circuit, noise)
    return ObjectiveReport(c, cfi_omega(c, t), q, t, t_o, objective(c, t, t_o, config.T_unit))


# ---------------------------------------------------------------------------
# noise decomposition

DECOMPOSITION_STAGES = (
    ("full noise", ()),
    ("readout", ("readout",)),
    ("decoder", ("readout", "decoder")),
    ("interrogation", ("readout", "decoder", "interrogation")),
    ("encoder", STAGES),
)


def stage_qfi_decomposition(circuit, phi, t, noise, echo=False, echo_pulses=1) -> list[tuple[str, float]]:
    """Cumulative information as noise stages are made ideal, outermost first.

    The first entry is the CFI of the fully noisy readout distribution; each
    later entry is the QFI of the final state with the listed stages (and
    every earlier one) ideal.  Successive differences give the information
    lost to each stage.
    """
    backend = ExactBackend(echo, echo_pulses)
    out = [("full noise", cfi_phi(backend, circuit, phi, t, noise))]
    for label, ideal in DECOMPOSITION_STAGES[1:]:
        out.append((label, qfi_phi(circuit, phi, t, noise, echo, echo_pulses, ideal)))
    return out


def decomposition_regions(stages: list[tuple[str, float]]) -> list[tuple[str, float, float]]:
    """(stage, cumulative value, region size) rows; the first region is the value itself."""
    rows = []
    prev = 0.0
    for label, v in stages:
        rows.append((label, v, v - prev))
        prev = v
    return rows


__all__ = [
    "ObjectiveConfig",
    "ObjectiveReport",
    "circuit_overhead",
    "signal_derivative_param_shift",
    "distribution_and_derivative",
    "classical_fisher",
    "cfi_phi",
    "expected_cfi",
    "qfi_phi",
    "qfi_from_state",
    "objective",
    "cfi_omega",
    "snr_bound",
    "evaluate_report",
    "stage_qfi_decomposition",
    "decomposition_regions",
]
