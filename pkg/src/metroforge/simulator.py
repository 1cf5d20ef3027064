"""Dense density-matrix simulation of noisy sensing circuits.

States are ``(2**n, 2**n)`` complex arrays; qubit 0 is the most significant
bit of a basis index.  The signal block rotates every qubit by Rz(phi_i)
and then applies interrogation decoherence; since both damping and
dephasing commute with Rz, one rotation followed by one channel is exact.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .circuit import ConcreteCircuit, Gate, gate_unitary
from .noise import KrausChannel, NoiseModel, interrogation_factors, readout_confusion

STAGES = ("encoder", "interrogation", "decoder", "readout")


class SimulationError(ValueError):
    pass


class IndexOutOfRange(SimulationError):
    pass


def zero_state(n: int) -> np.ndarray:
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def n_qubits_of(rho: np.ndarray) -> int:
    n = int(round(np.log2(rho.shape[-1])))
    if 2**n != rho.shape[-1] or rho.shape[-1] != rho.shape[-2]:
        raise SimulationError(f"bad density-matrix shape {rho.shape}")
    return n


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> None:
    """Raise if ``rho`` is not Hermitian, unit-trace and PSD within ``tol``."""
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise SimulationError(f"not Hermitian (deviation {herm:.2e})")
    tr = np.trace(rho).real
    if abs(tr - 1) > tol:
        raise SimulationError(f"trace {tr} != 1")
    ev = np.linalg.eigvalsh(rho).min()
    if ev < -tol:
        raise SimulationError(f"negative eigenvalue {ev:.2e}")


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho, rho)))


# ---------------------------------------------------------------------------
# elementary operations


def _split(n: int, q: int) -> tuple[int, int]:
    return 2**q, 2 ** (n - q - 1)


def apply_1q_unitary(rho: np.ndarray, U: np.ndarray, q: int, n: int) -> np.ndarray:
    """U rho U^dagger on qubit ``q``; leading axes of ``rho`` are treated as a batch."""
    a, b = _split(n, q)
    d = rho.shape[-1]
    lead = rho.shape[:-2]
    r = np.matmul(U, rho.reshape(lead + (a, 2, b * d)))
    r = np.matmul(U.conj(), r.reshape(lead + (d * a, 2, b)))
    return r.reshape(rho.shape)


@lru_cache(maxsize=256)
def _cnot_perm(control: int, target: int, n: int) -> np.ndarray:
    idx = np.arange(2**n)
    cbit = (idx >> (n - 1 - control)) & 1
    return idx ^ (cbit << (n - 1 - target))


def apply_permutation(rho: np.ndarray, perm: np.ndarray) -> np.ndarray:
    return rho[..., perm, :][..., perm]


def apply_depolarizing(rho: np.ndarray, p: float, q: int, n: int) -> np.ndarray:
    """(1-p) rho + p * I/2 (x) Tr_q(rho) on qubit ``q``."""
    if p == 0:
        return rho
    a, b = _split(n, q)
    r = rho.reshape(rho.shape[:-2] + (a, 2, b, a, 2, b))
    half_tr = 0.5 * p * (r[..., 0, :, :, 0, :] + r[..., 1, :, :, 1, :])
    out = (1 - p) * r
    out[..., 0, :, :, 0, :] += half_tr
    out[..., 1, :, :, 1, :] += half_tr
    return out.reshape(rho.shape)


def apply_damping_dephasing(rho: np.ndarray, gamma: float, lam: float, q: int, n: int) -> np.ndarray:
    """Amplitude damping ``gamma`` then coherence factor ``1 - lam`` on qubit ``q``."""
    a, b = _split(n, q)
    r = rho.reshape(rho.shape[:-2] + (a, 2, b, a, 2, b)).copy()
    coh = np.sqrt(1 - gamma) * (1 - lam)
    r[..., 0, :, :, 0, :] += gamma * r[..., 1, :, :, 1, :]
    r[..., 1, :, :, 1, :] *= 1 - gamma
    r[..., 0, :, :, 1, :] *= coh
    r[..., 1, :, :, 0, :] *= coh
    return r.reshape(rho.shape)


def apply_kraus(rho: np.ndarray, channel: KrausChannel, n: int) -> np.ndarray:
    """Generic single-qubit Kraus application on ``channel.qubits[0]``."""
    if len(channel.qubits) != 1:
        raise SimulationError("only single-qubit Kraus channels are supported")
    out = np.zeros_like(rho)
    for k in channel.operators:
        out += apply_1q_unitary(rho, k, channel.qubits[0], n)
    return out


def apply_gate(rho: np.ndarray, gate: Gate, noise: NoiseModel | None = None, noisy: bool = True) -> np.ndarray:
    """Perfect unitary followed by the gate's depolarizing noise."""
    n = n_qubits_of(rho)
    if any(not 0 <= q < n for q in gate.qubits):
        raise IndexOutOfRange(f"{gate.kind} on {gate.qubits} in a {n}-qubit register")
    with_noise = noisy and noise is not None and noise.gate
    if gate.kind == "CNOT":
        rho = apply_permutation(rho, _cnot_perm(gate.qubits[0], gate.qubits[1], n))
        if with_noise:
            for q in gate.qubits:
                rho = apply_depolarizing(rho, noise.p2, q, n)
        return rho
    q = gate.qubits[0]
    rho = apply_1q_unitary(rho, gate_unitary(gate), q, n)
    if with_noise:
        rho = apply_depolarizing(rho, noise.p1, q, n)
    return rho


def _bit_signs(n: int) -> np.ndarray:
    """(2**n, n) array of +1/-1, the Z eigenvalue of each qubit in each basis state."""
    idx = np.arange(2**n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))) & 1
    return 1 - 2 * bits


def signal_phases(phis, n: int) -> np.ndarray:
    """Diagonal of the tensor product of Rz(phi_i)."""
    phis = np.broadcast_to(np.asarray(phis, dtype=float), (n,))
    return np.exp(-0.5j * (_bit_signs(n) @ phis))


def apply_rz_all(rho: np.ndarray, phis) -> np.ndarray:
    n = n_qubits_of(rho)
    v = signal_phases(phis, n)
    return v[:, None] * rho * v.conj()[None, :]


def _decohere_and_echo(rho: np.ndarray, t: float, noise, echo: bool, echo_pulses: int, noisy: bool) -> np.ndarray:
    """Signal block with the rotation removed: decoherence, plus echo pulses if any."""
    segs = echo_pulses + 1 if echo else 1
    decohere = noisy and noise is not None
    for s in range(segs):
        if s:
            rho = rho[..., ::-1, ::-1]
        if decohere:
            rho = apply_decoherence_all(rho, t / segs, noise)
    return rho


def apply_decoherence_all(rho: np.ndarray, dt: float, noise: NoiseModel) -> np.ndarray:
    if dt == 0 or not noise.interrogation or (np.isinf(noise.T1) and np.isinf(noise.T2)):
        return rho
    n = n_qubits_of(rho)
    gamma, lam = interrogation_factors(dt, noise.T1, noise.T2)
    for q in range(n):
        rho = apply_damping_dephasing(rho, gamma, lam, q, n)
    return rho


def apply_signal_block(
    rho: np.ndarray,
    phi,
    t: float,
    noise: NoiseModel | None = None,
    echo: bool = False,
    echo_pulses: int = 1,
    noisy: bool = True,
) -> np.ndarray:
    """Signal rotation Rz(phi) on every qubit plus decoherence over time ``t``.

    ``phi`` is a scalar or a per-qubit array.  With ``echo`` the interval is
    split into ``echo_pulses + 1`` segments separated by perfect X pulses on
    all qubits, and the signal sign alternates between segments.
    """
    if t < 0:
        raise SimulationError(f"negative interrogation time {t}")
    n = n_qubits_of(rho)
    phis = np.broadcast_to(np.asarray(phi, dtype=float), (n,))
    if not np.all(np.isfinite(phis)):
        raise SimulationError("signal angle must be finite")
    decohere = noisy and noise is not None
    if not echo:
        rho = apply_rz_all(rho, phis)
        return apply_decoherence_all(rho, t, noise) if decohere else rho
    segs = echo_pulses + 1
    for s in range(segs):
        if s:
            rho = rho[::-1, ::-1]  # X on every qubit
        rho = apply_rz_all(rho, phis * ((-1) ** s) / segs)
        if decohere:
            rho = apply_decoherence_all(rho, t / segs, noise)
    return rho


# ---------------------------------------------------------------------------
# circuits


def run_gates(rho: np.ndarray, gates: Iterable[Gate], noise: NoiseModel | None, noisy: bool = True) -> np.ndarray:
    for g in gates:
        rho = apply_gate(rho, g, noise, noisy)
    return rho


def run_circuit(
    circuit: ConcreteCircuit,
    phi,
    t: float,
    noise: NoiseModel | None = None,
    echo: bool = False,
    echo_pulses: int = 1,
    ideal: Iterable[str] = (),
) -> np.ndarray:
    """Final density matrix of encoder, signal block and decoder.

    ``ideal`` names stages (``encoder``, ``interrogation``, ``decoder``)
    simulated without noise.
    """
    ideal = set(ideal)
    rho = zero_state(circuit.n_qubits)
    rho = run_gates(rho, circuit.encoder, noise, "encoder" not in ideal)
    rho = apply_signal_block(rho, phi, t, noise, echo, echo_pulses, "interrogation" not in ideal)
    return run_gates(rho, circuit.decoder, noise, "decoder" not in ideal)


def outcome_probabilities(rho: np.ndarray) -> np.ndarray:
    p = np.clip(np.real(np.diag(rho)), 0.0, None)
    return p / p.sum()


def seed_sequence(seed) -> np.random.SeedSequence:
    """Fresh SeedSequence for an int, int sequence or SeedSequence, without mutating the input."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key, pool_size=seed.pool_size)
    return np.random.SeedSequence(seed)


def sample_distribution(probs: np.ndarray, shots: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(int(shots), probs / probs.sum())
    return counts / shots


def measure(rho: np.ndarray, noise: NoiseModel | None = None, shots: int | None = None, seed=None, noisy: bool = True) -> np.ndarray:
    """Z-basis outcome distribution, after readout error and optional shot sampling."""
    p = outcome_probabilities(rho)
    if noisy and noise is not None and noise.readout and noise.p_readout > 0:
        p = readout_confusion(p, noise.p_readout)
    if shots is not None:
        p = sample_distribution(p, shots, seed)
    return p


def as_bitstring_dict(probs: np.ndarray) -> dict[str, float]:
    n = int(round(np.log2(len(probs))))
    return {format(i, f"0{n}b"): float(p) for i, p in enumerate(probs)}


# ---------------------------------------------------------------------------
# backends


class ExactBackend:
    """Deterministic exact outcome probabilities."""

    shots = None

    def __init__(self, echo: bool = False, echo_pulses: int = 1):
        self.echo = echo
        self.echo_pulses = echo_pulses

    def evaluate(self, circuit, phi, t, noise, shots=None, seed=None) -> np.ndarray:
        return self.evaluate_batch(circuit, [phi], t, noise, seed=seed)[0]

    def evaluate_batch(self, circuit, phis: Sequence, t, noise, seed=None) -> np.ndarray:
        """Outcome distributions for several signal settings, shape ``(len(phis), 2**n)``.

        The encoder and the signal-independent part of the signal block run
        once; the rotations are then applied to a stack of states that goes
        through the decoder together.  With ``p`` echo pulses the rotation
        emerges from the block with sign ``(-1)**p``.
        """
        n = circuit.n_qubits
        rho = run_gates(zero_state(n), circuit.encoder, noise)
        rho = _decohere_and_echo(rho, t, noise, self.echo, self.echo_pulses, True)
        sign = (-1) ** self.echo_pulses if self.echo else 1
        v = np.array([signal_phases(sign * np.asarray(phi, dtype=float), n) for phi in phis])
        stack = v[:, :, None] * rho[None] * v.conj()[:, None, :]
        stack = run_gates(stack, circuit.decoder, noise)
        p = np.clip(np.real(np.diagonal(stack, axis1=-2, axis2=-1)), 0.0, None)
        p /= p.sum(axis=-1, keepdims=True)
        if noise is not None and noise.readout and noise.p_readout > 0:
            p = readout_confusion(p, noise.p_readout)
        return np.array([self._finish(row, seed, i) for i, row in enumerate(p)])

    def _finish(self, probs, seed, i):
        return probs


class SampledBackend(ExactBackend):
    """Multinomial shot sampling on top of the exact distribution."""

    def __init__(self, shots: int, echo: bool = False, echo_pulses: int = 1):
        super().__init__(echo, echo_pulses)
        if shots < 1:
            raise SimulationError("shots must be positive")
        self.shots = int(shots)

    def evaluate_batch(self, circuit, phis, t, noise, seed=None):
        """Row ``i`` is sampled with child ``i`` of ``seed``."""
        if seed is None:
            raise SimulationError("sampled evaluation needs an explicit seed")
        children = seed_sequence(seed).spawn(len(phis))
        return super().evaluate_batch(circuit, phis, t, noise, seed=children)

    def _finish(self, probs, seed, i):
        return sample_distribution(probs, self.shots, seed[i])
