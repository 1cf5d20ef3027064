"""Kraus channels for gate, interrogation and readout noise.

Conventions
-----------
* Depolarizing with probability ``p`` replaces the qubit by I/2 with
  probability ``p``: Kraus operators sqrt(1-3p/4) I and sqrt(p/4) {X, Y, Z}.
* Interrogation noise is amplitude damping (T1) composed with pure
  dephasing whose rate is ``1/T2 - 1/(2 T1)``, so coherences decay as
  ``exp(-dt/T2)`` overall.
* Readout error is a symmetric per-qubit bit flip applied to the outcome
  distribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class NoiseError(ValueError):
    pass


class OutOfRange(NoiseError):
    pass


class Unphysical(NoiseError):
    pass


DEFAULT_GATE_DURATIONS = {
    "U3": 50e-9,
    "H": 50e-9,
    "X": 50e-9,
    "Rz": 0.0,
    "CNOT": 300e-9,
    "measure": 1e-6,
}


@dataclass(frozen=True)
class NoiseModel:
    p1: float = 0.0
    p2: float = 0.0
    p_readout: float = 0.0
    T1: float = np.inf
    T2: float = np.inf
    gate_durations: dict = field(default_factory=lambda: dict(DEFAULT_GATE_DURATIONS))
    gate: bool = True
    interrogation: bool = True
    readout: bool = True

    def __post_init__(self):
        for name in ("p1", "p2", "p_readout"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise OutOfRange(f"{name}={v} is not a probability")
        if not (self.T1 > 0 and self.T2 > 0):
            raise Unphysical("T1 and T2 must be positive")
        if self.T2 > 2 * self.T1:
            raise Unphysical(f"T2={self.T2} exceeds 2*T1={2 * self.T1}")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        return cls()

    @classmethod
    def ibm_average(cls) -> "NoiseModel":
        """Averaged superconducting calibration: 1%/3% depolarizing, 5% readout, T1=52.2us, T2=62.8us."""
        return cls(p1=0.01, p2=0.03, p_readout=0.05, T1=52.2e-6, T2=62.8e-6)

    def without(self, *categories: str) -> "NoiseModel":
        """Copy with the named categories (gate, interrogation, readout) switched off."""
        bad = set(categories) - {"gate", "interrogation", "readout"}
        if bad:
            raise NoiseError(f"unknown noise categories {sorted(bad)}")
        return replace(self, **{c: False for c in categories})

    def scaled_lifetimes(self, factor: float) -> "NoiseModel":
        return replace(self, T1=self.T1 * factor, T2=self.T2 * factor)

    def to_dict(self) -> dict:
        return {
            "p1": self.p1,
            "p2": self.p2,
            "p_readout": self.p_readout,
            "T1": self.T1,
            "T2": self.T2,
            "gate_durations": dict(self.gate_durations),
            "gate": self.gate,
            "interrogation": self.interrogation,
            "readout": self.readout,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseModel":
        d = dict(d)
        durations = dict(DEFAULT_GATE_DURATIONS)
        durations.update(d.pop("gate_durations", {}) or {})
        return cls(gate_durations=durations, **d)


@dataclass(frozen=True)
class KrausChannel:
    operators: tuple[np.ndarray, ...]
    qubits: tuple[int, ...] = (0,)

    def completeness_error(self) -> float:
        d = self.operators[0].shape[0]
        s = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(s - np.eye(d))))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Apply to a density matrix whose dimension equals the channel's."""
        return sum(k @ rho @ k.conj().T for k in self.operators)

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Channel that applies ``self`` first and ``other`` second."""
        return KrausChannel(
            tuple(b @ a for a in self.operators for b in other.operators), self.qubits
        )


def _check_prob(p: float, name: str = "p") -> None:
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"{name}={p} is not a probability")


def depolarizing_channel(p: float, qubit: int = 0) -> KrausChannel:
    _check_prob(p)
    if p == 0:
        return KrausChannel((I2.copy(),), (qubit,))
    ops = (np.sqrt(1 - 3 * p / 4) * I2,) + tuple(
        np.sqrt(p / 4) * P for P in (PAULI_X, PAULI_Y, PAULI_Z)
    )
    return KrausChannel(ops, (qubit,))


def amplitude_damping_channel(gamma: float, qubit: int = 0) -> KrausChannel:
    _check_prob(gamma, "gamma")
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1), (qubit,))


def dephasing_channel(lam: float, qubit: int = 0) -> KrausChannel:
    """Coherences are multiplied by ``1 - lam``."""
    _check_prob(lam, "lambda")
    return KrausChannel(
        (np.sqrt(1 - lam / 2) * I2, np.sqrt(lam / 2) * PAULI_Z), (qubit,)
    )


def interrogation_rates(T1: float, T2: float) -> tuple[float, float]:
    """Amplitude-damping rate 1/T1 and pure-dephasing rate 1/T_phi."""
    if T2 > 2 * T1:
        raise Unphysical(f"T2={T2} exceeds 2*T1={2 * T1}")
    return 1.0 / T1, 1.0 / T2 - 0.5 / T1


def interrogation_factors(dt: float, T1: float, T2: float) -> tuple[float, float]:
    """(gamma, lambda) of the damping and dephasing parts after time ``dt``."""
    if dt < 0:
        raise NoiseError(f"negative duration {dt}")
    r1, rphi = interrogation_rates(T1, T2)
    gamma = -np.expm1(-dt * r1)
    lam = -np.expm1(-dt * rphi)
    return float(gamma), float(lam)


def interrogation_channel(dt: float, T1: float, T2: float, qubit: int = 0) -> KrausChannel:
    gamma, lam = interrogation_factors(dt, T1, T2)
    return amplitude_damping_channel(gamma, qubit).then(dephasing_channel(lam, qubit))


def confusion_matrix(p: float) -> np.ndarray:
    _check_prob(p, "p_readout")
    return np.array([[1 - p, p], [p, 1 - p]])


def readout_confusion(probs, p_readout: float) -> np.ndarray:
    """Independent symmetric bit flips on every qubit of a 2^N outcome vector.

    Qubit 0 is the most significant bit of the outcome index.  Leading axes
    are treated as a batch.
    """
    probs = np.asarray(probs, dtype=float)
    n = int(round(np.log2(probs.shape[-1])))
    if 2**n != probs.shape[-1]:
        raise NoiseError(f"distribution length {probs.shape[-1]} is not a power of two")
    c = confusion_matrix(p_readout)
    if p_readout == 0:
        return probs.copy()
    lead = probs.shape[:-1]
    t = probs.reshape(lead + (2,) * n)
    for q in range(n):
        ax = len(lead) + q
        t = np.moveaxis(np.tensordot(c, t, axes=([1], [ax])), 0, ax)
    return t.reshape(probs.shape)
