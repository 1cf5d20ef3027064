"""Gates, parameterized encoder/decoder structures and parameter binding.

A sensing circuit is split into an encoder, a signal block and a decoder.
Structures carry free-parameter slots; binding a parameter vector turns a
structure into a :class:`ConcreteCircuit` whose signal block is still a
placeholder, so a single bound circuit can be simulated at many signal
angles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

SINGLE_QUBIT_KINDS = ("U3", "H", "X", "Rz")
TWO_QUBIT_KINDS = ("CNOT",)
N_PARAMS = {"U3": 3, "Rz": 1, "H": 0, "X": 0, "CNOT": 0}


class CircuitError(ValueError):
    """Base class for malformed circuits and assignments."""


class LengthMismatch(CircuitError):
    pass


class UnboundSlot(CircuitError):
    pass


@dataclass(frozen=True)
class Slot:
    """Reference to entry ``index`` of the parameter vector."""

    index: int

    def __post_init__(self):
        if self.index < 0:
            raise CircuitError(f"negative slot index {self.index}")


Param = Union[float, Slot]


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[Param, ...] = ()

    def __post_init__(self):
        if self.kind not in N_PARAMS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        nq = 2 if self.kind in TWO_QUBIT_KINDS else 1
        if len(self.qubits) != nq:
            raise CircuitError(f"{self.kind} acts on {nq} qubit(s), got {self.qubits}")
        if len(self.params) != N_PARAMS[self.kind]:
            raise CircuitError(f"{self.kind} takes {N_PARAMS[self.kind]} parameters")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise CircuitError("CNOT control and target must differ")

    @property
    def slots(self) -> tuple[int, ...]:
        return tuple(p.index for p in self.params if isinstance(p, Slot))

    @property
    def is_bound(self) -> bool:
        return not self.slots

    def bind(self, theta: Sequence[float]) -> "Gate":
        if self.is_bound:
            return self
        vals = []
        for p in self.params:
            if isinstance(p, Slot):
                if p.index >= len(theta):
                    raise UnboundSlot(f"slot {p.index} has no value")
                vals.append(float(theta[p.index]))
            else:
                vals.append(p)
        return Gate(self.kind, self.qubits, tuple(vals))

    def shape(self) -> tuple[str, tuple[int, ...]]:
        """Kind and placement, with parameters stripped."""
        return self.kind, self.qubits


# convenience constructors
def U3(q: int, theta: Param, phi: Param, lam: Param) -> Gate:
    return Gate("U3", (q,), (theta, phi, lam))


def CNOT(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def H(q: int) -> Gate:
    return Gate("H", (q,))


def X(q: int) -> Gate:
    return Gate("X", (q,))


def Rz(q: int, angle: Param) -> Gate:
    return Gate("Rz", (q,), (angle,))


# ---------------------------------------------------------------------------
# unitaries

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ]
    )


def rz_matrix(angle: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])


def gate_unitary(gate: Gate) -> np.ndarray:
    """Exact unitary of a bound gate (2x2, or 4x4 with the control as the high bit)."""
    if not gate.is_bound:
        raise UnboundSlot(f"{gate.kind} on {gate.qubits} has free slots {gate.slots}")
    if gate.kind == "U3":
        return u3_matrix(*gate.params)
    if gate.kind == "Rz":
        return rz_matrix(gate.params[0])
    if gate.kind == "H":
        return _H.copy()
    if gate.kind == "X":
        return _X.copy()
    return _CNOT.copy()


# ---------------------------------------------------------------------------
# connectivity and structures


@dataclass(frozen=True)
class ConnectivityGraph:
    n_qubits: int
    edges: frozenset[frozenset[int]]

    def __init__(self, n_qubits: int, edges: Iterable[Iterable[int]]):
        if n_qubits < 1:
            raise CircuitError("graph needs at least one qubit")
        es = set()
        for e in edges:
            a, b = tuple(e)
            if a == b:
                raise CircuitError(f"self-loop on qubit {a}")
            if not (0 <= a < n_qubits and 0 <= b < n_qubits):
                raise CircuitError(f"edge {(a, b)} out of range for {n_qubits} qubits")
            es.add(frozenset((a, b)))
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "edges", frozenset(es))

    @classmethod
    def chain(cls, n: int) -> "ConnectivityGraph":
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def complete(cls, n: int) -> "ConnectivityGraph":
        return cls(n, [(i, j) for i in range(n) for j in range(i + 1, n)])

    def allows(self, a: int, b: int) -> bool:
        return frozenset((a, b)) in self.edges

    def ordered_pairs(self) -> list[tuple[int, int]]:
        out = []
        for e in sorted(tuple(sorted(e)) for e in self.edges):
            out += [e, e[::-1]]
        return out

    def has_chain(self) -> bool:
        return all(self.allows(i, i + 1) for i in range(self.n_qubits - 1))


@dataclass(frozen=True)
class Hyperparams:
    """Layers ``l``, single-qubit gates per layer ``k``, entanglers per layer ``m``."""

    l: int
    k: int
    m: int

    def check(self, n_qubits: int, graph: ConnectivityGraph | None = None) -> None:
        if self.l < 1:
            raise CircuitError("need at least one layer")
        if not 1 <= self.k <= n_qubits:
            raise CircuitError(f"k={self.k} outside [1, {n_qubits}]")
        n_edges = len(graph.edges) if graph is not None else n_qubits * (n_qubits - 1) // 2
        if not 0 <= self.m <= n_edges:
            raise CircuitError(f"m={self.m} outside [0, {n_edges}]")


Layer = tuple[Gate, ...]


def mirror_layers(layers: Sequence[Sequence[Gate]]) -> list[list[Gate]]:
    """Reverse layer order and gate order within each layer."""
    return [list(reversed(layer)) for layer in reversed(layers)]


@dataclass(frozen=True)
class CircuitStructure:
    n_qubits: int
    encoder_layers: tuple[Layer, ...]
    decoder_layers: tuple[Layer, ...]
    n_params: int
    hyperparams: Hyperparams | None = None

    def __init__(self, n_qubits, encoder_layers, decoder_layers, n_params=None, hyperparams=None):
        enc = tuple(tuple(layer) for layer in encoder_layers)
        dec = tuple(tuple(layer) for layer in decoder_layers)
        slots = [s for layer in enc + dec for g in layer for s in g.slots]
        if n_params is None:
            n_params = max(slots) + 1 if slots else 0
        if any(s >= n_params for s in slots):
            raise CircuitError(f"slot index beyond n_params={n_params}")
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(self, "encoder_layers", enc)
        object.__setattr__(self, "decoder_layers", dec)
        object.__setattr__(self, "n_params", n_params)
        object.__setattr__(self, "hyperparams", hyperparams)

    @property
    def encoder(self) -> list[Gate]:
        return [g for layer in self.encoder_layers for g in layer]

    @property
    def decoder(self) -> list[Gate]:
        return [g for layer in self.decoder_layers for g in layer]

    def bind(self, theta) -> "ConcreteCircuit":
        return bind_parameters(self, theta)

    def to_dict(self) -> dict:
        hp = self.hyperparams
        return {
            "n_qubits": self.n_qubits,
            "hyperparams": None if hp is None else {"l": hp.l, "k": hp.k, "m": hp.m},
            "n_params": self.n_params,
            "encoder": [[_gate_to_dict(g) for g in layer] for layer in self.encoder_layers],
            "decoder": [[_gate_to_dict(g) for g in layer] for layer in self.decoder_layers],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CircuitStructure":
        hp = d.get("hyperparams")
        return cls(
            d["n_qubits"],
            [[_gate_from_dict(g) for g in layer] for layer in d["encoder"]],
            [[_gate_from_dict(g) for g in layer] for layer in d["decoder"]],
            n_params=d.get("n_params"),
            hyperparams=None if hp is None else Hyperparams(hp["l"], hp["k"], hp["m"]),
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> "CircuitStructure":
        return cls.from_dict(json.loads(s))


def _gate_to_dict(g: Gate) -> dict:
    params = [{"slot": p.index} if isinstance(p, Slot) else float(p) for p in g.params]
    return {"kind": g.kind, "qubits": list(g.qubits), "params": params}


def _gate_from_dict(d: dict) -> Gate:
    params = tuple(Slot(int(p["slot"])) if isinstance(p, dict) else float(p) for p in d["params"])
    return Gate(d["kind"], tuple(int(q) for q in d["qubits"]), params)


@dataclass(frozen=True)
class ConcreteCircuit:
    """Fully bound encoder and decoder around a signal placeholder."""

    n_qubits: int
    encoder: tuple[Gate, ...]
    decoder: tuple[Gate, ...]

    def __post_init__(self):
        for g in self.encoder + self.decoder:
            if not g.is_bound:
                raise UnboundSlot(f"{g.kind} on {g.qubits} is not bound")

    def gates(self) -> list:
        """Gate list with the string ``"signal"`` marking the signal block."""
        return [*self.encoder, "signal", *self.decoder]


@dataclass(frozen=True)
class ParameterAssignment:
    theta: np.ndarray
    t: float

    def __init__(self, theta, t: float):
        theta = np.asarray(theta, dtype=float)
        if t <= 0:
            raise CircuitError(f"interrogation time must be positive, got {t}")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "t", float(t))


@dataclass(frozen=True)
class SignalSpec:
    """Signal angular frequency (rad/s) and whether a mid-point echo is used."""

    omega: float
    echo: bool = False
    echo_pulses: int = 1

    def phase(self, t: float) -> float:
        return self.omega * t


def bind_parameters(structure: CircuitStructure, assignment) -> ConcreteCircuit:
    """Substitute parameter values into every slot of ``structure``.

    ``assignment`` may be a :class:`ParameterAssignment` or a bare array.
    """
    theta = assignment.theta if isinstance(assignment, ParameterAssignment) else assignment
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != structure.n_params:
        raise LengthMismatch(f"expected {structure.n_params} parameters, got {theta.size}")
    return ConcreteCircuit(
        structure.n_qubits,
        tuple(g.bind(theta) for g in structure.encoder),
        tuple(g.bind(theta) for g in structure.decoder),
    )


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Violation:
    kind: str  # EdgeNotInGraph | IndexOutOfRange | DecoderAsymmetry
    detail: str


@dataclass
class ValidationResult:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def validate_structure(
    structure: CircuitStructure,
    graph: ConnectivityGraph,
    require_mirror: bool = True,
) -> ValidationResult:
    """Collect every connectivity, range and mirror-symmetry violation."""
    res = ValidationResult()
    n = structure.n_qubits
    if graph.n_qubits < n:
        res.violations.append(
            Violation("IndexOutOfRange", f"graph has {graph.n_qubits} qubits, structure {n}")
        )
    for where, gates in (("encoder", structure.encoder), ("decoder", structure.decoder)):
        for g in gates:
            bad = [q for q in g.qubits if not 0 <= q < n]
            if bad:
                res.violations.append(Violation("IndexOutOfRange", f"{where} {g.kind} on {g.qubits}"))
                continue
            if g.kind == "CNOT" and not graph.allows(*g.qubits):
                res.violations.append(Violation("EdgeNotInGraph", f"{where} CNOT{g.qubits}"))

    if require_mirror:
        enc_shape = [[g.shape() for g in layer] for layer in structure.encoder_layers]
        dec_shape = [[g.shape() for g in layer] for layer in structure.decoder_layers]
        if mirror_layers(enc_shape) != dec_shape:
            res.violations.append(Violation("DecoderAsymmetry", "decoder is not the mirror of the encoder"))
        enc_slots = {s for g in structure.encoder for s in g.slots}
        dec_slots = {s for g in structure.decoder for s in g.slots}
        if enc_slots & dec_slots:
            res.violations.append(
                Violation("DecoderAsymmetry", f"shared slots {sorted(enc_slots & dec_slots)}")
            )
    return res
