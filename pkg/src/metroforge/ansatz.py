"""Random encoder/decoder structure proposals under gateset and connectivity limits."""

from __future__ import annotations

import numpy as np

from .circuit import (
    CNOT,
    U3,
    CircuitError,
    CircuitStructure,
    ConnectivityGraph,
    Gate,
    Hyperparams,
    Slot,
    mirror_layers,
    validate_structure,
)

RETRY_BUDGET = 1000


class ProposalExhausted(RuntimeError):
    """No non-degenerate structure was found for the given hyperparameters."""


def _draw_layer(rng, n, graph, hyper, first_layer, next_slot):
    qubits = sorted(int(q) for q in rng.choice(n, size=hyper.k, replace=False))
    layer = []
    for q in qubits:
        layer.append(U3(q, Slot(next_slot), Slot(next_slot + 1), Slot(next_slot + 2)))
        next_slot += 3

    active = set(qubits)
    used: set[tuple[int, int]] = set()
    uses = dict.fromkeys(range(n), 0)
    pairs = graph.ordered_pairs()
    for _ in range(hyper.m):
        cands = [
            (c, t)
            for c, t in pairs
            if (c, t) not in used
            and uses[c] < 2
            and uses[t] < 2
            and (not first_layer or c in active)
        ]
        if not cands:
            return None, next_slot
        c, t = cands[rng.integers(len(cands))]
        used.add((c, t))
        uses[c] += 1
        uses[t] += 1
        active.add(t)
        layer.append(CNOT(c, t))
    return layer, next_slot


def _draw(rng, n, graph, hyper):
    layers = []
    slot = 0
    for j in range(hyper.l):
        layer, slot = _draw_layer(rng, n, graph, hyper, j == 0, slot)
        if layer is None:
            return None
        layers.append(layer)
    decoder = []
    for layer in mirror_layers(layers):
        fresh = []
        for g in layer:
            if g.kind == "U3":
                g = U3(g.qubits[0], Slot(slot), Slot(slot + 1), Slot(slot + 2))
                slot += 3
            fresh.append(g)
        decoder.append(fresh)
    return CircuitStructure(n, layers, decoder, n_params=slot, hyperparams=hyper)


def propose(n: int, graph: ConnectivityGraph, hyper: Hyperparams, seed, retries: int = RETRY_BUDGET) -> CircuitStructure:
    """Draw a valid, non-degenerate structure with ``6*k*l`` free parameters.

    Each layer puts U3 gates on ``k`` distinct random qubits, then draws
    ``m`` CNOTs from the graph edges in either orientation.  In the first
    layer a CNOT control must already carry a U3 or be the target of an
    earlier CNOT in the same draw.  The decoder mirrors the encoder with
    fresh parameter slots.
    """
    hyper.check(n, graph)
    rng = np.random.default_rng(seed)
    for _ in range(retries):
        s = _draw(rng, n, graph, hyper)
        if s is None or is_degenerate(s):
            continue
        if validate_structure(s, graph).ok:
            return s
    raise ProposalExhausted(f"no usable structure for {hyper} on {n} qubits after {retries} draws")


def is_degenerate(structure: CircuitStructure) -> bool:
    """True if the encoder has a canceling, spurious or redundant gate.

    * two identical CNOTs with nothing touching their qubits in between;
    * a CNOT whose control has seen no gate and was never a CNOT target;
    * two U3s on one qubit within a layer with no entangler between them.
    """
    last: dict[int, Gate] = {}
    touched: set[int] = set()
    for layer in structure.encoder_layers:
        since_entangler: set[int] = set()
        for g in layer:
            if g.kind == "CNOT":
                c, t = g.qubits
                prev_c, prev_t = last.get(c), last.get(t)
                if prev_c is not None and prev_c is prev_t and prev_c.shape() == g.shape():
                    return True
                if c not in touched:
                    return True
                touched.update(g.qubits)
                since_entangler.clear()
            else:
                q = g.qubits[0]
                if g.kind == "U3" and q in since_entangler:
                    return True
                if g.kind == "U3":
                    since_entangler.add(q)
                touched.add(q)
            for q in g.qubits:
                last[q] = g
    return False


def default_hyper_schedule(n: int, graph: ConnectivityGraph) -> list[Hyperparams]:
    """One-layer (k, m) combinations: fewest CNOTs first, most rotated qubits first."""
    max_m = min(len(graph.edges), max(n - 1, 0))
    return [Hyperparams(1, k, m) for m in range(max_m + 1) for k in range(n, 0, -1)]


__all__ = ["propose", "is_degenerate", "default_hyper_schedule", "ProposalExhausted", "CircuitError"]
