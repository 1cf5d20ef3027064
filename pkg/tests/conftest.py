import numpy as np
import pytest

from metroforge.circuit import CNOT, U3, CircuitStructure, ConnectivityGraph, bind_parameters
from metroforge.noise import NoiseModel

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def random_circuit(n, seed, depth=2):
    """Random U3 + nearest-neighbour CNOT encoder/decoder, bound to random angles."""
    rng = np.random.default_rng(seed)
    slot = 0
    layers = []
    for _ in range(depth):
        layer = []
        for q in range(n):
            layer.append(U3(q, *rng.uniform(0, 2 * np.pi, 3)))
        for _ in range(rng.integers(0, n)):
            a = int(rng.integers(0, n - 1))
            layer.append(CNOT(a, a + 1) if rng.random() < 0.5 else CNOT(a + 1, a))
        layers.append(layer)
    dec = [[U3(q, *rng.uniform(0, 2 * np.pi, 3)) for q in range(n)]]
    for _ in range(rng.integers(0, n)):
        a = int(rng.integers(0, n - 1))
        dec[0].append(CNOT(a, a + 1))
    s = CircuitStructure(n, layers, dec, n_params=slot)
    return bind_parameters(s, np.zeros(0))


@pytest.fixture
def fig5_noise():
    return NoiseModel.ibm_average()


@pytest.fixture
def chain3():
    return ConnectivityGraph.chain(3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
