import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metroforge.noise import (
    NoiseModel,
    OutOfRange,
    Unphysical,
    amplitude_damping_channel,
    confusion_matrix,
    dephasing_channel,
    depolarizing_channel,
    interrogation_channel,
    interrogation_factors,
    readout_confusion,
)

PLUS = np.full((2, 2), 0.5, dtype=complex)
T1, T2 = 52.2e-6, 62.8e-6


def random_state(rng, d=2):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def test_noise_model_validation():
    with pytest.raises(OutOfRange):
        NoiseModel(p1=1.5)
    with pytest.raises(Unphysical):
        NoiseModel(T1=10e-6, T2=30e-6)
    NoiseModel(T1=10e-6, T2=20e-6)


def test_ibm_average_values():
    m = NoiseModel.ibm_average()
    assert (m.p1, m.p2, m.p_readout, m.T1, m.T2) == (0.01, 0.03, 0.05, 52.2e-6, 62.8e-6)


def test_without_and_roundtrip():
    m = NoiseModel.ibm_average().without("gate", "readout")
    assert not m.gate and not m.readout and m.interrogation
    assert NoiseModel.from_dict(m.to_dict()) == m
    with pytest.raises(ValueError):
        m.without("crosstalk")


def test_scaled_lifetimes():
    m = NoiseModel.ibm_average().scaled_lifetimes(10)
    assert m.T1 == pytest.approx(522e-6) and m.T2 == pytest.approx(628e-6)


def test_depolarizing_zero_is_identity():
    ch = depolarizing_channel(0.0)
    assert len(ch.operators) == 1
    assert np.allclose(ch.operators[0], np.eye(2))


def test_depolarizing_full_gives_maximally_mixed():
    rho = np.diag([1.0, 0.0]).astype(complex)
    assert np.allclose(depolarizing_channel(1.0).apply(rho), np.eye(2) / 2, atol=1e-15)


def test_depolarizing_scales_coherence():
    out = depolarizing_channel(0.01).apply(PLUS)
    assert out[0, 1] == pytest.approx(0.99 * 0.5, abs=1e-15)


def test_depolarizing_out_of_range():
    with pytest.raises(OutOfRange):
        depolarizing_channel(-0.1)


def test_interrogation_zero_time_is_identity():
    rng = np.random.default_rng(0)
    rho = random_state(rng)
    assert np.allclose(interrogation_channel(0.0, T1, T2).apply(rho), rho, atol=1e-15)


def test_interrogation_long_time_relaxes_to_ground():
    rho = random_state(np.random.default_rng(1))
    out = interrogation_channel(1.0, T1, T2).apply(rho)
    assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)


def test_coherence_decays_with_t2():
    out = interrogation_channel(T2, T1, T2).apply(PLUS)
    assert abs(out[0, 1]) / 0.5 == pytest.approx(np.exp(-1), abs=1e-12)


def test_interrogation_unphysical():
    with pytest.raises(Unphysical):
        interrogation_channel(1e-6, 10e-6, 30e-6)


def test_interrogation_factors_match_rates():
    gamma, lam = interrogation_factors(5e-6, T1, T2)
    assert gamma == pytest.approx(1 - np.exp(-5e-6 / T1))
    assert lam == pytest.approx(1 - np.exp(-5e-6 * (1 / T2 - 0.5 / T1)))


@pytest.mark.parametrize(
    "channel",
    [
        depolarizing_channel(0.0),
        depolarizing_channel(0.37),
        depolarizing_channel(1.0),
        amplitude_damping_channel(0.2),
        dephasing_channel(0.6),
        interrogation_channel(13e-6, T1, T2),
        interrogation_channel(13e-6, 20e-6, 40e-6),
    ],
)
def test_kraus_completeness(channel):
    assert channel.completeness_error() < 1e-10


def test_readout_single_qubit():
    assert np.allclose(readout_confusion([1.0, 0.0], 0.05), [0.95, 0.05])


def test_readout_two_qubits():
    assert np.allclose(readout_confusion([1.0, 0, 0, 0], 0.05), [0.9025, 0.0475, 0.0475, 0.0025], atol=1e-15)


def test_readout_zero_is_identity():
    p = np.random.default_rng(2).dirichlet(np.ones(8))
    assert np.array_equal(readout_confusion(p, 0.0), p)


def test_readout_batch_axis():
    rng = np.random.default_rng(3)
    batch = rng.dirichlet(np.ones(4), size=5)
    out = readout_confusion(batch, 0.1)
    for row, o in zip(batch, out):
        assert np.allclose(readout_confusion(row, 0.1), o)


def test_readout_rejects_bad_length():
    with pytest.raises(ValueError):
        readout_confusion([0.5, 0.3, 0.2], 0.1)
    with pytest.raises(OutOfRange):
        confusion_matrix(1.2)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.floats(0, 1), st.integers(0, 2**31 - 1))
def test_readout_commutes_with_qubit_relabeling(n, p, seed):
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(2**n))
    perm = rng.permutation(n)

    def relabel(v):
        t = v.reshape((2,) * n).transpose(perm)
        return t.reshape(-1)

    out1 = relabel(readout_confusion(probs, p))
    out2 = readout_confusion(relabel(probs), p)
    assert np.allclose(out1, out2, atol=1e-12)
    assert out1.sum() == pytest.approx(1.0)
