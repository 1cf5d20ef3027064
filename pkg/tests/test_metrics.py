import logging

import numpy as np
import pytest
from conftest import random_circuit

from metroforge.baselines import build_baseline
from metroforge.circuit import CNOT, H, U3, ConcreteCircuit
from metroforge.metrics import (
    DECOMPOSITION_STAGES,
    ObjectiveConfig,
    cfi_omega,
    cfi_phi,
    circuit_overhead,
    classical_fisher,
    decomposition_regions,
    default_floor,
    distribution_and_derivative,
    evaluate_report,
    expected_cfi,
    objective,
    qfi_from_state,
    qfi_phi,
    signal_derivative_param_shift,
    snr_bound,
    stage_qfi_decomposition,
)
from metroforge.noise import NoiseModel
from metroforge.simulator import ExactBackend, SampledBackend

NOISELESS = NoiseModel.noiseless()
EXACT = ExactBackend()


def test_ramsey_derivative_analytic():
    c = build_baseline("parallel-ramsey", 1)
    for phi in np.linspace(0.1, 3.0, 7):
        d = signal_derivative_param_shift(EXACT, c, phi, 1e-6, NOISELESS)
        assert d[1] == pytest.approx(0.5 * np.sin(phi), abs=1e-9)
    assert signal_derivative_param_shift(EXACT, c, np.pi / 2, 1e-6, NOISELESS)[1] == pytest.approx(0.5, abs=1e-9)


def test_phase_independent_circuit_has_zero_derivative():
    c = ConcreteCircuit(2, (CNOT(0, 1),), (U3(0, 0.3, 0.1, 0.2),))
    d = signal_derivative_param_shift(EXACT, c, 0.4, 1e-6, NOISELESS)
    assert np.allclose(d, 0, atol=1e-15)
    assert cfi_phi(EXACT, c, 0.4, 1e-6, NOISELESS) == pytest.approx(0.0, abs=1e-20)


def test_ghz_h_two_qubit_parity_derivative():
    c = build_baseline("ghz-h", 2)
    for phi in (0.2, 0.7, 1.9):
        d = signal_derivative_param_shift(EXACT, c, phi, 1e-6, NOISELESS)
        even = d[0] + d[3]
        assert even == pytest.approx(-np.sin(2 * phi), abs=1e-9)


def test_ramsey_cfi_is_one():
    c = build_baseline("parallel-ramsey", 1)
    for phi in np.linspace(0.05, np.pi - 0.05, 11):
        assert cfi_phi(EXACT, c, phi, 1e-6, NOISELESS) == pytest.approx(1.0, abs=1e-8)


def test_ghz_h_three_qubit_cfi():
    assert cfi_phi(EXACT, build_baseline("ghz-h", 3), np.pi / 6, 1e-6, NOISELESS) == pytest.approx(9.0, abs=1e-8)


def test_qfi_ghz_and_product():
    ghz = ConcreteCircuit(3, build_baseline("ghz-h", 3).encoder, ())
    assert qfi_phi(ghz, 0.3, 1e-6, NOISELESS) == pytest.approx(9.0, abs=1e-8)
    prod = ConcreteCircuit(4, tuple(H(q) for q in range(4)), ())
    assert qfi_phi(prod, 0.3, 1e-6, NOISELESS) == pytest.approx(4.0, abs=1e-8)


def test_qfi_maximally_mixed_is_zero():
    rho = np.eye(4) / 4
    assert qfi_from_state(rho, np.zeros((4, 4))) == 0.0


def test_objective_arithmetic():
    assert objective(9.0, 20e-6, 1e-6, 1.0) == pytest.approx(9 * (20e-6) ** 2 / 21e-6)
    assert objective(9.0, 20e-6, 1e-6, 1.0) == pytest.approx(1.714e-4, rel=1e-3)
    assert objective(0.0, 5e-6, 1e-6) == 0.0
    assert objective(2.0, 3e-6, 0.0) == pytest.approx(6e-6)
    assert cfi_omega(9.0, 20e-6) == 9.0 * (20e-6) ** 2


def test_snr_bound():
    assert snr_bound(0.0) == 0.0
    assert snr_bound(3e-4, 4) / snr_bound(3e-4, 1) == pytest.approx(2.0, abs=1e-15)
    assert snr_bound(1e-4) == pytest.approx(1e-2)
    with pytest.raises(ValueError):
        snr_bound(1.0, 0)


def test_objective_config_validation():
    with pytest.raises(ValueError):
        ObjectiveConfig(t_overhead=-1)
    with pytest.raises(ValueError):
        ObjectiveConfig(T_unit=0)
    with pytest.raises(ValueError):
        ObjectiveConfig(epsilon_floor=1e-3)


def test_overhead_from_critical_path():
    durations = NoiseModel().gate_durations
    c = build_baseline("ghz-inv", 3)
    # H, CNOT, CNOT on the encoder path; CNOT, CNOT, H on the decoder path
    expect = 2 * (50e-9 + 2 * 300e-9) + 1e-6
    assert circuit_overhead(c, durations) == pytest.approx(expect)
    ramsey = build_baseline("parallel-ramsey", 4)
    assert circuit_overhead(ramsey, durations) == pytest.approx(2 * 50e-9 + 1e-6)
    assert ObjectiveConfig(t_overhead=2e-6).overhead_for(c, NoiseModel()) == 2e-6


def test_floor_flags_low_probability_outcomes(caplog):
    with caplog.at_level(logging.WARNING, logger="metroforge.metrics"):
        v = classical_fisher(np.array([1.0, 0.0]), np.array([0.0, 0.1]), 1e-12)
    assert v == pytest.approx(0.01 / 1e-12)
    assert "below the floor" in caplog.text


def test_default_floor():
    assert default_floor(EXACT) == 1e-12
    assert default_floor(SampledBackend(1000)) == 0.5 / 1000


def test_report_fields(fig5_noise):
    r = evaluate_report(build_baseline("ghz-inv", 3), 1e4, 20e-6, fig5_noise)
    assert r.cfi_omega == r.t**2 * r.cfi_phi
    assert r.cfi_phi <= r.qfi_phi + 1e-6
    assert r.objective_value == pytest.approx(objective(r.cfi_phi, r.t, r.t_overhead))
    assert set(r.to_dict()) == {"cfi_phi", "cfi_omega", "qfi_phi", "t", "t_overhead", "objective_value"}


def test_expected_cfi_single_node_matches_point():
    c = build_baseline("ghz-inv", 3)
    noise = NoiseModel.ibm_average()
    assert expected_cfi(EXACT, c, [0.3], [1.0], 20e-6, noise) == cfi_phi(EXACT, c, 0.3, 20e-6, noise)


def test_expected_cfi_is_weighted_mean(fig5_noise):
    c = build_baseline("parallel-ramsey", 2)
    phis, w = np.array([0.1, 0.9, 2.0]), np.array([0.2, 0.5, 0.3])
    direct = sum(wi * cfi_phi(EXACT, c, p, 8e-6, fig5_noise) for p, wi in zip(phis, w))
    assert expected_cfi(EXACT, c, phis, w, 8e-6, fig5_noise) == pytest.approx(direct, rel=1e-12)


def test_decomposition_noiseless_is_flat():
    c = build_baseline("ghz-h", 3)
    stages = stage_qfi_decomposition(c, 0.2, 20e-6, NOISELESS)
    assert [s for s, _ in stages] == [s for s, _ in DECOMPOSITION_STAGES]
    vals = [v for _, v in stages]
    assert np.allclose(vals, 9.0, atol=1e-8)
    regions = decomposition_regions(stages)
    assert regions[0][2] == pytest.approx(9.0)
    assert np.allclose([r[2] for r in regions[1:]], 0, atol=1e-8)


def test_decomposition_endpoints(fig5_noise):
    ramsey = stage_qfi_decomposition(build_baseline("parallel-ramsey", 3), 0.2, 20e-6, fig5_noise)
    assert ramsey[-1][1] == pytest.approx(3.0, abs=1e-8)
    ghz = stage_qfi_decomposition(build_baseline("ghz-h", 3), 0.2, 20e-6, fig5_noise)
    assert ghz[-1][1] == pytest.approx(9.0, abs=1e-8)
    assert ghz[0][1] < 9.0 - 1e-3
    assert ghz[0][1] == pytest.approx(cfi_phi(EXACT, build_baseline("ghz-h", 3), 0.2, 20e-6, fig5_noise))


def test_sampled_cfi_converges_on_ramsey():
    c = build_baseline("parallel-ramsey", 1)
    noise = NoiseModel.ibm_average()
    phi, t = 1.1, 10e-6
    exact = cfi_phi(EXACT, c, phi, t, noise)
    b = SampledBackend(10**6)
    seeds = np.random.SeedSequence(99).spawn(30)
    draws = np.array([cfi_phi(b, c, phi, t, noise, seed=s) for s in seeds])
    # bootstrap standard error of one draw
    rng = np.random.default_rng(0)
    boot = [rng.choice(draws, draws.size).std(ddof=1) for _ in range(200)]
    se = float(np.mean(boot))
    assert abs(draws[0] - exact) <= 3 * se


def test_distribution_and_derivative_shapes(fig5_noise):
    c = random_circuit(3, 0)
    p, dp = distribution_and_derivative(EXACT, c, 0.5, 10e-6, fig5_noise)
    assert p.shape == dp.shape == (8,)
    assert p.sum() == pytest.approx(1.0)
    assert dp.sum() == pytest.approx(0.0, abs=1e-12)
