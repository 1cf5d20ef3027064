import json

import numpy as np
import pytest

from metroforge.ansatz import propose
from metroforge.baselines import build_baseline
from metroforge.circuit import ConnectivityGraph, Hyperparams, bind_parameters
from metroforge.harness import (
    Ablation,
    ConfigError,
    ExperimentConfig,
    SignalDistribution,
    config_from_dict,
    gaussian_nodes,
    load_config,
    load_preset,
    load_results,
    preset_names,
    rows_from_csv,
    rows_to_csv,
    run_ablation_study,
    run_decomposition,
    run_scaling_study,
    uniform_nodes,
)
from metroforge.harness.experiments import distribution_objective
from metroforge.metrics import expected_cfi
from metroforge.noise import NoiseModel
from metroforge.optimize import CircuitObjective, OptimizerSettings
from metroforge.simulator import ExactBackend

NOISELESS = NoiseModel.noiseless()
SMALL = OptimizerSettings(max_evaluations=60)


def small_config(**kw):
    base = dict(name="t", seed=3, qubits=(2,), iter_max=2, optimizer=SMALL, t_grid=(1e-6, 1e-4, 20))
    base.update(kw)
    return ExperimentConfig(**base)


def test_presets_load():
    names = preset_names()
    assert {"fig4", "fig5", "fig6-no-gate-noise", "fig6-no-readout-noise", "fig6-t1t2-x10", "fig7"} <= set(names)
    for name in names:
        cfg = load_preset(name)
        assert cfg.signal.omega == 1e4
        assert cfg.noise.T1 > 0
    assert load_preset("fig7").distribution.stddevs == (0.1, 0.3, 0.6, 1.0)
    assert not load_preset("fig6-no-gate-noise").noise.gate


def test_unknown_preset():
    with pytest.raises(ConfigError):
        load_preset("fig99")


def test_config_dict_round_trip():
    cfg = load_preset("fig7")
    again = config_from_dict(json.loads(cfg.canonical_json()))
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()


def test_noiseless_round_trip_keeps_infinite_lifetimes():
    cfg = small_config(noise=NOISELESS, hyper_schedule=(Hyperparams(1, 2, 0),))
    again = config_from_dict(json.loads(cfg.canonical_json()))
    assert again.noise.T1 == np.inf
    assert again == cfg


def test_hash_tracks_content():
    a = small_config()
    assert a.config_hash() == small_config().config_hash()
    assert a.config_hash() != small_config(seed=4).config_hash()


def test_toml_file(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[experiment]\nname = "x"\nqubits = [2, 3]\n[noise]\np1 = 0.0\nT1 = 50e-6\nT2 = 70e-6\n')
    cfg = load_config(p)
    assert cfg.qubits == (2, 3) and cfg.noise.p1 == 0.0 and cfg.noise.T2 == 70e-6


@pytest.mark.parametrize(
    "text",
    [
        "[noise]\nT1 = 10e-6\nT2 = 30e-6\n",
        "[experiment]\nqubits = [9]\n",
        "[graph]\nkind = 'star'\n",
        "[optimizer]\nkind = 'sgd'\n",
        "[distribution]\nkind = 'gaussian'\nstddevs = [0.0]\n",
        "not toml ===",
    ],
)
def test_bad_configs(tmp_path, text):
    p = tmp_path / "bad.toml"
    p.write_text(text)
    with pytest.raises(ConfigError):
        load_config(p)


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")


def test_gaussian_nodes_moments():
    x, w = gaussian_nodes(1.0, 0.3, 9)
    assert w.sum() == pytest.approx(1.0)
    assert (w * x).sum() == pytest.approx(1.0)
    assert (w * (x - 1) ** 2).sum() == pytest.approx(0.09)


def test_uniform_nodes_integrate_trig_exactly():
    x, w = uniform_nodes(16)
    assert w.sum() == pytest.approx(1.0)
    assert (w * np.cos(3 * x) ** 2).sum() == pytest.approx(0.5, abs=1e-14)
    x, w = uniform_nodes(8, 0.0, 1.0)
    assert (w * x**3).sum() == pytest.approx(0.25, abs=1e-14)


def test_signal_distribution_validation():
    with pytest.raises(ConfigError):
        SignalDistribution(kind="cauchy")
    with pytest.raises(ConfigError):
        SignalDistribution(stddevs=(0.1, -0.2))


def test_point_mass_is_single_phase_objective(fig5_noise):
    structure = propose(2, ConnectivityGraph.chain(2), Hyperparams(1, 2, 1), seed=0)
    theta = np.linspace(0.3, 2.5, structure.n_params)
    t = 12e-6
    cfg = small_config(noise=fig5_noise)
    fn = distribution_objective(structure, cfg, [1e4 * t], [1.0])
    assert fn(theta, t) == CircuitObjective(structure, fig5_noise, 1e4).cfi(theta, t)


def test_csv_round_trip():
    rows = [
        {"experiment": "e", "N": 3, "protocol": "ghz-h", "cfi_phi": 0.1 + 0.2, "cfi_omega": 1e-300, "qfi": None,
         "t_star_s": 2.3e-5, "objective": 1 / 3, "snr_bound": 7.0, "seed": 5},
        {"experiment": "e", "N": 3, "protocol": "error", "seed": 5},
    ]
    back = rows_from_csv(rows_to_csv(rows))
    assert back[0] == rows[0]
    assert back[1]["protocol"] == "error" and back[1]["cfi_phi"] is None


def test_csv_rows_match_json(tmp_path):
    cfg = small_config(noise=NOISELESS, qubits=(1, 2))
    rec = run_scaling_study(cfg, optimize=False)
    rec.write(tmp_path, cfg.canonical_json())
    csv_rows = rows_from_csv((tmp_path / "results.csv").read_text())
    js = load_results(tmp_path)
    assert [{c: r.get(c) for c in js["columns"]} for r in js["rows"]] == csv_rows
    assert js["config_hash"] == config_from_dict(json.loads((tmp_path / "config.json").read_text())).config_hash()


def test_noiseless_baseline_rows():
    cfg = small_config(noise=NOISELESS, qubits=(1, 2, 3, 4))
    rec = run_scaling_study(cfg, optimize=False)
    by = {(r["N"], r["protocol"]): r["cfi_phi"] for r in rec.rows}
    for n in cfg.qubits:
        assert by[(n, "parallel-ramsey")] == pytest.approx(n, abs=1e-8)
        assert by[(n, "ghz-h")] == pytest.approx(n * n, abs=1e-8)
        assert by[(n, "ghz-inv")] == pytest.approx(n * n, abs=1e-8)


def test_empty_qubit_range(tmp_path):
    cfg = small_config(qubits=())
    rec = run_scaling_study(cfg, seed=1)
    assert rec.rows == [] and rec.summary == {}
    rec.write(tmp_path, cfg.canonical_json())
    assert (tmp_path / "results.csv").read_text().count("\n") == 1


def test_scaling_needs_seed():
    with pytest.raises(ValueError):
        run_scaling_study(small_config(seed=None))


def test_results_json_is_bit_identical(tmp_path, fig5_noise):
    cfg = small_config(noise=fig5_noise)
    a = run_scaling_study(cfg, seed=5)
    b = run_scaling_study(cfg, seed=5)
    a.write(tmp_path / "a", cfg.canonical_json())
    b.write(tmp_path / "b", cfg.canonical_json())
    assert (tmp_path / "a" / "results.json").read_bytes() == (tmp_path / "b" / "results.json").read_bytes()
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()
    protocols = [r["protocol"] for r in a.rows]
    assert protocols == ["parallel-ramsey", "ghz-h", "ghz-inv", "optimized"]
    assert set(a.summary["2"]) == {"best_baseline", "objective_ratio", "snr_ratio"}


def test_failure_at_one_n_leaves_error_row(monkeypatch, fig5_noise):
    import metroforge.harness.experiments as ex

    real = ex.search

    def flaky(config, n, seed, workers=None):
        if n == 2:
            raise RuntimeError("boom")
        return real(config, n, seed, workers)

    monkeypatch.setattr(ex, "search", flaky)
    rec = run_scaling_study(small_config(qubits=(1, 2), noise=fig5_noise), seed=1)
    assert [r["protocol"] for r in rec.rows if r["N"] == 2][-1] == "error"
    assert "optimized" in [r["protocol"] for r in rec.rows if r["N"] == 1]
    assert "boom" in rec.details["errors"]["2"]


def test_remove_gate_noise_on_noiseless_is_noiseless_run():
    cfg = small_config(noise=NOISELESS)
    plain = run_scaling_study(cfg, seed=2)
    abl = run_ablation_study(cfg, Ablation.REMOVE_GATE_NOISE, seed=2)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "experiment"} for r in rows]
    assert strip(abl.rows) == strip(plain.rows)


def test_ablation_noise_models(fig5_noise):
    cfg = small_config(noise=fig5_noise)
    assert not Ablation("remove-gate-noise").apply(cfg).noise.gate
    assert not Ablation("remove-readout-noise").apply(cfg).noise.readout
    assert Ablation("suppress-t1t2-x10").apply(cfg).noise.T1 == pytest.approx(522e-6)


def test_decomposition_noiseless_regions_vanish():
    rec = run_decomposition(small_config(noise=NOISELESS, qubits=(3,)))
    assert {r["protocol"] for r in rec.rows} == {"parallel-ramsey", "ghz-h", "ghz-inv"}
    assert all(abs(r["region"]) < 1e-8 for r in rec.rows if r["stage"] != "full noise")


def test_decomposition_fig4_regions(fig5_noise):
    rec = run_decomposition(load_preset("fig4"))
    assert all(r["region"] >= -1e-8 for r in rec.rows)
    dec = {r["protocol"]: r["region"] for r in rec.rows if r["stage"] == "decoder"}
    assert dec["ghz-inv"] >= dec["ghz-h"]


def test_decomposition_with_extra_circuit():
    extra = {"mine": build_baseline("ghz-h", 3)}
    rec = run_decomposition(small_config(qubits=(3,)), 3, extra)
    mine = [r["value"] for r in rec.rows if r["protocol"] == "mine"]
    ref = [r["value"] for r in rec.rows if r["protocol"] == "ghz-h"]
    assert mine == ref


def test_expected_cfi_matches_distribution_objective(fig5_noise):
    structure = propose(3, ConnectivityGraph.chain(3), Hyperparams(1, 3, 1), seed=2)
    theta = np.linspace(0.1, 3.0, structure.n_params)
    x, w = gaussian_nodes(1.0, 0.3, 9)
    cfg = small_config(noise=fig5_noise)
    direct = expected_cfi(ExactBackend(), bind_parameters(structure, theta), x, w, 20e-6, fig5_noise)
    assert distribution_objective(structure, cfg, x, w)(theta, 20e-6) == pytest.approx(direct, rel=1e-12)
