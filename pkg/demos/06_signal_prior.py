"""
Tuning for the signal you expect
================================

When the accumulated phase is known to lie near 1 rad, tuning the angles for
that prior beats tuning them for a flat prior over the whole circle.
"""

# %%
import numpy as np

from metroforge import ConnectivityGraph, Hyperparams, NoiseModel, OptimizerSettings, optimize_continuous, propose
from metroforge.harness import ExperimentConfig, gaussian_nodes, uniform_nodes
from metroforge.harness.experiments import distribution_objective

config = ExperimentConfig(noise=NoiseModel.ibm_average(), qubits=(3,))
structure = propose(3, ConnectivityGraph.chain(3), Hyperparams(1, 2, 1), seed=4)
settings = OptimizerSettings(max_evaluations=1500, restarts=2)
t = 20e-6

# %%
flat = distribution_objective(structure, config, *uniform_nodes(16))
theta_flat, _, v_flat, _ = optimize_continuous(flat, structure.n_params, settings, seed=0, t0=t, optimize_t=False)
print("flat prior E[CFI] = %.3f" % v_flat)

# %%
for sigma in (0.1, 0.3, 0.6, 1.0):
    target = distribution_objective(structure, config, *gaussian_nodes(1.0, sigma, 9))
    _, _, v, _ = optimize_continuous(
        target, structure.n_params, settings, seed=1, t0=t, optimize_t=False, warm_start=theta_flat
    )
    print("sigma %.1f  tuned on prior %.3f  tuned flat %.3f  ratio %.3f" % (sigma, v, target(theta_flat, t), v / target(theta_flat, t)))
