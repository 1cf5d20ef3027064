"""
Searching for a better sensing circuit
======================================

Random mirrored structures are proposed on a qubit chain, their angles and
interrogation time are tuned with Powell's method, and the best is kept.
A small budget keeps this demo under a minute.
"""

# %%
from metroforge import (
    ConnectivityGraph,
    NoiseModel,
    OptimizerSettings,
    baseline_t_sweep,
    circuit_objective_factory,
    outer_loop,
)
from metroforge.baselines import default_t_grid

n, omega = 3, 1e4
noise = NoiseModel.ibm_average()
graph = ConnectivityGraph.chain(n)

# %%
result = outer_loop(
    n,
    graph,
    None,
    iter_max=6,
    make_objective=circuit_objective_factory(noise, omega),
    settings=OptimizerSettings(max_evaluations=800),
    seed=2024,
)
for r in result.records:
    print(r.iteration, r.hyperparams, "objective %.3e" % r.objective)

# %%
best_baseline = max(baseline_t_sweep(k, n, noise, default_t_grid(), omega)[1] for k in ("parallel-ramsey", "ghz-h", "ghz-inv"))
print("best structure:", [g.shape() for g in result.best_structure.encoder])
print("t* = %.2f us" % (result.best_t * 1e6))
print("optimized / best baseline = %.3f" % (result.best_objective / best_baseline))
