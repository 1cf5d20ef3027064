"""
Tuning the interrogation time of the reference protocols
========================================================

Longer exposure collects more phase but also more decoherence.  The objective
t^2 CFI / (t + t_overhead) trades the two; each protocol has its own best t.
"""

# %%
from metroforge import NoiseModel, baseline_t_sweep
from metroforge.baselines import default_t_grid

noise = NoiseModel.ibm_average()
omega = 1e4  # rad/s
grid = default_t_grid()

# %%
for n in (1, 3, 5):
    for kind in ("parallel-ramsey", "ghz-h", "ghz-inv"):
        t, value = baseline_t_sweep(kind, n, noise, grid, omega)
        print("N=%d  %-16s t* = %7.2f us  objective = %.3e" % (n, kind, t * 1e6, value))

# %%
# Without gate noise the inverse-chain decoder overtakes parallel Ramsey at N=3.
quiet = noise.without("gate")
for kind in ("parallel-ramsey", "ghz-inv"):
    print("no gate noise, N=3  %-16s %.3e" % (kind, baseline_t_sweep(kind, 3, quiet, grid, omega)[1]))
