"""
Where does the information go?
==============================

Noise stages are made ideal one at a time, from readout inward.  The gap
between consecutive values is the information lost to that stage.
"""

# %%
from metroforge.harness import load_preset, run_decomposition

config = load_preset("fig4")
record = run_decomposition(config)

# %%
for row in record.rows:
    print("%-16s %-14s value %.3f  region %.3f" % (row["protocol"], row["stage"], row["value"], row["region"]))
