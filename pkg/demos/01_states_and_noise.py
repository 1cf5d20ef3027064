"""
Density matrices under device noise
===================================

A short tour of the simulator: prepare a GHZ state, let it sit under T1/T2
decoherence and watch its coherence decay.
"""

# %%
import numpy as np

from metroforge import NoiseModel, build_baseline, measure, run_circuit
from metroforge.noise import interrogation_channel
from metroforge.simulator import purity, run_gates, zero_state

noise = NoiseModel.ibm_average()
print(noise)

# %%
# The GHZ encoder is H followed by a CNOT chain.  With gate noise switched on
# the state is already slightly mixed before the signal arrives.
ghz = build_baseline("ghz-h", 3)
clean = run_gates(zero_state(3), ghz.encoder, NoiseModel.noiseless())
noisy = run_gates(zero_state(3), ghz.encoder, noise)
print("purity clean %.4f, after noisy gates %.4f" % (purity(clean), purity(noisy)))

# %%
# One qubit in |+> loses coherence as exp(-t/T2).
plus = np.full((2, 2), 0.5, dtype=complex)
for t in (0, 20e-6, 60e-6, 200e-6):
    out = interrogation_channel(t, noise.T1, noise.T2).apply(plus)
    print("t = %5.0f us  |rho01| = %.4f  exp(-t/T2)/2 = %.4f" % (t * 1e6, abs(out[0, 1]), 0.5 * np.exp(-t / noise.T2)))

# %%
# The full circuit: encoder, signal phase, decoherence, decoder, readout error.
for phi in (0.0, np.pi / 6, np.pi / 3):
    p = measure(run_circuit(ghz, phi, 20e-6, noise), noise)
    print("phi = %.3f  P(000) = %.4f  P(111) = %.4f" % (phi, p[0], p[-1]))
