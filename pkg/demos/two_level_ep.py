"""One avoided crossing, continued to complex eta.

The 2x2 diabatic model has an exceptional point where the channel energy
equals E_r - i*delta.  There the adiabatic pair coalesces at E_r - i*delta/2.
Away from it a single rotated channel gives the resonance only a transient
width: one discrete box state is not a continuum, which is why the full
model couples the resonance to every crossing at once.

Run:  python3 demos/two_level_ep.py
"""

import numpy as np

from stabcs.contfit import ContinuumChannel
from stabcs.diabatize import TwoLevelDiabat, diabatize, ep_location, synthetic_crossing
from stabcs.expost_cs import DiabaticModel, spectrum

E_r, delta, eta_c, alpha = 1.5, 0.01, 0.3, 2.4

# Synthetic adiabatic data and their diabatization.
etas = np.linspace(eta_c - 0.05, eta_c + 0.05, 21)
channel = ContinuumChannel(eta_c, alpha, E_anchor=E_r)
d = diabatize(synthetic_crossing(etas, E_r, delta, channel.energy(etas)))
print(f"recovered E_r = {d.E_r:.12f}, delta = {d.delta:.12f}, sigma = {d.sigma:.1e}")

# Exceptional point of the exponential channel, and the pair there.
eta_ep, e_ep = ep_location(TwoLevelDiabat(E_r, delta, eta_c, alpha * E_r), channel)
vals = spectrum(DiabaticModel(E_r, [channel], [delta]), eta_ep).values
print(f"eta_EP = {eta_ep:.8f}")
print(f"pair at eta_EP: {vals[0]:.10f}, {vals[1]:.10f} (expected {e_ep:.10f})")
print(f"pair mean error {abs(vals.mean() - e_ep):.1e}; split {abs(vals[0] - vals[1]):.1e}, "
      f"about sqrt(eps * delta) = {np.sqrt(np.finfo(float).eps * delta):.1e}")

# Along eta_c + i*theta the width peaks near Im(eta_EP) and then decays again.
for theta in (0.001, 0.003, 0.01, 0.1, 0.5):
    s = spectrum(DiabaticModel(E_r, [channel], [delta]), eta_c + 1j * theta)
    print(f"theta = {theta:<6} resonance {s.resonance_energy:.6f}")
