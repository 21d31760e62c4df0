"""
Force-sensing budget
====================

From lattice depth and modulation index to a frequency uncertainty, and how
the closed forms scale with atom number.
"""

import numpy as np

from bzcavity import PhysicalParams, preset, scaling_laws, sensitivity_report

two_pi = 2 * np.pi
rb = preset("Rb87")
params = PhysicalParams(
    g0=two_pi * 2.8e6, kappa=two_pi * 1.0e6, delta=-two_pi * 1.0e12, eta=two_pi * 39e6,
    n_atoms=5e4, force=rb["atom_mass"] * 9.81, detector_efficiency=0.6, **rb,
)

rep = sensitivity_report(params, depth=3.0, epsilon=0.013)
print(f"photons {rep.photon_number:.0f}, tau_sp {rep.tau_sp:.2f} s, tau {rep.tau:.2f} s")
print(f"R = {rep.R:.3e} /s, sigma_omega = {rep.sigma_omega:.3e} rad/s ({1e6 * rep.sigma_ratio:.2f} ppm)")

# N -> mu N with delta and pump scaled to keep s, x and eps fixed
for n in (5e4, 5e5, 5e6):
    r = scaling_laws(3.0, params.x, 0.013, params.cooperativity, params.gamma, 0.6, n, params.recoil_energy)
    print(f"N={n:.0e}: tau {r.tau:8.1f} s, |delta|/2pi {abs(r.delta) / two_pi:.2e} Hz, "
          f"sigma/omega_B {r.sigma_omega / params.omega_B:.2e}")
