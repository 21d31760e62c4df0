"""
Spectrum of the lattice depth
=============================

With stronger coupling the depth signal carries many harmonics of the Bloch
frequency, plus a weak broad background from interband motion.
"""

import numpy as np

from bzcavity import NumericsSpec, PhysicalParams, adiabatic_trace, preset, scale, simulate, spectrum

two_pi = 2 * np.pi
rb = preset("Rb87")
params = PhysicalParams(
    g0=two_pi * 2.8e6, kappa=two_pi * 1.0e6, delta=-two_pi * 0.39e12, eta=two_pi * 28e6,
    n_atoms=5e4, force=rb["atom_mass"] * 9.81, **rb,
)
sp = scale(params)
f_b = params.omega_B / two_pi

full = spectrum(simulate(sp, numerics=NumericsSpec(periods=16)))
adia = spectrum(adiabatic_trace(sp, periods=16))

print(f"resolution {full.resolution:.1f} Hz, Bloch frequency {f_b:.1f} Hz")
for n in range(1, 9):
    i = np.argmin(np.abs(full.freq - n * f_b))
    print(f"  n={n}: full {full.amplitude[i]:.3e}  adiabatic {adia.amplitude[i]:.3e}")

between = np.abs(full.freq / f_b - np.round(full.freq / f_b)) > 0.3
print("median between harmonics: full", f"{np.median(full.amplitude[between]):.1e}",
      "adiabatic", f"{np.median(adia.amplitude[between]):.1e}")
