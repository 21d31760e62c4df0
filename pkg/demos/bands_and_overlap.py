"""
Lowest bands of a cos^2 lattice
===============================

Band energies and the field overlap of the lowest band across the zone.
"""

import numpy as np

from bzcavity import solve_bloch

qs = np.linspace(-1, 1, 9)

# the overlap is what the cavity sees; it changes across the zone
for s in (1.0, 3.0, 10.0):
    print(f"s = {s:4.1f} E_R")
    for q in qs:
        sol = solve_bloch(q, s)
        e = sol.energies[:3]
        print(f"  q={q:+.2f}  E0={e[0]:7.4f}  E1={e[1]:7.4f}  E2={e[2]:7.4f}  O={sol.overlap0:.5f}")

# a red lattice traps atoms at the antinodes, so O -> 1 - O
blue = solve_bloch(0.0, 3.0, sign=1).overlap0
red = solve_bloch(0.0, 3.0, sign=-1).overlap0
print(f"blue O = {blue:.5f}, red O = {red:.5f}, sum = {blue + red:.12f}")
