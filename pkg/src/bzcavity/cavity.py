"""Light-field side of the coupled problem.

The mean-field cavity amplitude obeys

    d(alpha)/dt = -i (N g^2 / delta) alpha + eta - kappa alpha,

with ``g^2 = g0^2 O`` set by the atomic overlap ``O``. All functions take rates
in one consistent unit system (rad/s, or E_R/hbar for recoil units).
"""

from __future__ import annotations

import numpy as np

from .units import HBAR


def _loaded_rate(kappa, n_atoms, g2, delta):
    if delta == 0:
        raise ValueError("delta must be non-zero")
    return kappa + 1j * n_atoms * g2 / delta


def steady_alpha(eta, kappa, n_atoms, g2, delta) -> complex:
    """Static-equilibrium amplitude ``(eta/kappa) / (1 + i N g^2 / (kappa delta))``."""
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    return eta / _loaded_rate(kappa, n_atoms, g2, delta)


def cavity_substep(alpha, g2, dt, *, eta, kappa, n_atoms, delta) -> complex:
    """Propagate ``alpha`` over ``dt`` exactly with ``g2`` held fixed.

    The frozen-coupling equation is linear, so
    ``alpha' = a_ss + (alpha - a_ss) exp(-lambda dt)`` with
    ``lambda = kappa + i N g2 / delta`` and ``a_ss = eta / lambda``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    lam = _loaded_rate(kappa, n_atoms, g2, delta)
    a_ss = eta / lam
    return a_ss + (alpha - a_ss) * np.exp(-lam * dt)


def depth_from_alpha(alpha, g0, delta, recoil_energy=None) -> float:
    """Signed lattice depth ``hbar g0^2 |alpha|^2 / delta`` in units of E_R.

    With ``recoil_energy=None`` the rates are taken in E_R/hbar units, so the
    depth is simply ``g0^2 |alpha|^2 / delta``. Otherwise they are SI rad/s.
    """
    if delta == 0:
        raise ValueError("delta must be non-zero")
    n_phot = np.abs(alpha) ** 2
    if recoil_energy is None:
        return g0**2 * n_phot / delta
    return HBAR * g0**2 * n_phot / (delta * recoil_energy)


def photons_for_depth(depth, g0, delta, recoil_energy=None) -> float:
    """Inverse of :func:`depth_from_alpha`: photon number giving ``depth`` (E_R)."""
    per_photon = depth_from_alpha(1.0, g0, delta, recoil_energy)
    if per_photon == 0:
        raise ValueError("g0 = 0: depth does not depend on photon number")
    n = depth / per_photon
    if n < 0:
        raise ValueError("depth sign must match the sign of delta")
    return n


def photon_current(alpha, kappa):
    """Transmitted photon rate ``|alpha|^2 kappa`` through one mirror."""
    return np.abs(alpha) ** 2 * kappa
