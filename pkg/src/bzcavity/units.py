"""Physical inputs, recoil-unit scaling and closed-form derived quantities.

All internal computation uses recoil units: length ``1/k_c``, energy
``E_R = hbar^2 k_c^2 / 2m`` and time ``hbar / E_R``. Rates (``g0``, ``kappa``,
``gamma``, ``delta``, ``eta``) are angular frequencies in rad/s on the SI side
and in units of ``E_R/hbar`` on the scaled side. ``kappa`` and ``gamma`` are
half-widths: the cavity energy decays at ``2 kappa`` and the free-space
spontaneous emission rate is ``2 gamma``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, replace

from scipy import constants

from .errors import ConfigError

HBAR = constants.hbar
ATOMIC_MASS = constants.atomic_mass
STANDARD_GRAVITY = constants.g

# Dispersive model needs |delta| >> gamma; flagged below this ratio.
DISPERSIVE_RATIO = 100.0
# Low saturation needs eta^2 << (kappa delta / g0)^2; flagged above this ratio.
SATURATION_RATIO = 1e-2

_PRESETS = {
    # D2 line: Gamma = 2 pi x 6.0666 MHz, so the half-width is 2 pi x 3.0333 MHz.
    "Rb87": {
        "atom_mass": 86.909180527 * ATOMIC_MASS,
        "wavelength": 780e-9,
        "gamma": 2 * math.pi * 3.0333e6,
    },
    "Rb85": {
        "atom_mass": 84.911789738 * ATOMIC_MASS,
        "wavelength": 780e-9,
        "gamma": 2 * math.pi * 3.0333e6,
    },
    "Cs133": {
        "atom_mass": 132.905451961 * ATOMIC_MASS,
        "wavelength": 852e-9,
        "gamma": 2 * math.pi * 2.6168e6,
    },
}


def preset(name: str, **overrides) -> dict:
    """Return species defaults (mass, wavelength, gamma) as a partial field dict.

    Keyword overrides replace the preset values, e.g.
    ``preset("Rb87", wavelength=780e-9)``.
    """
    try:
        fields = dict(_PRESETS[name])
    except KeyError:
        known = ", ".join(sorted(_PRESETS))
        raise ConfigError(f"unknown atom preset {name!r} (known: {known})") from None
    unknown = set(overrides) - set(PhysicalParams.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown PhysicalParams fields: {sorted(unknown)}")
    fields.update(overrides)
    return fields


def preset_names() -> list[str]:
    return sorted(_PRESETS)


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional experiment inputs (SI, rates in rad/s)."""

    atom_mass: float
    wavelength: float
    g0: float
    kappa: float
    gamma: float
    delta: float
    eta: float
    n_atoms: float
    force: float
    detector_efficiency: float = 1.0

    def __post_init__(self):
        for name in ("atom_mass", "wavelength", "kappa", "gamma"):
            value = getattr(self, name)
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        if not self.n_atoms >= 0:
            raise ConfigError(f"n_atoms must be non-negative, got {self.n_atoms!r}")
        if not 0.0 <= self.detector_efficiency <= 1.0:
            raise ConfigError(
                f"detector_efficiency must lie in [0, 1], got {self.detector_efficiency!r}"
            )
        if self.delta == 0 or not math.isfinite(self.delta):
            raise ConfigError("delta must be finite and non-zero (dispersive coupling g0^2/delta)")
        for name in ("g0", "eta", "force"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"{name} must be finite")

    @property
    def k_c(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def lattice_period(self) -> float:
        return self.wavelength / 2

    @property
    def recoil_energy(self) -> float:
        return (HBAR * self.k_c) ** 2 / (2 * self.atom_mass)

    @property
    def omega_B(self) -> float:
        """Bloch angular frequency F d / hbar."""
        return self.force * self.lattice_period / HBAR

    @property
    def cooperativity(self) -> float:
        return self.g0**2 / (2 * self.kappa * self.gamma)

    @property
    def x(self) -> float:
        """Collective coupling N g0^2 / (kappa delta); carries the sign of delta."""
        return self.n_atoms * self.g0**2 / (self.kappa * self.delta)

    @property
    def photon_flux(self) -> float:
        """Incident photon rate I with eta = sqrt(kappa I)."""
        return self.eta**2 / self.kappa

    def validity_warnings(self) -> list[str]:
        """Human-readable notes for parameters outside the dispersive model's range."""
        notes = []
        if abs(self.delta) < DISPERSIVE_RATIO * self.gamma:
            notes.append(
                f"dispersive regime: |delta|/gamma = {abs(self.delta) / self.gamma:.3g} "
                f"< {DISPERSIVE_RATIO:g}"
            )
        if self.g0 != 0:
            sat = (self.eta * self.g0 / (self.kappa * self.delta)) ** 2
            if sat > SATURATION_RATIO:
                notes.append(
                    f"low saturation: eta^2 / (kappa delta / g0)^2 = {sat:.3g} > {SATURATION_RATIO:g}"
                )
        return notes

    def warn(self) -> None:
        for note in self.validity_warnings():
            warnings.warn(note, stacklevel=2)

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ScaledParams:
    """Dimensionless working set in recoil units plus derived SI quantities.

    Rates with a ``_t`` suffix are in units of ``E_R/hbar``. ``s_per_photon`` is
    the lattice depth (E_R) contributed by one intra-cavity photon,
    ``hbar g0^2 / (delta E_R)``; it carries the sign of delta, so the optical
    potential is ``s cos^2(k_c z)`` with signed ``s``.
    """

    recoil_energy: float
    time_unit: float
    length_unit: float
    f_tilde: float
    g0_t: float
    kappa_t: float
    gamma_t: float
    delta_t: float
    eta_t: float
    n_atoms: float
    detector_efficiency: float
    omega_B: float
    omega_ho: float
    cooperativity: float
    x: float
    photon_flux: float

    @property
    def omega_B_t(self) -> float:
        """Bloch frequency in scaled units; equals pi * f_tilde identically."""
        return math.pi * self.f_tilde

    @property
    def bloch_period_t(self) -> float:
        return 2.0 / self.f_tilde

    @property
    def bloch_period(self) -> float:
        return 2 * math.pi / self.omega_B

    @property
    def s_per_photon(self) -> float:
        return self.g0_t**2 / self.delta_t

    @property
    def s_max(self) -> float:
        """Signed depth of the empty cavity, hbar I g0^2 / (delta kappa) in E_R."""
        return self.s_per_photon * (self.eta_t / self.kappa_t) ** 2

    @property
    def potential_sign(self) -> int:
        return 1 if self.delta_t > 0 else -1

    @property
    def u_t(self) -> float:
        """Collective dispersive shift N g0^2 / delta (scaled)."""
        return self.n_atoms * self.g0_t**2 / self.delta_t


def harmonic_frequency(depth: float, recoil_energy: float) -> float:
    """Harmonic frequency (rad/s) at the bottom of a well of depth ``|depth|`` E_R.

    hbar omega_ho = 2 sqrt(s E_R); equivalent to 2 g0 |alpha| sqrt(E_R/(hbar delta)).
    """
    return 2 * math.sqrt(abs(depth)) * recoil_energy / HBAR


def scale(p: PhysicalParams) -> ScaledParams:
    e_r = p.recoil_energy
    t_unit = HBAR / e_r
    s_empty = HBAR * p.g0**2 / (p.delta * e_r) * (p.eta / p.kappa) ** 2
    return ScaledParams(
        recoil_energy=e_r,
        time_unit=t_unit,
        length_unit=1.0 / p.k_c,
        f_tilde=p.force / (p.k_c * e_r),
        g0_t=p.g0 * t_unit,
        kappa_t=p.kappa * t_unit,
        gamma_t=p.gamma * t_unit,
        delta_t=p.delta * t_unit,
        eta_t=p.eta * t_unit,
        n_atoms=p.n_atoms,
        detector_efficiency=p.detector_efficiency,
        omega_B=p.omega_B,
        omega_ho=harmonic_frequency(s_empty, e_r),
        cooperativity=p.cooperativity,
        x=p.x,
        photon_flux=p.photon_flux,
    )


def unscale(sp: ScaledParams) -> PhysicalParams:
    k_c = 1.0 / sp.length_unit
    t_unit = sp.time_unit
    return PhysicalParams(
        atom_mass=(HBAR * k_c) ** 2 / (2 * sp.recoil_energy),
        wavelength=2 * math.pi * sp.length_unit,
        g0=sp.g0_t / t_unit,
        kappa=sp.kappa_t / t_unit,
        gamma=sp.gamma_t / t_unit,
        delta=sp.delta_t / t_unit,
        eta=sp.eta_t / t_unit,
        n_atoms=sp.n_atoms,
        force=sp.f_tilde * k_c * sp.recoil_energy,
        detector_efficiency=sp.detector_efficiency,
    )
