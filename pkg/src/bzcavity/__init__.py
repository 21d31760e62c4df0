"""Cold atoms Bloch oscillating in a lattice formed by a driven cavity mode.

Mean-field atom-light dynamics, an adiabatic (Houston-state) reference track,
spectral analysis of the transmitted-light signal, and the single-shot
force-sensing budget.
"""

__version__ = "0.1.0"

from .errors import ConfigError, ConvergenceError, FitError, NumericalError
from .units import PhysicalParams, ScaledParams, preset, scale, unscale
from .bandstructure import BlochSolution, band_populations, coupling_overlap, solve_bloch
from .cavity import cavity_substep, depth_from_alpha, photons_for_depth, steady_alpha
from .trace import Mode, RunTrace
from .adiabatic import adiabatic_trace, selfconsistent_depth
from .dynamics import AtomFieldState, InitSpec, NumericsSpec, atom_substep, initialize, simulate
from .analysis import HarmonicFit, Spectrum, compare_traces, fit_harmonics, spectrum
from .sensing import (
    SensitivityReport,
    heating,
    monte_carlo_sigma,
    scaling_laws,
    sensitivity_report,
    shot_noise_sigma,
)

__all__ = [
    "AtomFieldState",
    "BlochSolution",
    "ConfigError",
    "ConvergenceError",
    "FitError",
    "HarmonicFit",
    "InitSpec",
    "Mode",
    "NumericalError",
    "NumericsSpec",
    "PhysicalParams",
    "RunTrace",
    "ScaledParams",
    "SensitivityReport",
    "Spectrum",
    "adiabatic_trace",
    "atom_substep",
    "band_populations",
    "cavity_substep",
    "compare_traces",
    "coupling_overlap",
    "depth_from_alpha",
    "fit_harmonics",
    "heating",
    "initialize",
    "monte_carlo_sigma",
    "photons_for_depth",
    "preset",
    "scale",
    "scaling_laws",
    "selfconsistent_depth",
    "sensitivity_report",
    "shot_noise_sigma",
    "simulate",
    "solve_bloch",
    "spectrum",
    "steady_alpha",
    "unscale",
]
