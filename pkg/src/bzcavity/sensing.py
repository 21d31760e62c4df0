"""Force-sensing budget: heating, coherent measurement time, shot-noise limit.

Momentum diffusion sets the usable observation time. The standing-wave term
is ``D_sw = (hbar k)^2 / (2 tau_sp)`` with the antinode scattering rate
``1/tau_sp = 2 gamma |alpha|^2 g0^2 / delta^2``; the cavity adds
``D_cav = 2 D_sw C sin^2(2 k z)``. Coherence is taken as lost once the
momentum spread reaches ``hbar k`` (half the Brillouin zone), giving
``tau = tau_sp / (1 + C)`` with the ground-band average ``sin^2 -> 1/2``.

Over that time a detection rate ``R (1 + eps cos w t)`` read out with
efficiency ``xi`` fixes ``w`` to ``2 pi tau^(-3/2) / (eps sqrt(xi R))``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .analysis import fit_harmonics_samples
from .errors import FitError
from .units import HBAR, PhysicalParams

GROUND_BAND_SIN2 = 0.5


@dataclass(frozen=True)
class HeatingBudget:
    tau_sp: float  # s
    D_sw: float  # (hbar k_c)^2 / s
    D_cav: float  # (hbar k_c)^2 / s
    tau: float  # s


def heating(params: PhysicalParams, photon_number: float, sin2: float = GROUND_BAND_SIN2) -> HeatingBudget:
    """Diffusion constants and coherent measurement time at a given photon number."""
    if photon_number < 0:
        raise ValueError("photon_number must be non-negative")
    rate_sp = 2 * params.gamma * photon_number * params.g0**2 / params.delta**2
    tau_sp = 1.0 / rate_sp if rate_sp > 0 else math.inf
    d_sw = 0.5 * rate_sp
    d_cav = 2 * d_sw * params.cooperativity * sin2
    # sigma_p^2 = 2 D tau reaches (hbar k)^2
    tau = 0.5 / (d_sw + d_cav) if d_sw > 0 else math.inf
    return HeatingBudget(tau_sp=tau_sp, D_sw=d_sw, D_cav=d_cav, tau=tau)


def shot_noise_sigma(rate: float, epsilon: float, xi: float, tau: float) -> float:
    """Shot-noise frequency uncertainty (rad/s) of a modulated photon stream."""
    if epsilon == 0:
        raise ValueError("epsilon = 0: no modulation, frequency is undetermined")
    if not (rate > 0 and epsilon > 0 and tau > 0 and 0 < xi <= 1):
        raise ValueError("need rate, epsilon, tau > 0 and xi in (0, 1]")
    return 2 * math.pi * tau**-1.5 / (epsilon * math.sqrt(xi * rate))


@dataclass(frozen=True)
class ScalingResult:
    n_atoms: float
    tau: float  # s
    delta: float  # rad/s, sign of x
    sigma_omega: float  # rad/s
    g0sq_over_kappa: float  # rad/s


def scaling_laws(
    depth: float,
    x: float,
    epsilon: float,
    cooperativity: float,
    gamma: float,
    xi: float,
    n_atoms: float,
    recoil_energy: float,
) -> ScalingResult:
    """Closed forms at fixed depth, collective coupling and modulation index.

    ``depth`` is in E_R. Raising N together with detuning and pump intensity
    keeps ``s``, ``x`` and ``eps`` fixed; then

        tau   = hbar / (s x) * N C / (1 + C)
        delta = (2 gamma / x) N C
        sigma = 2 pi s x^2 / (sqrt(xi) hbar eps) / N^2 * (1/C + 1)^(3/2)

    with ``s`` as an energy. Magnitudes of ``s`` and ``x`` are used; the
    returned detuning keeps the sign of ``x``.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if epsilon <= 0 or not 0 < xi <= 1 or cooperativity <= 0 or x == 0 or depth == 0:
        raise ValueError("need epsilon, C > 0, x, depth != 0, xi in (0, 1]")
    s_energy = abs(depth) * recoil_energy
    ax = abs(x)
    C = cooperativity
    tau = HBAR / (s_energy * ax) * n_atoms * C / (1 + C)
    delta = math.copysign(2 * gamma / ax * n_atoms * C, x)
    sigma = 2 * math.pi * s_energy * ax**2 / (math.sqrt(xi) * HBAR * epsilon) / n_atoms**2 * (1 / C + 1) ** 1.5
    return ScalingResult(
        n_atoms=n_atoms,
        tau=tau,
        delta=delta,
        sigma_omega=sigma,
        g0sq_over_kappa=ax * abs(delta) / n_atoms,
    )


@dataclass(frozen=True)
class SensitivityReport:
    tau_sp: float
    D_sw: float
    D_cav: float
    tau: float
    R: float
    epsilon: float
    sigma_omega: float
    sigma_ratio: float
    delta_required: float
    photon_number: float
    sigma_omega_closed_form: float
    g0sq_over_kappa: float

    def to_dict(self) -> dict:
        return asdict(self)


def sensitivity_report(params: PhysicalParams, depth: float, epsilon: float) -> SensitivityReport:
    """Compose heating, cavity output rate and shot noise for a lattice of ``depth`` E_R.

    The photon number follows from ``s = hbar g0^2 |alpha|^2 / delta``; the
    detection rate is ``R = |alpha|^2 kappa``.
    """
    per_photon = HBAR * params.g0**2 / (abs(params.delta) * params.recoil_energy)
    n_phot = abs(depth) / per_photon
    budget = heating(params, n_phot)
    rate = n_phot * params.kappa
    sigma = shot_noise_sigma(rate, epsilon, params.detector_efficiency, budget.tau)
    closed = scaling_laws(
        depth,
        params.x,
        epsilon,
        params.cooperativity,
        params.gamma,
        params.detector_efficiency,
        params.n_atoms,
        params.recoil_energy,
    )
    return SensitivityReport(
        tau_sp=budget.tau_sp,
        D_sw=budget.D_sw,
        D_cav=budget.D_cav,
        tau=budget.tau,
        R=rate,
        epsilon=epsilon,
        sigma_omega=sigma,
        sigma_ratio=sigma / abs(params.omega_B) if params.omega_B else math.inf,
        delta_required=closed.delta,
        photon_number=n_phot,
        sigma_omega_closed_form=closed.sigma_omega,
        g0sq_over_kappa=closed.g0sq_over_kappa,
    )


@dataclass(frozen=True)
class MonteCarloResult:
    sigma_empirical: float
    sigma_formula: float
    estimates: np.ndarray
    failures: int
    trials: int
    valid: bool

    @property
    def ratio(self) -> float:
        return self.sigma_empirical / self.sigma_formula

    @property
    def failure_fraction(self) -> float:
        return self.failures / self.trials


def _one_trial(args):
    seed, rate, epsilon, xi, tau, omega, bins = args
    rng = np.random.default_rng(seed)
    edges = np.linspace(0.0, tau, bins + 1)
    # exact integral of the rate over each bin
    mean = xi * rate * (np.diff(edges) + epsilon * np.diff(np.sin(omega * edges)) / omega)
    counts = rng.poisson(np.clip(mean, 0.0, None)).astype(float)
    centres = 0.5 * (edges[:-1] + edges[1:])
    try:
        fit = fit_harmonics_samples(centres, counts, K=1)
    except (FitError, ValueError, np.linalg.LinAlgError):
        return math.nan
    return fit.omega


def monte_carlo_sigma(
    rate: float,
    epsilon: float,
    xi: float,
    tau: float,
    omega: float,
    trials: int = 200,
    *,
    bins_per_period: int = 32,
    seed: int = 0,
    workers: int = 1,
    max_failure_fraction: float = 0.05,
) -> MonteCarloResult:
    """Empirical scatter of fitted frequencies from Poisson-sampled photon records.

    A trial fails if the fit raises or lands more than one resolution
    bandwidth (``2 pi / tau``) from ``omega``. The run is flagged invalid when
    failures exceed ``max_failure_fraction``.
    """
    if trials < 2:
        raise ValueError("need at least two trials")
    if bins_per_period < 16:
        raise ValueError("binning must resolve the signal (>= 16 bins per period)")
    bins = int(math.ceil(bins_per_period * omega * tau / (2 * math.pi)))
    seeds = np.random.SeedSequence(seed).generate_state(trials)
    jobs = [(int(s), rate, epsilon, xi, tau, omega, bins) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            estimates = np.array(list(pool.map(_one_trial, jobs, chunksize=8)))
    else:
        estimates = np.array([_one_trial(j) for j in jobs])
    ok = np.isfinite(estimates) & (np.abs(estimates - omega) < 2 * math.pi / tau)
    failures = int(trials - ok.sum())
    good = estimates[ok]
    empirical = float(np.std(good, ddof=1)) if good.size > 1 else math.inf
    try:
        formula = shot_noise_sigma(rate, epsilon, xi, tau)
    except ValueError:
        formula = math.inf
    return MonteCarloResult(
        sigma_empirical=empirical,
        sigma_formula=formula,
        estimates=estimates,
        failures=failures,
        trials=trials,
        valid=failures <= max_failure_fraction * trials,
    )
