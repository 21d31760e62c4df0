"""Self-consistent time evolution of the atoms and the cavity field.

After the gauge transformation ``Psi = exp(-i F t z / hbar) Psi~`` the force
only shifts the quasimomentum, ``q(t) = q0 - f t``, and the atomic state stays
a single Bloch-type wave with coefficients ``c_n`` on ``exp(i (2n + q) z)``.
In recoil units the gauge-frame Hamiltonian is

    H(t) = diag((2n + q(t))^2) + s(t) [1/2 + (shift_+ + shift_-)/4],

with the signed depth ``s(t) = s_per_photon |alpha(t)|^2``.

One step of length ``dt`` is a symmetric composition: atom half-step with
the depth frozen at its current value, exact cavity step with ``g^2`` frozen
at the half-step overlap, atom half-step with the updated depth. Each atom
half-step is itself a kinetic/potential Strang split, with the kinetic phase
integrated exactly along the linear ``q(t)``.

In ``ELIMINATED`` mode the cavity step is replaced by the static response.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import __version__
from .adiabatic import selfconsistent_depth
from .bandstructure import DEFAULT_M, band_populations, overlap_from_coeffs, solve_bloch
from .cavity import steady_alpha
from .errors import NumericalError
from .trace import N_POP_COLUMNS, Mode, RunTrace, params_hash
from .units import ScaledParams


@dataclass(frozen=True)
class NumericsSpec:
    """Step sizes and guards.

    By default the grid is tied to the Bloch period. For a zero force (no
    Bloch period) give ``dt``, ``sample_dt`` and ``duration`` in seconds.

    ``basis_halfwidth=None`` picks ``max(16, periods + 8)``: atoms that Zener
    tunnel out of the lowest band gain one plane wave per Bloch period and
    must not reach the basis edge during the run.
    """

    basis_halfwidth: int | None = None
    steps_per_period: int = 4096
    samples_per_period: int = 256
    periods: int = 16
    dt: float | None = None
    sample_dt: float | None = None
    duration: float | None = None
    norm_tol: float = 1e-8
    edge_tol: float = 1e-8


@dataclass(frozen=True)
class InitSpec:
    q0: float = 0.0
    s_guess: float = 3.0


@dataclass
class AtomFieldState:
    coeffs: np.ndarray
    q: float
    alpha: complex
    t: float = 0.0

    @property
    def norm(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def copy(self) -> "AtomFieldState":
        return replace(self, coeffs=self.coeffs.copy())


class SplitStepper:
    """Unitary atom propagator on a fixed plane-wave basis of half-width ``M``."""

    def __init__(self, M: int = DEFAULT_M):
        self.M = M
        self.two_n = 2.0 * np.arange(-M, M + 1)
        shift = np.eye(2 * M + 1, k=1) + np.eye(2 * M + 1, k=-1)
        self.shift_eig, vecs = np.linalg.eigh(shift)
        self.vecs = vecs
        self.vecs_t = np.ascontiguousarray(vecs.T)
        self._exact_key = None

    def kinetic(self, c, q_a, q_b, h):
        # exact integral of (2n + q)^2 for q linear from q_a to q_b
        pa = self.two_n + q_a
        pb = self.two_n + q_b
        return c * np.exp((-1j * h / 3.0) * (pa * pa + pa * pb + pb * pb))

    def potential(self, c, s, h):
        phases = np.exp((-1j * s * h / 4.0) * self.shift_eig)
        return np.exp(-0.5j * s * h) * (self.vecs @ (phases * (self.vecs_t @ c)))

    def exact(self, c, q, s, h):
        """``exp(-i H h)`` for a static Hamiltonian (zero force)."""
        key = (q, s, h)
        if key != self._exact_key:
            energies, vecs = eigh_tridiagonal(
                (self.two_n + q) ** 2 + 0.5 * s, np.full(2 * self.M, 0.25 * s)
            )
            self._exact_key = key
            self._exact = (np.exp(-1j * h * energies), vecs)
        phases, vecs = self._exact
        return vecs @ (phases * (vecs.T @ c))

    def step(self, c, q, s, h, f):
        """Strang step K(h/2) V(h) K(h/2); returns coefficients and the unwrapped q.

        With ``f == 0`` the Hamiltonian is static over the step and is
        exponentiated exactly instead, so eigenstates stay stationary.
        """
        if f == 0:
            return self.exact(c, q, s, h), q
        q_mid = q - 0.5 * f * h
        q_end = q - f * h
        c = self.kinetic(c, q, q_mid, 0.5 * h)
        c = self.potential(c, s, h)
        c = self.kinetic(c, q_mid, q_end, 0.5 * h)
        return c, q_end


def wrap_state(c: np.ndarray, q: float) -> tuple[np.ndarray, float]:
    """Relabel plane waves so ``q`` returns to ``[-1, 1)``; physical momentum 2n+q is kept."""
    while q < -1.0:
        q += 2.0
        c = np.concatenate((c[1:], [0.0]))
    while q >= 1.0:
        q -= 2.0
        c = np.concatenate(([0.0], c[:-1]))
    return c, q


def atom_substep(
    state: AtomFieldState, s_frozen: float, dt: float, force: float, stepper: SplitStepper | None = None
) -> AtomFieldState:
    """Advance the atoms by ``dt`` (scaled time) at fixed signed depth ``s_frozen``.

    ``force`` is the scaled force ``f = F / (k_c E_R)``; q drifts as ``-f t``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    M = (state.coeffs.size - 1) // 2
    if stepper is None or stepper.M != M:
        stepper = SplitStepper(M)
    c, q = stepper.step(state.coeffs, state.q, s_frozen, dt, force)
    c, q = wrap_state(c, q)
    return AtomFieldState(coeffs=c, q=q, alpha=state.alpha, t=state.t + dt)


def initialize(
    params: ScaledParams, s_guess: float = 3.0, *, q0: float = 0.0, M: int = DEFAULT_M
) -> tuple[AtomFieldState, float]:
    """Self-consistent starting point: ground Bloch state at ``q0`` and its cavity field.

    Returns the state and the signed depth ``s0`` in E_R.
    """
    s0, overlap = selfconsistent_depth(q0, params, s_guess, M=M)
    sol = solve_bloch(q0, abs(s0), M, params.potential_sign)
    alpha = steady_alpha(
        params.eta_t, params.kappa_t, params.n_atoms, params.g0_t**2 * overlap, params.delta_t
    )
    return AtomFieldState(coeffs=sol.coeffs[0].copy(), q=float(q0), alpha=complex(alpha)), s0


def resolve_basis(params: ScaledParams, num: NumericsSpec) -> int:
    if num.basis_halfwidth is not None:
        return int(num.basis_halfwidth)
    if num.duration is not None and params.f_tilde != 0:
        periods = num.duration / params.bloch_period
    elif num.duration is not None:
        periods = 0
    else:
        periods = num.periods
    return max(DEFAULT_M, int(np.ceil(periods)) + 8)


def _grid(params: ScaledParams, num: NumericsSpec):
    """Return (dt, steps per sample, number of samples) in scaled time."""
    if num.dt is not None or num.sample_dt is not None or num.duration is not None:
        if None in (num.dt, num.sample_dt, num.duration):
            raise ValueError("explicit grids need dt, sample_dt and duration together")
        per_sample = int(round(num.sample_dt / num.dt))
        n_samples = int(round(num.duration / num.sample_dt))
        if per_sample < 1 or n_samples < 1:
            raise ValueError("sample_dt must be >= dt and duration >= sample_dt")
        return num.dt / params.time_unit, per_sample, n_samples
    if params.f_tilde == 0:
        raise ValueError("zero force: give dt, sample_dt and duration explicitly")
    if num.steps_per_period % num.samples_per_period:
        raise ValueError("steps_per_period must be a multiple of samples_per_period")
    per_sample = num.steps_per_period // num.samples_per_period
    dt = params.bloch_period_t / num.steps_per_period
    return dt, per_sample, num.periods * num.samples_per_period


def simulate(
    params: ScaledParams,
    init: InitSpec | None = None,
    numerics: NumericsSpec | None = None,
    mode: Mode | str = Mode.FULL,
) -> RunTrace:
    """Integrate the coupled atom-cavity equations and return a sampled trace.

    Raises
    ------
    NumericalError
        if the norm drifts by more than ``numerics.norm_tol`` over a Bloch
        period, or the outermost plane waves carry more than
        ``numerics.edge_tol`` of the population at a sample.
    """
    init = init or InitSpec()
    num = numerics or NumericsSpec()
    mode = Mode(mode)
    if mode is Mode.ADIABATIC:
        raise ValueError("use adiabatic.adiabatic_trace for the adiabatic track")

    M = resolve_basis(params, num)
    state, _ = initialize(params, init.s_guess, q0=init.q0, M=M)
    dt, per_sample, n_samples = _grid(params, num)
    check_every = max(1, round(params.bloch_period_t / dt)) if params.f_tilde != 0 else per_sample

    stepper = SplitStepper(M)
    f = params.f_tilde
    sign = params.potential_sign
    spp = params.s_per_photon
    g0sq = params.g0_t**2
    eta, kappa, n_atoms, delta = params.eta_t, params.kappa_t, params.n_atoms, params.delta_t
    lam_base = kappa
    load = 1j * n_atoms * g0sq / delta
    half = 0.5 * dt

    c = state.coeffs.astype(complex)
    q = state.q
    alpha = state.alpha
    if mode is Mode.ELIMINATED:
        alpha = eta / (lam_base + load * overlap_from_coeffs(c))

    n = n_samples + 1
    t_rec = np.empty(n)
    s_rec = np.empty(n)
    a_rec = np.empty(n, dtype=complex)
    o_rec = np.empty(n)
    q_rec = np.empty(n)
    p_rec = np.zeros((n, N_POP_COLUMNS))
    max_drift = 0.0
    max_edge = 0.0

    def record(i, step):
        nonlocal max_edge
        s_now = spp * (alpha.real**2 + alpha.imag**2)
        t_rec[i] = step * dt * params.time_unit
        s_rec[i] = s_now
        a_rec[i] = alpha
        o_rec[i] = overlap_from_coeffs(c)
        q_rec[i] = q
        pops = band_populations(c, q, abs(s_now), M, sign)
        k = min(N_POP_COLUMNS, pops.size)
        p_rec[i, :k] = pops[:k]
        edge = max(abs(c[0]) ** 2, abs(c[-1]) ** 2)
        max_edge = max(max_edge, edge)
        if edge > num.edge_tol:
            raise NumericalError(
                f"basis truncation: edge population {edge:.3e} > {num.edge_tol:g} at t={t_rec[i]:.4g} s;"
                " increase basis_halfwidth"
            )

    record(0, 0)
    norm_ref = float(np.vdot(c, c).real)
    total_steps = n_samples * per_sample
    eliminated = mode is Mode.ELIMINATED
    for step in range(1, total_steps + 1):
        s_a = spp * (alpha.real**2 + alpha.imag**2)
        c, q = stepper.step(c, q, s_a, half, f)
        o_mid = overlap_from_coeffs(c)
        lam = lam_base + load * o_mid
        a_ss = eta / lam
        if eliminated:
            alpha = a_ss
        else:
            alpha = a_ss + (alpha - a_ss) * np.exp(-lam * dt)
        s_b = spp * (alpha.real**2 + alpha.imag**2)
        c, q = stepper.step(c, q, s_b, half, f)
        if q < -1.0 or q >= 1.0:
            c, q = wrap_state(c, q)
        if eliminated:
            alpha = eta / (lam_base + load * overlap_from_coeffs(c))
        if step % check_every == 0:
            norm = float(np.vdot(c, c).real)
            drift = abs(norm - norm_ref)
            max_drift = max(max_drift, drift)
            if drift > num.norm_tol:
                raise NumericalError(
                    f"norm drift {drift:.3e} over one period exceeds {num.norm_tol:g}; reduce dt"
                )
            norm_ref = norm
        if step % per_sample == 0:
            record(step // per_sample, step)

    meta = {
        "mode": mode.value,
        "params": asdict(params),
        "params_hash": params_hash(asdict(params)),
        "init": asdict(init),
        "numerics": asdict(num),
        "basis_halfwidth": M,
        "dt_s": dt * params.time_unit,
        "sample_dt_s": dt * per_sample * params.time_unit,
        "steps": total_steps,
        "omega_B": params.omega_B,
        "max_norm_drift": max_drift,
        "max_edge_population": max_edge,
        "final_norm": float(np.vdot(c, c).real),
        "code_version": __version__,
    }
    return RunTrace(
        t=t_rec, s=s_rec, alpha=a_rec, overlap=o_rec, populations=p_rec, q=q_rec, mode=mode, metadata=meta
    )
