"""Adiabatic (Houston-wave) track with a self-consistent lattice depth.

Within one band the atoms follow the instantaneous Bloch state at
``q(t) = q0 - f t``, and the cavity instantly adapts to the overlap ``O(q, s)``.
The depth then solves the scalar fixed point

    |s| = |s_max| / (1 + (x O(q, s))^2),

where ``s_max`` is the empty-cavity depth and ``x = N g0^2 / (kappa delta)``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .bandstructure import DEFAULT_M, solve_bloch
from .cavity import steady_alpha
from .errors import ConvergenceError
from .trace import N_POP_COLUMNS, Mode, RunTrace
from .units import ScaledParams

DAMPING = 0.5
TOLERANCE = 1e-10
MAX_ITER = 1000


def wrap_q(q):
    """Map quasimomentum onto the first zone ``[-1, 1)``."""
    return np.mod(np.asarray(q) + 1.0, 2.0) - 1.0


def _lowest_band_overlap(q, s_abs, M, sign):
    return solve_bloch(q, s_abs, M, sign).overlap0


def selfconsistent_depth(
    q: float,
    params: ScaledParams,
    s_guess: float = 3.0,
    *,
    M: int = DEFAULT_M,
    weight: float = DAMPING,
    tol: float = TOLERANCE,
    max_iter: int = MAX_ITER,
    overlap_fn=None,
) -> tuple[float, float]:
    """Self-consistent signed depth (E_R) and lowest-band overlap at ``q``.

    Damped iteration ``s <- (1 - weight) s + weight F(s)`` on the magnitude,
    stopping when successive iterates differ by less than ``tol`` E_R.
    ``overlap_fn(q, |s|)`` replaces the Bloch-band overlap, for checks.

    Raises
    ------
    ConvergenceError
        with the iterate history if ``max_iter`` is exhausted; a persistent
        oscillation there points to a multistable cavity response.
    """
    if not s_guess > 0:
        raise ValueError("s_guess must be positive (depth magnitude in E_R)")
    sign = params.potential_sign
    s_top = abs(params.s_max)
    load = params.u_t / params.kappa_t  # x
    if overlap_fn is None:
        overlap_fn = partial(_lowest_band_overlap, M=M, sign=sign)

    if load == 0.0:
        return sign * s_top, float(overlap_fn(q, s_top))

    s = float(s_guess)
    history = [s]
    for _ in range(max_iter):
        o = float(overlap_fn(q, s))
        target = s_top / (1.0 + (load * o) ** 2)
        s_next = (1.0 - weight) * s + weight * target
        history.append(s_next)
        if abs(s_next - s) < tol:
            return sign * s_next, float(overlap_fn(q, s_next))
        s = s_next
    raise ConvergenceError(
        f"self-consistent depth did not converge at q={q:g} in {max_iter} iterations",
        history,
    )


def _depth_and_energy(q, params, s_guess, M):
    s, o = selfconsistent_depth(q, params, s_guess, M=M)
    e0 = solve_bloch(q, abs(s), M, params.potential_sign).energies[0]
    return s, o, e0


def adiabatic_trace(
    params: ScaledParams,
    periods: int = 16,
    samples_per_period: int = 256,
    *,
    q0: float = 0.0,
    M: int = DEFAULT_M,
    s_guess: float = 3.0,
    warm_start: bool = True,
    workers: int = 1,
) -> RunTrace:
    """Sample the self-consistent adiabatic solution on a uniform time grid.

    One Bloch period is solved and tiled, so the trace is exactly periodic.
    With ``warm_start`` each quasimomentum starts from its neighbour's
    solution (sequential); otherwise points are independent and may be spread
    over ``workers`` processes.
    """
    if params.f_tilde == 0:
        raise ValueError("adiabatic trace needs a non-zero force")
    S = int(samples_per_period)
    j = np.arange(S)
    # q(t) = q0 - f t advances by -2 per Bloch period
    q_cell = wrap_q(q0 - np.sign(params.f_tilde) * 2.0 * j / S)

    s_cell = np.empty(S)
    o_cell = np.empty(S)
    e_cell = np.empty(S)
    if warm_start:
        guess = s_guess
        for i, q in enumerate(q_cell):
            s_cell[i], o_cell[i], e_cell[i] = _depth_and_energy(q, params, guess, M)
            guess = abs(s_cell[i])
    else:
        job = partial(_depth_and_energy, params=params, s_guess=s_guess, M=M)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                out = list(pool.map(job, q_cell))
        else:
            out = [job(q) for q in q_cell]
        for i, (s_i, o_i, e_i) in enumerate(out):
            s_cell[i], o_cell[i], e_cell[i] = s_i, o_i, e_i

    n = periods * S + 1
    idx = np.arange(n) % S
    s = s_cell[idx]
    overlap = o_cell[idx]
    q = q_cell[idx]
    energy = e_cell[idx]

    tau_b = params.bloch_period_t
    t_scaled = np.arange(n) * (tau_b / S)
    t = t_scaled * params.time_unit
    g2 = params.g0_t**2 * overlap
    alpha = steady_alpha(params.eta_t, params.kappa_t, params.n_atoms, g2, params.delta_t)
    pops = np.zeros((n, N_POP_COLUMNS))
    pops[:, 0] = 1.0
    phase = -cumulative_trapezoid(energy, t_scaled, initial=0.0)

    return RunTrace(
        t=t,
        s=s,
        alpha=np.asarray(alpha, dtype=complex),
        overlap=overlap,
        populations=pops,
        q=q,
        mode=Mode.ADIABATIC,
        metadata={
            "periods": periods,
            "samples_per_period": S,
            "basis_halfwidth": M,
            "q0": q0,
            "bloch_period_s": tau_b * params.time_unit,
            "omega_B": params.omega_B,
        },
        houston_phase=phase,
    )


def depth_curve(params: ScaledParams, qs, *, M: int = DEFAULT_M, s_guess: float = 3.0):
    """Self-consistent depth over an arbitrary set of quasimomenta (warm-started)."""
    out = np.empty(len(qs))
    guess = s_guess
    for i, q in enumerate(qs):
        out[i], _ = selfconsistent_depth(float(q), params, guess, M=M)
        guess = abs(out[i])
    return out

