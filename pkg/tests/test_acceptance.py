"""Acceptance checks, one per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary
(``pytest tests/test_acceptance.py``), then asserts. Simulations are shared
through module-scoped fixtures.
"""

import math
from pathlib import Path

import numpy as np
import pytest

from bzcavity import config, scale
from bzcavity.adiabatic import adiabatic_trace
from bzcavity.analysis import compare_traces, fit_harmonics, spectrum
from bzcavity.bandstructure import coupling_overlap, overlap_quadrature, solve_bloch
from bzcavity.cavity import cavity_substep
from bzcavity.dynamics import NumericsSpec, SplitStepper, simulate
from bzcavity.sensing import monte_carlo_sigma, scaling_laws, sensitivity_report, shot_noise_sigma
from bzcavity.trace import Mode
from hypothesis import given, settings
from hypothesis import strategies as st

from .conftest import TWO_PI, rb87_params

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
RESULTS: list[str] = []


def record(number, passed, detail):
    RESULTS.append(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {detail}")
    return passed


def _load(name, overrides=()):
    cfg = config.resolve(CONFIGS / f"{name}.yaml", overrides)
    return cfg, scale(config.physical_params(cfg))


def _run(cfg, sp, mode):
    return simulate(sp, config.init_spec(cfg), config.numerics_spec(cfg), mode)


class Runs:
    """Lazily computed traces shared by the acceptance tests."""

    def __init__(self):
        self._cache = {}

    def get(self, key):
        if key not in self._cache:
            self._cache[key] = self._make(*key)
        return self._cache[key]

    def _make(self, name, mode, index=None):
        if name == "sweep_x":
            cfg, _ = _load(name)
            point = config.sweep_points(cfg)[index]
            cfg = config.validate_dict(config.apply_overrides(cfg, point.items()))
            sp = scale(config.physical_params(cfg))
        else:
            cfg, sp = _load(name)
        if mode is Mode.ADIABATIC:
            d = cfg["dynamics"]
            return sp, adiabatic_trace(sp, d["periods"], d["samples_per_period"], q0=d["q0"])
        return sp, _run(cfg, sp, mode)


@pytest.fixture(scope="module")
def runs():
    return Runs()


def test_criterion_1_bloch_period_invariance(runs):
    rows = []
    for i in range(3):
        sp, trace = runs.get(("sweep_x", Mode.FULL, i))
        fit = fit_harmonics(trace, 4)
        rows.append((abs(sp.x), abs(trace.s[0]), fit.omega, fit.omega_err, sp.omega_B))
    rel = [abs(w / wb - 1) for _, _, w, _, wb in rows]
    ws = np.array([r[2] for r in rows])
    errs = np.array([r[3] for r in rows])
    spread_ok = all(
        abs(ws[i] - ws[j]) < 3 * math.hypot(errs[i], errs[j]) for i in range(3) for j in range(i + 1, 3)
    )
    depth_ok = all(abs(s0 - 3.0) < 0.45 for _, s0, *_ in rows)
    xs = ", ".join(f"x={x:.3f} s0={s0:.2f} dw/w={r:.1e}" for (x, s0, *_), r in zip(rows, rel))
    ok = record(1, max(rel) < 1e-4 and spread_ok and depth_ok, f"fundamental = Fd/hbar ({xs}); consistent={spread_ok}")
    assert ok


def test_criterion_2_weak_coupling_trace(runs):
    sp, full = runs.get(("weak_coupling", Mode.FULL))
    _, adia = runs.get(("weak_coupling", Mode.ADIABATIC))
    s0 = abs(full.s[0])
    eps = fit_harmonics(full, 4).epsilon
    nrms = compare_traces(full, adia, K=0)["nrms"]
    ok = abs(s0 - 3.0) <= 0.45 and abs(eps - 0.013) <= 0.003 and nrms < 0.10
    record(2, ok, f"s0={s0:.3f} E_R, eps={100 * eps:.2f}%, FULL vs ADIABATIC nrms={nrms:.3g} (x={sp.x:.3f})")
    assert ok


def _harmonic_masks(spec, f_b, guard=2):
    f = spec.freq
    n = np.round(f / f_b)
    near = np.abs(f - n * f_b) <= guard * spec.resolution
    return near, (~near) & (f > 0.5 * f_b)


def test_criterion_3_strong_coupling_spectrum(runs):
    sp, full = runs.get(("strong_coupling", Mode.FULL))
    _, adia = runs.get(("strong_coupling", Mode.ADIABATIC))
    _, weak = runs.get(("weak_coupling", Mode.FULL))
    f_b = sp.omega_B / TWO_PI
    spec_f, spec_a = spectrum(full), spectrum(adia)
    near, non = _harmonic_masks(spec_f, f_b)
    amp_f, amp_a = spec_f.amplitude, spec_a.amplitude
    floor = np.median(amp_f[non])
    lines = np.array([amp_f[np.argmin(np.abs(spec_f.freq - k * f_b))] for k in range(1, 7)])
    lines_ok = bool(np.all(lines > 10 * floor))
    high = non & (spec_f.freq > 6.5 * f_b)
    total_f = np.sum(amp_f[spec_f.freq > 0] ** 2)
    hf_full = np.sum(amp_f[high] ** 2) / total_f
    hf_adia = np.sum(amp_a[high] ** 2) / np.sum(amp_a[spec_a.freq > 0] ** 2)
    # broad: the non-harmonic power is spread over many bins, not a few lines
    p = np.sort(amp_f[high] ** 2)[::-1]
    bins_90 = int(np.searchsorted(np.cumsum(p), 0.9 * p.sum()) + 1)
    broad_ok = hf_full > 1e-6 and hf_full > 1e6 * hf_adia and bins_90 >= 20
    p0_strong = full.populations[:, 0].min()
    p0_weak = weak.populations[:, 0].min()
    ok = lines_ok and broad_ok and p0_strong < p0_weak
    record(
        3,
        ok,
        f"lines n=1..6 over floor x{lines.min() / floor:.0f}+; HF non-harmonic power FULL {hf_full:.2e} vs "
        f"ADIABATIC {hf_adia:.1e} over {bins_90} bins; min p0 {p0_strong:.4f} (x~1) < {p0_weak:.4f} (x~0.4)",
    )
    assert ok


def _chain_ok(rep, delta_thz):
    return (
        abs(rep.tau - 1.0) <= 0.1
        and abs(delta_thz - 1.0) <= 0.1
        and rep.photon_number >= 1400
        and 1.0 <= rep.sigma_ratio * 1e6 <= 1.5
    )


def test_criterion_4_metrology_chain(runs):
    p = rb87_params()
    rep = sensitivity_report(p, 3.0, 0.013)
    closed = scaling_laws(3.0, 0.4, 0.013, 1.3, p.gamma, 0.6, 5e4, p.recoil_energy)
    delta_thz = abs(closed.delta) / TWO_PI / 1e12
    # same chain fed with the depth and modulation of the simulated trace
    _, full = runs.get(("weak_coupling", Mode.FULL))
    fit = fit_harmonics(full, 4)
    depth = abs(fit.dc)
    sim = sensitivity_report(p, depth, fit.epsilon)
    sim_delta = abs(scaling_laws(depth, p.x, fit.epsilon, p.cooperativity, p.gamma, 0.6, 5e4, p.recoil_energy).delta)
    ok = _chain_ok(rep, delta_thz) and _chain_ok(sim, sim_delta / TWO_PI / 1e12)
    record(
        4, ok,
        f"C={p.cooperativity:.3f}, tau={rep.tau:.3f} s, delta_required=2pi x {delta_thz:.3f} THz, "
        f"photons={rep.photon_number:.0f}, sigma/omega_B={1e6 * rep.sigma_ratio:.2f} ppm; from the simulated trace "
        f"(s={depth:.2f}, eps={100 * fit.epsilon:.2f}%): tau={sim.tau:.3f} s, photons={sim.photon_number:.0f}, "
        f"{1e6 * sim.sigma_ratio:.2f} ppm",
    )
    assert ok


_IDENTITY_WORST = [0.0]


@settings(max_examples=200, deadline=None, derandomize=True)
@given(
    delta_hz=st.floats(min_value=1e10, max_value=1e13),
    sign=st.sampled_from([-1.0, 1.0]),
    eta_hz=st.floats(min_value=1e6, max_value=1e8),
    n=st.floats(min_value=1e2, max_value=1e7),
    g0_hz=st.floats(min_value=1e5, max_value=1e7),
    kappa_hz=st.floats(min_value=1e5, max_value=1e7),
    depth=st.floats(min_value=0.2, max_value=30),
    eps=st.floats(min_value=1e-4, max_value=0.5),
    xi=st.floats(min_value=0.05, max_value=1.0),
)
def _identity_case(delta_hz, sign, eta_hz, n, g0_hz, kappa_hz, depth, eps, xi):
    p = rb87_params(
        delta_hz=sign * delta_hz, eta_hz=eta_hz, n_atoms=n, g0=TWO_PI * g0_hz,
        kappa=TWO_PI * kappa_hz, detector_efficiency=xi,
    )
    pipeline = sensitivity_report(p, depth, eps).sigma_omega
    closed = scaling_laws(depth, p.x, eps, p.cooperativity, p.gamma, xi, n, p.recoil_energy).sigma_omega
    rel = abs(closed / pipeline - 1)
    _IDENTITY_WORST[0] = max(_IDENTITY_WORST[0], rel)
    assert rel < 1e-9


def test_criterion_5_closed_form_identity():
    try:
        _identity_case()
        ok = True
    except AssertionError:
        ok = False
    record(5, ok, f"closed-form sigma vs pipeline, 200 random sets, worst rel {_IDENTITY_WORST[0]:.1e}")
    assert ok


def test_criterion_6_monte_carlo():
    omega = TWO_PI * 833.0
    mc = monte_carlo_sigma(1e6, 0.05, 1.0, 0.05, omega, trials=400, seed=2024)
    ratio = mc.ratio
    ok = mc.valid and 1 / 1.5 <= ratio <= 1.5
    record(
        6, ok,
        f"empirical {mc.sigma_empirical:.4g} rad/s vs formula {mc.sigma_formula:.4g} rad/s, ratio {ratio:.3f}, "
        f"{mc.trials} trials, {mc.failures} failures",
    )
    assert ok


def test_criterion_7_numerical_hygiene(runs):
    checks = {}
    _, full = runs.get(("weak_coupling", Mode.FULL))
    checks["norm/period"] = full.metadata["max_norm_drift"]
    free = max(
        np.max(np.abs(np.sort((2 * np.arange(-16, 17) + q) ** 2) - solve_bloch(q, 0.0).energies))
        for q in np.linspace(-1, 1, 21)
    )
    checks["free bands"] = free
    conv = max(
        np.max(np.abs(solve_bloch(q, s, 16).energies[:4] - solve_bloch(q, s, 32).energies[:4]))
        for q in np.linspace(-1, 1, 11)
        for s in (0.5, 3.0, 10.0)
    )
    checks["basis doubling"] = conv
    quad = max(
        abs(coupling_overlap(sol, b) - overlap_quadrature(sol.coeffs[b]))
        for sol in (solve_bloch(q, s) for q in (0.0, 0.5, 1.0) for s in (0.0, 3.0, 10.0))
        for b in range(3)
    )
    checks["overlap quadrature"] = quad
    kw = dict(eta=2.0, kappa=1.0, n_atoms=10.0, delta=-5.0)
    a0 = 0.3 - 0.8j
    checks["cavity semigroup"] = abs(
        cavity_substep(a0, 0.4, 0.5, **kw) - cavity_substep(cavity_substep(a0, 0.4, 0.2, **kw), 0.4, 0.3, **kw)
    )
    M, stepper = 12, SplitStepper(12)
    c0 = solve_bloch(0.1, 3.0, M).coeffs[0].astype(complex)

    def run(n):
        c, q = c0.copy(), 0.1
        for _ in range(n):
            c, q = stepper.step(c, q, 3.0, 1.0 / n, 0.4)
        return c

    ref = run(1280)
    order = math.log2(np.linalg.norm(run(20) - ref) / np.linalg.norm(run(40) - ref))
    limits = {
        "norm/period": 1e-10, "free bands": 1e-10, "basis doubling": 1e-10,
        "overlap quadrature": 1e-8, "cavity semigroup": 1e-12,
    }
    ok = all(checks[k] < limits[k] for k in limits) and abs(order - 2) < 0.15
    detail = ", ".join(f"{k} {v:.1e}" for k, v in checks.items()) + f", substep order {order:.2f}"
    record(7, ok, detail)
    assert ok


def test_criterion_8_eliminated_vs_full(runs):
    sp, full = runs.get(("weak_coupling", Mode.FULL))
    _, elim = runs.get(("weak_coupling", Mode.ELIMINATED))
    cmp = compare_traces(full, elim, K=4)
    half = 0.5 * cmp["ptp_reference"]
    dev = cmp["rms"] / half
    amp_err = max(cmp["amplitude_rel_error"])
    ratio = sp.kappa_t / sp.omega_B_t
    ok = ratio > 1e3 and dev < 1e-3
    record(
        8, ok,
        f"kappa/omega_B={ratio:.0f}: rms |s_elim - s_full| = {100 * dev:.3f}% of modulation amplitude "
        f"(harmonic amplitudes agree to {100 * amp_err:.4f}%)",
    )
    assert ok


def test_criterion_8_trend_with_kappa():
    # informational: the residual is the finite cavity response time and shrinks as kappa grows
    overrides = ["units.kappa_hz=4.0e6", "units.eta_hz=156.0e6", "units.n_atoms=2.0e5", "dynamics.periods=8"]
    cfg, sp = _load("weak_coupling", overrides)
    full = _run(cfg, sp, Mode.FULL)
    elim = _run(cfg, sp, Mode.ELIMINATED)
    cmp = compare_traces(full, elim, K=0)
    dev = cmp["rms"] / (0.5 * cmp["ptp_reference"])
    RESULTS.append(
        f"[INFO] criterion 8 at kappa/omega_B={sp.kappa_t / sp.omega_B_t:.0f} (same x, s): "
        f"{100 * dev:.3f}% of modulation amplitude"
    )
    assert dev < 1e-3


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
