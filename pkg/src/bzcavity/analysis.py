"""Spectral analysis of traces: Fourier spectra, harmonic fits, trace comparison.

The FFT only seeds the fundamental; the reported frequency always comes from a
time-domain least-squares fit of

    y(t) = a0 + sum_k [a_k cos(k w t) + b_k sin(k w t)],   k = 1..K

with ``w`` free. Amplitudes are reported as complex ``A_k`` referenced to
``t = 0`` so that ``y = a0 + sum_k Re(A_k exp(i k w t))``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy import optimize, signal

from .errors import FitError
from .trace import RunTrace

PEAK_PAD = 4


@dataclass(frozen=True)
class Spectrum:
    """One-sided DFT of a mean-removed, windowed series.

    ``coeffs`` is the raw ``rfft`` (zero padded to ``n_fft``); ``amplitude``
    rescales it so a cosine of amplitude A centred on a bin reads A.
    """

    freq: np.ndarray
    coeffs: np.ndarray
    window: str
    n_samples: int
    n_fft: int
    sample_dt: float
    window_sum: float
    energy: float  # sum of squared windowed samples

    @property
    def resolution(self) -> float:
        """Resolution bandwidth 1/duration (Hz)."""
        return 1.0 / (self.n_samples * self.sample_dt)

    @property
    def amplitude(self) -> np.ndarray:
        amp = 2.0 * np.abs(self.coeffs) / self.window_sum
        amp[0] /= 2.0
        if self.n_fft % 2 == 0:
            amp[-1] /= 2.0
        return amp

    def parseval_energy(self) -> float:
        """Energy recovered from the coefficients; equals ``energy`` by Parseval."""
        w = np.full(self.coeffs.size, 2.0)
        w[0] = 1.0
        if self.n_fft % 2 == 0:
            w[-1] = 1.0
        return float(np.sum(w * np.abs(self.coeffs) ** 2) / self.n_fft)

    def peak_frequency(self, fmin: float = 0.0) -> float:
        mask = self.freq > fmin
        idx = np.flatnonzero(mask)[np.argmax(self.amplitude[mask])]
        return float(self.freq[idx])

    def to_csv(self, path) -> None:
        amp = self.amplitude
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["freq_Hz", "abs_amp", "re", "im"])
            for f, a, c in zip(self.freq, amp, self.coeffs):
                writer.writerow([repr(float(f)), repr(float(a)), repr(float(c.real)), repr(float(c.imag))])


def _periodic_samples(t, y):
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size != y.size or t.size < 4:
        raise ValueError("need matching t and y with at least 4 samples")
    steps = np.diff(t)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise ValueError("spectrum needs uniformly sampled data")
    return t, y, float(steps[0])


def spectrum_samples(t, y, window: str = "hann", pad: int = 1) -> Spectrum:
    t, y, dt = _periodic_samples(t, y)
    # t spans both endpoints of the record; the last sample repeats the first period
    y = y[:-1]
    n = y.size
    w = signal.get_window(window, n, fftbins=True)
    yw = (y - y.mean()) * w
    n_fft = n * int(pad)
    coeffs = np.fft.rfft(yw, n=n_fft)
    return Spectrum(
        freq=np.fft.rfftfreq(n_fft, dt),
        coeffs=coeffs,
        window=window,
        n_samples=n,
        n_fft=n_fft,
        sample_dt=dt,
        window_sum=float(w.sum()),
        energy=float(np.sum(yw**2)),
    )


def spectrum(trace: RunTrace, column: str = "s_Er", window: str = "hann", pad: int = 1) -> Spectrum:
    """Fourier transform of a trace column (mean removed, Hann window by default)."""
    if not trace.is_uniform():
        raise ValueError("trace is not uniformly sampled")
    return spectrum_samples(trace.t, trace.column(column), window=window, pad=pad)


@dataclass(frozen=True)
class HarmonicFit:
    omega: float  # rad/s
    omega_err: float
    dc: float
    amplitudes: np.ndarray  # complex A_1..A_K
    epsilon: float
    epsilon_ptp: float
    residual_rms: float
    omega_seed: float

    @property
    def n_harmonics(self) -> int:
        return self.amplitudes.size

    @property
    def epsilons(self) -> np.ndarray:
        return np.abs(self.amplitudes) / abs(self.dc)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["amplitudes"] = [[a.real, a.imag] for a in self.amplitudes]
        out["abs_amplitudes"] = [float(abs(a)) for a in self.amplitudes]
        out["frequency_hz"] = self.omega / (2 * np.pi)
        return out

    def to_json(self, path, extra: dict | None = None) -> None:
        payload = self.to_dict()
        payload.update(extra or {})
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)


def _design(tc, omega, K):
    cols = [np.ones_like(tc)]
    for k in range(1, K + 1):
        cols.append(np.cos(k * omega * tc))
        cols.append(np.sin(k * omega * tc))
    return np.column_stack(cols)


def _project(tc, y, omega, K):
    X = _design(tc, omega, K)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    return coef, y - X @ coef


def seed_frequency(t, y, pad: int = PEAK_PAD) -> float:
    """Fundamental estimate (rad/s) from the Hann-windowed, zero-padded FFT peak."""
    spec = spectrum_samples(t, y, "hann", pad)
    amp = spec.amplitude
    # skip the DC lobe of the Hann window (two unpadded bins)
    start = 2 * pad
    if start >= amp.size - 1:
        raise FitError("record too short to seed a frequency")
    i = start + int(np.argmax(amp[start:]))
    if 0 < i < amp.size - 1:
        l, c, r = np.log(amp[i - 1 : i + 2] + 1e-300)
        denom = l - 2 * c + r
        shift = 0.5 * (l - r) / denom if denom != 0 else 0.0
    else:
        shift = 0.0
    df = spec.freq[1] - spec.freq[0]
    return float(2 * np.pi * (spec.freq[i] + shift * df))


def fit_harmonics_samples(t, y, K: int = 4, omega0: float | None = None) -> HarmonicFit:
    """Least-squares harmonic fit with a free fundamental; see module docstring."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if K < 1:
        raise ValueError("need at least one harmonic")
    seed = seed_frequency(t, y) if omega0 is None else float(omega0)
    if not np.isfinite(seed) or seed <= 0:
        raise FitError("invalid initial frequency", seed)
    span = t[-1] - t[0]
    if seed * span < 2 * np.pi * 4 * (1 - 1e-9):
        raise FitError("record spans fewer than 4 periods of the seed frequency", seed)

    tm = 0.5 * (t[0] + t[-1])
    tc = t - tm
    bin_w = 2 * np.pi / span

    def rss(w):
        return float(np.sum(_project(tc, y, w, K)[1] ** 2))

    refine = optimize.minimize_scalar(
        rss, bounds=(seed - 0.75 * bin_w, seed + 0.75 * bin_w), method="bounded",
        options={"xatol": 1e-10 * seed},
    )
    if not refine.success:
        raise FitError(f"frequency refinement failed: {refine.message}", seed)
    w1 = float(refine.x)
    coef, _ = _project(tc, y, w1, K)
    ks = np.arange(1, K + 1)

    def residual(p):
        w = w1 * (1.0 + p[0])
        return _design(tc, w, K) @ p[1:] - y

    def jac(p):
        w = w1 * (1.0 + p[0])
        X = _design(tc, w, K)
        a, b = p[2::2], p[3::2]
        kt = np.outer(tc, ks) * w1
        dw = np.sum(-a * kt * np.sin(np.outer(tc, ks) * w) + b * kt * np.cos(np.outer(tc, ks) * w), axis=1)
        return np.column_stack([dw, X])

    p0 = np.concatenate([[0.0], coef])
    sol = optimize.least_squares(residual, p0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitError(f"harmonic fit did not converge: {sol.message}", seed)

    p = sol.x
    omega = w1 * (1.0 + p[0])
    res = sol.fun
    dof = max(y.size - p.size, 1)
    J = sol.jac
    try:
        cov = np.linalg.inv(J.T @ J) * (np.sum(res**2) / dof)
        omega_err = float(w1 * np.sqrt(max(cov[0, 0], 0.0)))
    except np.linalg.LinAlgError:
        omega_err = float("inf")

    a, b = p[2::2], p[3::2]
    amps = (a - 1j * b) * np.exp(-1j * ks * omega * tm)
    dc = float(p[1])
    if dc == 0:
        raise FitError("zero mean level; modulation index undefined", seed)
    return HarmonicFit(
        omega=float(omega),
        omega_err=omega_err,
        dc=dc,
        amplitudes=amps,
        epsilon=float(abs(amps[0]) / abs(dc)),
        epsilon_ptp=float((y.max() - y.min()) / 2 / abs(y.mean())),
        residual_rms=float(np.sqrt(np.mean(res**2))),
        omega_seed=seed,
    )


def fit_harmonics(trace: RunTrace, K: int = 4, *, column: str = "s_Er", omega0: float | None = None) -> HarmonicFit:
    """Fit ``K`` harmonics of a free fundamental to a trace column."""
    return fit_harmonics_samples(trace.t, trace.column(column), K, omega0)


def harmonic_amplitudes(t, y, omega: float, K: int) -> np.ndarray:
    """Complex amplitudes ``A_1..A_K`` at a fixed fundamental (linear projection)."""
    t = np.asarray(t, dtype=float)
    coef, _ = _project(t, np.asarray(y, dtype=float), omega, K)
    return coef[1::2] - 1j * coef[2::2]


def compare_traces(a: RunTrace, b: RunTrace, column: str = "s_Er", K: int = 4) -> dict:
    """Deviation of ``b`` from reference ``a``.

    ``b`` is linearly resampled onto ``a``'s grid when they differ. Returned
    keys: ``rms``, ``nrms`` (rms over the peak-to-peak of ``a``), ``max_abs``,
    and, for ``K > 0``, ``omega`` (fit of ``a``), per-harmonic
    ``amplitude_ratio`` ``|B_k|/|A_k|`` and ``amplitude_rel_error``.
    """
    ta, ya = a.t, a.column(column)
    tb, yb = b.t, b.column(column)
    tol = 1e-9 * max(abs(ta[-1]), 1e-300)
    if tb[0] > ta[0] + tol or tb[-1] < ta[-1] - tol:
        raise ValueError("trace b does not cover the time span of trace a")
    if tb.size != ta.size or not np.allclose(ta, tb, rtol=0, atol=tol):
        yb = np.interp(ta, tb, yb)
    diff = yb - ya
    ptp = float(np.ptp(ya))
    rms = float(np.sqrt(np.mean(diff**2)))
    out = {
        "rms": rms,
        "nrms": rms / ptp if ptp > 0 else (0.0 if rms == 0 else float("inf")),
        "max_abs": float(np.max(np.abs(diff))),
        "ptp_reference": ptp,
    }
    if K > 0 and ptp > 0:
        omega = fit_harmonics_samples(ta, ya, K).omega
        amp_a = np.abs(harmonic_amplitudes(ta, ya, omega, K))
        amp_b = np.abs(harmonic_amplitudes(ta, yb, omega, K))
        out["omega"] = omega
        out["amplitude_a"] = amp_a.tolist()
        out["amplitude_b"] = amp_b.tolist()
        out["amplitude_ratio"] = (amp_b / amp_a).tolist()
        out["amplitude_rel_error"] = (np.abs(amp_b - amp_a) / amp_a).tolist()
    return out
