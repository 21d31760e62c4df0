"""Bloch bands of the cos^2 lattice by plane-wave diagonalization.

The lattice-periodic part of a Bloch wave is expanded as
``U(z) = sum_n c_n exp(2 i n k_c z)`` for ``n = -M..M``. In recoil units the
Bloch equation ``(p + q)^2 U + sign * s cos^2(z) U = E U`` becomes a real
symmetric tridiagonal matrix with diagonal ``(2n + q)^2 + sign*s/2`` and
off-diagonals ``sign*s/4``. Quasimomentum ``q`` is in units of ``k_c`` so the
first Brillouin zone is ``[-1, 1]``.

``s`` is always a non-negative depth here; ``sign=-1`` selects the attractive
potential (red detuning, atoms at the antinodes).

Band labels at degeneracies (``s = 0`` on the zone edge) are a convention:
eigenvalues are taken in ascending order and each eigenvector's
largest-magnitude coefficient is made real and positive.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

DEFAULT_M = 16


@dataclass(frozen=True)
class BlochSolution:
    q: float
    s: float
    sign: int
    energies: np.ndarray  # (2M+1,), ascending
    coeffs: np.ndarray  # (2M+1 bands, 2M+1 plane waves), row per band
    overlap0: float

    @property
    def M(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def n_bands(self) -> int:
        return self.energies.shape[0]

    def plane_wave_index(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    # columns are eigenvectors; rotate each so its largest entry is real positive
    idx = np.argmax(np.abs(vectors), axis=0)
    pivot = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(pivot) / pivot)[None, :]


def bloch_matrix(q: float, s: float, M: int = DEFAULT_M, sign: int = 1) -> np.ndarray:
    """Dense Bloch Hamiltonian (recoil units); mainly for checks."""
    n = np.arange(-M, M + 1)
    v = sign * s
    return (
        np.diag((2 * n + q) ** 2 + v / 2)
        + np.diag(np.full(2 * M, v / 4), 1)
        + np.diag(np.full(2 * M, v / 4), -1)
    )


def _check_args(q, s, M, sign):
    if not abs(q) <= 1.0 + 1e-12:
        raise ValueError(f"quasimomentum must lie in [-1, 1] (units of k_c), got {q!r}")
    if not s >= 0:
        raise ValueError(f"lattice depth must be non-negative, got {s!r}; pass sign=-1 instead")
    if M < 4:
        raise ValueError(f"basis half-width M must be >= 4, got {M}")
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def solve_bloch(q: float, s: float, M: int = DEFAULT_M, sign: int = 1) -> BlochSolution:
    """Diagonalize the Bloch problem at quasimomentum ``q`` and depth ``s``.

    Returns all ``2M+1`` bands. A failing LAPACK eigensolve propagates as
    ``numpy.linalg.LinAlgError``.
    """
    _check_args(q, s, M, sign)
    n = np.arange(-M, M + 1)
    v = sign * s
    diag = (2 * n + q) ** 2 + v / 2
    off = np.full(2 * M, v / 4)
    energies, vectors = eigh_tridiagonal(diag, off)
    if not np.all(np.isfinite(energies)):
        raise np.linalg.LinAlgError("non-finite Bloch eigenvalues")
    vectors = _fix_phase(vectors.astype(complex))
    coeffs = np.ascontiguousarray(vectors.T)
    return BlochSolution(
        q=float(q),
        s=float(s),
        sign=int(sign),
        energies=energies,
        coeffs=coeffs,
        overlap0=overlap_from_coeffs(coeffs[0]),
    )


def overlap_from_coeffs(coeffs: np.ndarray) -> float:
    """Cell average of ``|U|^2 cos^2(k_c z)`` for a unit-norm coefficient vector.

    ``1/2 + Re sum_n conj(c_n) c_{n+1} / 2``.
    """
    c = np.asarray(coeffs)
    return float(0.5 + 0.5 * np.real(np.vdot(c[:-1], c[1:])))


def coupling_overlap(sol: BlochSolution, band: int = 0) -> float:
    """Overlap O = g^2/g0^2 of ``band`` with the cavity mode profile."""
    if not 0 <= band < sol.n_bands:
        raise IndexError(f"band {band} outside computed range 0..{sol.n_bands - 1}")
    return overlap_from_coeffs(sol.coeffs[band])


def overlap_quadrature(coeffs: np.ndarray, points: int = 4096) -> float:
    """Real-space quadrature of the cell average of |U|^2 cos^2(k_c z).

    Independent of :func:`overlap_from_coeffs`; the periodic trapezoid rule is
    exact for trigonometric polynomials below the grid Nyquist limit.
    """
    c = np.asarray(coeffs)
    M = (c.size - 1) // 2
    z = np.linspace(0.0, np.pi, points, endpoint=False)
    u = np.exp(2j * np.outer(z, np.arange(-M, M + 1))) @ c
    return float(np.mean(np.abs(u) ** 2 * np.cos(z) ** 2))


def band_populations(
    coeffs: np.ndarray, q: float, s: float, M: int | None = None, sign: int = 1
) -> np.ndarray:
    """Weights of a state on the instantaneous Bloch bands at ``(q, s)``."""
    c = np.asarray(coeffs, dtype=complex)
    if M is None:
        M = (c.size - 1) // 2
    if c.size != 2 * M + 1:
        raise ValueError(f"state has {c.size} coefficients, basis needs {2 * M + 1}")
    sol = solve_bloch(q, s, M, sign)
    return np.abs(sol.coeffs.conj() @ c) ** 2


def band_table(qs, depths, n_bands: int = 4, M: int = DEFAULT_M, sign: int = 1) -> list[dict]:
    """Rows ``{s, q, E_0..E_{k-1}, O_0}`` over a (depth, q) grid."""
    rows = []
    for s in depths:
        for q in qs:
            sol = solve_bloch(float(q), float(s), M, sign)
            row = {"s": float(s), "q": float(q)}
            for b in range(n_bands):
                row[f"E_{b}"] = float(sol.energies[b])
            row["O_0"] = sol.overlap0
            rows.append(row)
    return rows


def write_band_csv(path, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("no band rows to write")
    fields = list(rows[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for row in rows:
            writer.writerow([repr(float(row[k])) for k in fields])
