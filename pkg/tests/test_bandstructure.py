import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bzcavity.bandstructure import (
    band_populations,
    band_table,
    bloch_matrix,
    coupling_overlap,
    overlap_from_coeffs,
    overlap_quadrature,
    solve_bloch,
    write_band_csv,
)


def test_free_particle_levels():
    sol = solve_bloch(0.0, 0.0)
    assert sol.energies[0] == pytest.approx(0.0, abs=1e-12)
    assert sol.energies[1:3] == pytest.approx([4.0, 4.0], abs=1e-12)
    edge = solve_bloch(1.0, 0.0)
    assert edge.energies[:2] == pytest.approx([1.0, 1.0], abs=1e-12)


@pytest.mark.parametrize("q", [-0.7, 0.0, 0.3, 1.0])
def test_free_spectrum_is_parabola(q):
    M = 8
    sol = solve_bloch(q, 0.0, M)
    expected = np.sort((2 * np.arange(-M, M + 1) + q) ** 2)
    assert sol.energies == pytest.approx(expected, abs=1e-10)


def test_deep_lattice_harmonic_spacing():
    # hbar omega_ho = 2 sqrt(s) E_R for V = s cos^2
    sol = solve_bloch(0.0, 25.0)
    gap = sol.energies[1] - sol.energies[0]
    assert gap == pytest.approx(10.0, rel=0.15)


def test_bandwidth_shrinks_with_depth():
    widths = []
    for s in (1.0, 3.0, 10.0, 20.0):
        widths.append(solve_bloch(1.0, s).energies[0] - solve_bloch(0.0, s).energies[0])
    assert all(a > b for a, b in zip(widths, widths[1:]))


@pytest.mark.parametrize("s", [0.5, 3.0, 10.0])
@pytest.mark.parametrize("q", [0.0, 0.45, 1.0])
def test_basis_doubling_converged(s, q):
    a = solve_bloch(q, s, 16)
    b = solve_bloch(q, s, 32)
    assert np.max(np.abs(a.energies[:4] - b.energies[:4])) < 1e-10
    assert abs(a.overlap0 - b.overlap0) < 1e-10


@settings(max_examples=40, deadline=None)
@given(q=st.floats(min_value=-1, max_value=1), s=st.floats(min_value=0, max_value=20))
def test_inversion_symmetry(q, s):
    a = solve_bloch(q, s)
    b = solve_bloch(-q, s)
    assert a.energies[:4] == pytest.approx(b.energies[:4], abs=1e-10)
    assert a.overlap0 == pytest.approx(b.overlap0, abs=1e-10)


def test_reciprocal_lattice_periodicity():
    # q and q + 2 describe the same states after relabelling plane waves
    M = 20
    e1 = np.linalg.eigvalsh(bloch_matrix(-0.4, 4.0, M, 1))
    e2 = np.linalg.eigvalsh(bloch_matrix(1.6, 4.0, M, 1))
    assert e1[:4] == pytest.approx(e2[:4], abs=1e-10)


@pytest.mark.parametrize("s", [0.0, 1.0, 3.0, 10.0])
@pytest.mark.parametrize("q", [0.0, 0.6, 1.0])
def test_overlap_against_quadrature(q, s):
    sol = solve_bloch(q, s)
    for band in range(3):
        assert coupling_overlap(sol, band) == pytest.approx(overlap_quadrature(sol.coeffs[band]), abs=1e-8)


def test_overlap_limits():
    assert solve_bloch(0.0, 0.0).overlap0 == pytest.approx(0.5, abs=1e-14)
    # blue: ground state sits at the field nodes
    assert solve_bloch(0.0, 50.0, sign=1).overlap0 < 0.1
    # red: ground state sits at the antinodes
    assert solve_bloch(0.0, 50.0, sign=-1).overlap0 > 0.9


@pytest.mark.parametrize("q", [0.0, 0.5, 1.0])
def test_red_overlap_is_blue_complement(q):
    blue = solve_bloch(q, 3.0, sign=1)
    red = solve_bloch(q, 3.0, sign=-1)
    assert red.overlap0 == pytest.approx(1 - blue.overlap0, abs=1e-12)
    # c_n -> (-1)^n c_n maps one lattice onto the other shifted by s
    assert red.energies[:4] == pytest.approx(blue.energies[:4] - 3.0, abs=1e-10)


def test_overlap_depends_on_q():
    assert abs(solve_bloch(0.0, 3.0).overlap0 - solve_bloch(1.0, 3.0).overlap0) > 1e-3


def test_overlap_phase_invariant():
    sol = solve_bloch(0.3, 3.0)
    c = sol.coeffs[0]
    assert overlap_from_coeffs(c * np.exp(1.234j)) == pytest.approx(overlap_from_coeffs(c), abs=1e-15)
    assert np.argmax(np.abs(c)) == pytest.approx(np.argmax(c.real))
    assert np.max(np.abs(c)) == pytest.approx(c[np.argmax(np.abs(c))].real)


def test_coupling_overlap_band_range():
    sol = solve_bloch(0.0, 3.0, M=4)
    with pytest.raises(IndexError):
        coupling_overlap(sol, sol.n_bands)


@pytest.mark.parametrize("bad", [dict(q=1.5), dict(s=-1.0), dict(M=3), dict(sign=0)])
def test_input_validation(bad):
    kw = dict(q=0.0, s=1.0, M=16, sign=1)
    kw.update(bad)
    with pytest.raises(ValueError):
        solve_bloch(kw["q"], kw["s"], kw["M"], kw["sign"])


def test_band_populations():
    sol = solve_bloch(0.2, 3.0)
    p = band_populations(sol.coeffs[1], 0.2, 3.0)
    assert p[1] == pytest.approx(1.0, abs=1e-12)
    rng = np.random.default_rng(3)
    c = rng.normal(size=33) + 1j * rng.normal(size=33)
    c /= np.linalg.norm(c)
    assert band_populations(c, 0.2, 3.0).sum() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        band_populations(c, 0.2, 3.0, M=10)


def test_band_table(tmp_path):
    qs = np.linspace(-1, 1, 5)
    rows = band_table(qs, [0.0, 3.0], 3, 16, 1)
    assert len(rows) == 10
    free = [r for r in rows if r["s"] == 0.0]
    assert [r["E_0"] for r in free] == pytest.approx(qs**2, abs=1e-12)
    path = tmp_path / "bands.csv"
    write_band_csv(path, rows)
    header = path.read_text().splitlines()[0].split(",")
    assert header == ["s", "q", "E_0", "E_1", "E_2", "O_0"]
