import numpy as np
import pytest

from bzcavity import scale
from bzcavity.adiabatic import adiabatic_trace, depth_curve, selfconsistent_depth, wrap_q
from bzcavity.errors import ConvergenceError

from .conftest import rb87_params


def test_empty_cavity_depth(base_params):
    sp = scale(base_params.with_(n_atoms=0.0))
    s, o = selfconsistent_depth(0.3, sp)
    assert s == sp.s_max
    assert 0 < o < 1


def test_fixed_overlap_closed_form(base_scaled):
    sp = base_scaled
    s, o = selfconsistent_depth(0.0, sp, overlap_fn=lambda q, s: 0.5)
    assert o == 0.5
    assert abs(s) == pytest.approx(abs(sp.s_max) / (1 + (0.5 * sp.x) ** 2), abs=1e-9)


def test_solution_satisfies_fixed_point(base_scaled):
    from bzcavity.bandstructure import solve_bloch

    sp = base_scaled
    for q in (-0.8, 0.0, 0.5, 1.0):
        s, o = selfconsistent_depth(q, sp)
        assert np.sign(s) == sp.potential_sign
        assert o == pytest.approx(solve_bloch(q, abs(s), 16, sp.potential_sign).overlap0, abs=1e-12)
        assert abs(s) == pytest.approx(abs(sp.s_max) / (1 + (sp.x * o) ** 2), abs=1e-9)


def test_nominal_depth_near_three(base_scaled):
    s, _ = selfconsistent_depth(0.0, base_scaled)
    assert abs(s) == pytest.approx(3.0, rel=0.15)


def test_convergence_error_carries_history(base_scaled):
    with pytest.raises(ConvergenceError) as info:
        selfconsistent_depth(0.0, base_scaled, max_iter=2)
    assert len(info.value.history) == 3


def test_starting_guess_independent(base_scaled):
    values = [selfconsistent_depth(0.4, base_scaled, g)[0] for g in (0.5, 3.0, 8.0)]
    assert max(values) - min(values) < 1e-9


def test_depth_symmetric_in_q(base_scaled):
    qs = np.linspace(0.05, 0.95, 7)
    assert depth_curve(base_scaled, qs) == pytest.approx(depth_curve(base_scaled, -qs), abs=1e-9)


def test_depth_modulation_grows_with_n():
    # more atoms: stronger dispersive shift, shallower and more modulated lattice
    ptp = []
    for n in (1e4, 5e4, 1e5):
        sp = scale(rb87_params(n_atoms=n))
        curve = depth_curve(sp, np.linspace(-1, 1, 21))
        ptp.append(np.ptp(curve))
    assert ptp[0] < ptp[1] < ptp[2]
    means = [abs(depth_curve(scale(rb87_params(n_atoms=n)), [0.0])[0]) for n in (1e4, 5e4, 1e5)]
    assert means[0] > means[1] > means[2]


def test_wrap_q():
    assert wrap_q(1.0) == pytest.approx(-1.0)
    assert wrap_q(-1.0) == pytest.approx(-1.0)
    assert wrap_q(2.5) == pytest.approx(0.5)
    assert wrap_q(-3.25) == pytest.approx(0.75)


@pytest.fixture(scope="module")
def trace():
    return adiabatic_trace(scale(rb87_params()), periods=4, samples_per_period=64)


def test_trace_is_periodic(trace):
    S = 64
    assert np.max(np.abs(trace.s[S:] - trace.s[:-S])) < 1e-10
    assert trace.is_uniform()
    assert len(trace) == 4 * S + 1
    sp = scale(rb87_params())
    assert trace.duration == pytest.approx(4 * sp.bloch_period, rel=1e-12)


def test_trace_field_matches_depth(trace):
    sp = scale(rb87_params())
    assert sp.s_per_photon * np.abs(trace.alpha) ** 2 == pytest.approx(trace.s, abs=1e-9)
    assert np.all(trace.populations[:, 0] == 1.0)
    # Houston phase is a running integral of the band energy
    assert np.all(np.diff(trace.houston_phase) != 0)


def test_trace_cold_start_matches_warm(trace):
    cold = adiabatic_trace(scale(rb87_params()), periods=1, samples_per_period=64, warm_start=False)
    assert cold.s == pytest.approx(trace.s[:65], abs=1e-9)


def test_zero_force_rejected():
    with pytest.raises(ValueError):
        adiabatic_trace(scale(rb87_params(force=0.0)), periods=1)
