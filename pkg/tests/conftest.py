import math

import pytest

from bzcavity import PhysicalParams, preset, scale
from bzcavity.dynamics import NumericsSpec

TWO_PI = 2 * math.pi
GRAVITY = 9.81


def rb87_params(delta_hz=-1.0e12, eta_hz=39.0e6, n_atoms=5.0e4, **changes):
    """Reference parameter set (red detuning, as in configs/weak_coupling.yaml)."""
    fields = preset("Rb87")
    fields.update(
        g0=TWO_PI * 2.8e6,
        kappa=TWO_PI * 1.0e6,
        delta=TWO_PI * delta_hz,
        eta=TWO_PI * eta_hz,
        n_atoms=n_atoms,
        force=fields["atom_mass"] * GRAVITY,
        detector_efficiency=0.6,
    )
    fields.update(changes)
    return PhysicalParams(**fields)


@pytest.fixture
def base_params():
    return rb87_params()


@pytest.fixture
def base_scaled(base_params):
    return scale(base_params)


@pytest.fixture
def quick_numerics():
    return NumericsSpec(steps_per_period=1024, samples_per_period=128, periods=4)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
