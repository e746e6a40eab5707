import numpy as np
import pytest

from bohmpair import PhysicalConfig, WaveFunction, WaveKind

KINDS = list(WaveKind)


def _dphase(a, b):
    d = (a - b).imag
    return (d + np.pi) % (2 * np.pi) - np.pi


def fd_velocity(wf, y1, y2, t, h=1e-5, points=3):
    """(hbar/m) dS/dy by central differences of the phase of psi.

    ``points=5`` uses the fourth-order stencil.
    """
    scale = wf.config.hbar / wf.config.mass

    def slope(f):
        first = _dphase(f(h), f(-h)) / (2 * h)
        if points == 3:
            return first
        return (4 * first - _dphase(f(2 * h), f(-2 * h)) / (4 * h)) / 3

    v1 = slope(lambda d: wf.log_psi(y1 + d, y2, t))
    v2 = slope(lambda d: wf.log_psi(y1, y2 + d, t))
    return scale * v1, scale * v2


@pytest.fixture
def natural():
    return PhysicalConfig()


@pytest.fixture(params=KINDS, ids=[k.value for k in KINDS])
def any_wf(request, natural):
    return WaveFunction(request.param, natural)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
