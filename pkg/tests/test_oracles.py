import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bohmpair import PhysicalConfig
from bohmpair.errors import RegimeViolation
from bohmpair.oracles import (com_path, com_velocity_closed, de_broglie_wavelength,
                              empty_interval, fringe_spacing, oracle_reports,
                              quantum_potential_com, quantum_potential_com_field)

CFG = PhysicalConfig()


def test_com_path_values():
    assert com_path(CFG, 0.0, 3.0) == 0.0
    assert com_path(CFG, 1.0, 2.0) == pytest.approx(math.sqrt(2), rel=1e-15)


@given(st.floats(-5, 5), st.floats(0.01, 50))
def test_com_path_chain_rule(y0, t):
    h = 1e-4 * max(t, 1.0)
    dydt = (com_path(CFG, y0, t + h) - com_path(CFG, y0, t - h)) / (2 * h)
    v = com_velocity_closed(CFG, com_path(CFG, y0, t), t)
    assert dydt == pytest.approx(v, rel=1e-7, abs=1e-10)


def test_com_path_monotone():
    t = np.linspace(0, 50, 500)
    assert np.all(np.diff(com_path(CFG, 0.3, t)) >= 0)


def test_quantum_potential_values():
    assert quantum_potential_com(CFG, 0.0, 4.0) == 0.0
    assert quantum_potential_com(CFG, 0.0, 4.0, form="position") == 0.0
    assert quantum_potential_com(CFG, 1.0, 0.0) == pytest.approx(1 / 8)


@given(st.floats(0.01, 5), st.floats(0, 50))
def test_quantum_potential_forms_agree(y0, t):
    a = quantum_potential_com(CFG, y0, t)
    b = quantum_potential_com(CFG, y0, t, form="position")
    assert a == pytest.approx(b, rel=1e-13)


def test_quantum_potential_field_zero_source():
    assert quantum_potential_com_field(CFG, 0.0, 2.0) == 0.0


def test_fringe_spacing():
    assert fringe_spacing(CFG, 1.0) == pytest.approx(math.pi)
    assert fringe_spacing(CFG, 6.0) == pytest.approx(2 * fringe_spacing(CFG, 3.0))
    with pytest.raises(ValueError):
        fringe_spacing(CFG, 0.0)


def test_de_broglie_consistency():
    cfg = PhysicalConfig(k_x=2.5, screen_distance_D=7, slit_offset_Y=0.4)
    t = 7 / 2.5
    lam = de_broglie_wavelength(cfg)
    assert lam * cfg.screen_distance_D / (2 * cfg.slit_offset_Y) == pytest.approx(fringe_spacing(cfg, t))


def test_empty_interval_values():
    assert empty_interval(CFG, 20.0, 40.0) == pytest.approx(800.0)
    assert empty_interval(CFG, 0.0, 40.0) == 0.0
    with pytest.raises(RegimeViolation):
        empty_interval(CFG, 20.0, 2.0)


@given(st.floats(0.1, 30), st.floats(20, 400))
def test_empty_interval_is_large_tau_limit(y0, t):
    tau = CFG.tau(t)
    L = empty_interval(CFG, y0, t)
    assert abs(2 * com_path(CFG, y0, t) - L) / L <= 1 / (2 * tau ** 2) + 1e-12


def test_oracle_reports_skip_out_of_regime():
    names = [r.name for r in oracle_reports(CFG, 0.5)]
    assert "empty_interval" not in names
    far = oracle_reports(PhysicalConfig(screen_distance_D=40), 20.0)
    assert {r.name for r in far} >= {"empty_interval", "fringe_spacing", "com_path"}
    assert all(np.isfinite(r.value) for r in far)
