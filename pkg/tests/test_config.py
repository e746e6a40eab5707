import json
import math

import pytest
from hypothesis import given, strategies as st

from bohmpair import PhysicalConfig, SourceSpec, WaveKind, derive_kinematics, validate_regime
from bohmpair.config import Scenario, ShiftMode, config_from_mapping, load_config
from bohmpair.errors import ConfigError


def test_kinematics_unit_case():
    kin = derive_kinematics(PhysicalConfig(k_x=1, screen_distance_D=1))
    assert (kin.u_x, kin.t_D, kin.tau) == (1.0, 1.0, 0.5)
    assert kin.u_y == 0.0
    assert kin.E_x == 0.5


def test_kinematics_heavier_particle():
    kin = derive_kinematics(PhysicalConfig(mass=2, k_x=4, screen_distance_D=8))
    assert kin.u_x == 2.0
    assert kin.t_D == 4.0
    assert kin.tau == 1.0


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10), st.floats(0.1, 10),
       st.floats(0.1, 50), st.floats(-3, 3))
def test_kinematics_exact_and_idempotent(hbar, m, s0, kx, D, ky):
    cfg = PhysicalConfig(hbar=hbar, mass=m, sigma0=s0, k_x=kx, k_y=ky, screen_distance_D=D)
    kin = derive_kinematics(cfg)
    assert kin == derive_kinematics(cfg)
    assert kin.u_x == hbar * kx / m
    assert kin.u_y == hbar * ky / m
    assert kin.t_D == D / kin.u_x
    assert math.isclose(kin.tau, cfg.tau(D / (hbar * kx / m)), rel_tol=1e-15)


@pytest.mark.parametrize("field", ["hbar", "mass", "sigma0", "slit_offset_Y", "k_x",
                                   "screen_distance_D", "detector_width_Delta"])
@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
def test_positive_fields_rejected(field, bad):
    with pytest.raises(ConfigError):
        PhysicalConfig(**{field: bad})


def test_source_rejects_negative_spread():
    with pytest.raises(ConfigError):
        SourceSpec(y0_spread=-0.1)


def _all_ok(findings):
    return all(f.satisfied for f in findings)


def test_regime_fig1_satisfied():
    cfg = PhysicalConfig(slit_offset_Y=1, screen_distance_D=2)
    src = SourceSpec(WaveKind.ENTANGLED_SYMMETRIC, y0_spread=0.01)
    assert _all_ok(validate_regime(cfg, derive_kinematics(cfg), src, Scenario.FIG1))


def test_regime_fig2_large_offset_violated():
    cfg = PhysicalConfig(slit_offset_Y=10)
    found = {f.name: f for f in validate_regime(cfg, derive_kinematics(cfg),
                                                 SourceSpec(WaveKind.UNENTANGLED), "fig2")}
    assert not found["offset-vs-2pi-width"].satisfied
    assert math.isclose(found["offset-vs-2pi-width"].value, 10 / (2 * math.pi))


def test_regime_fig3_satisfied():
    cfg = PhysicalConfig(slit_offset_Y=0.05, screen_distance_D=40)
    src = SourceSpec(WaveKind.UNENTANGLED, y0_mean=20)
    findings = validate_regime(cfg, derive_kinematics(cfg), src, Scenario.FIG3)
    assert _all_ok(findings)
    assert {f.name for f in findings} >= {"tau-large", "width-vs-source-offset"}


def test_regime_custom_infers_checks():
    cfg = PhysicalConfig(slit_offset_Y=0.05, screen_distance_D=40)
    src = SourceSpec(WaveKind.UNENTANGLED, y0_mean=20)
    a = validate_regime(cfg, derive_kinematics(cfg), src, Scenario.CUSTOM)
    b = validate_regime(cfg, derive_kinematics(cfg), src, Scenario.FIG3)
    assert a == b


def test_strictness_is_configurable():
    cfg = PhysicalConfig(slit_offset_Y=0.5)
    kin = derive_kinematics(cfg)
    src = SourceSpec(WaveKind.UNENTANGLED)
    strict = {f.name: f.satisfied for f in validate_regime(cfg, kin, src, "fig2", 0.05)}
    loose = {f.name: f.satisfied for f in validate_regime(cfg, kin, src, "fig2", 0.1)}
    assert not strict["offset-vs-2pi-width"] and loose["offset-vs-2pi-width"]


def test_config_file_round_trip(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"slit_offset_Y": 0.05, "wave_kind": "unentangled",
                                "y0_mean": 20, "shift_mode": "joint", "rng_seed": 7}))
    cfg, src = load_config(path)
    assert cfg.slit_offset_Y == 0.05 and cfg.sigma0 == 1.0
    assert src.wave_kind is WaveKind.UNENTANGLED
    assert src.shift_mode is ShiftMode.JOINT and src.rng_seed == 7


def test_config_unknown_key_rejected():
    with pytest.raises(ConfigError, match="unknown"):
        config_from_mapping({"slit_offset": 1})


@pytest.mark.parametrize("text", ["[1, 2]", "{not json", ""])
def test_config_bad_file(tmp_path, text):
    path = tmp_path / "c.json"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_bad_values():
    with pytest.raises(ConfigError):
        config_from_mapping({"wave_kind": "bosonic"})
    with pytest.raises(ConfigError):
        config_from_mapping({"sigma0": "wide"})
