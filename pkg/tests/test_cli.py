import json

import jsonschema
import numpy as np
import pytest

from bohmpair import __version__
from bohmpair.cli import EXIT_ABORT_QUOTA, EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_REGIME, main
from bohmpair.config import Scenario
from bohmpair.errors import ConfigError, RegimeViolation
from bohmpair.export import (SCHEMA_VERSION, SUMMARY_SCHEMA, read_pattern_csv,
                             write_pattern_csv)
from bohmpair.patterns import Pattern
from bohmpair.scenarios import RunManifest, emit_plot_data, run_scenario, screen_edges


def test_manifest_invariants():
    with pytest.raises(ConfigError):
        RunManifest(n=99)
    with pytest.raises(ConfigError):
        RunManifest(tol=1e-2)
    m = RunManifest.preset("fig3", seed=12, n=500)
    assert m.source.rng_seed == 12 and m.selective
    assert m.config.slit_offset_Y == 0.05 and m.source.y0_mean == 20


def test_screen_edges_cover_shifted_source():
    m = RunManifest.preset("fig3")
    from bohmpair.config import derive_kinematics
    e = screen_edges(m, derive_kinematics(m.config))
    assert e[0] < -160 and e[-1] > 2 * 20 * 20
    np.testing.assert_allclose(np.diff(e), 1.0)


def test_empty_pattern_csv_is_header_only(tmp_path):
    path = tmp_path / "p.csv"
    write_pattern_csv(path, Pattern.empty([0, 1, 2]))
    assert path.read_text() == "bin_left,bin_right,count,normalized_density\n"


def test_pattern_csv_round_trip(tmp_path):
    p = Pattern([0.0, 0.1, 0.2, 0.35], [3, 0, 7])
    write_pattern_csv(tmp_path / "p.csv", p)
    q = read_pattern_csv(tmp_path / "p.csv")
    np.testing.assert_array_equal(q.bin_edges, p.bin_edges)
    np.testing.assert_array_equal(q.counts, p.counts)


@pytest.mark.parametrize("scenario", ["fig1", "fig2", "fig3"])
def test_summary_validates_against_schema(scenario, tmp_path):
    m = RunManifest.preset(scenario, n=400, out_dir=tmp_path)
    report = run_scenario(m, "compare")
    files = emit_plot_data(report)
    summary = json.loads((tmp_path / "summary.json").read_text())
    jsonschema.validate(summary, SUMMARY_SCHEMA)
    assert summary["schema_version"] == SCHEMA_VERSION
    for name in files.values():
        assert (tmp_path / name).exists()
    pattern = json.loads((tmp_path / "pattern_bqm.json").read_text())
    assert set(pattern) >= {"bin_left", "bin_right", "count", "normalized_density", "metadata"}
    assert pattern["metadata"]["seed"] == 0 and "divergence" in pattern["metadata"]


def test_fig2_report_contents(tmp_path):
    report = run_scenario(RunManifest.preset("fig2", n=2000), "compare")
    assert report.stats["axis_crossings"] == 0
    assert report.checks["no-axis-crossing"]["passed"]
    assert report.checks["first-maximum-symmetric-pairs"]["passed"]
    assert "bqm_selected_vs_sqm_selective" in report.divergence


def test_validate_and_oracles_only(tmp_path):
    rep = run_scenario(RunManifest.preset("fig3"), "validate")
    assert rep.records is None and not rep.patterns
    assert all(f.satisfied for f in rep.regime)
    names = {o.name for o in run_scenario(RunManifest.preset("fig3"), "oracles").oracles}
    assert "empty_interval" in names


def test_predict_has_no_records():
    rep = run_scenario(RunManifest.preset("fig2"), "predict")
    assert rep.records is None
    assert {"sqm_marginal", "sqm_selective"} <= set(rep.patterns)
    assert rep.stats["sqm_opposite_side_mass"] == pytest.approx(0.5, rel=1e-8)


def test_strict_regime_raises():
    from bohmpair import PhysicalConfig
    m = RunManifest.preset("fig2", config=PhysicalConfig(slit_offset_Y=10), strict_regime=True)
    with pytest.raises(RegimeViolation):
        run_scenario(m, "validate")


def test_rerun_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        m = RunManifest.preset("fig2", n=300, seed=4, out_dir=tmp_path / d)
        emit_plot_data(run_scenario(m, "simulate"))
    for name in ("records.csv", "pattern_bqm.csv", "pattern_bqm_selected.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert __version__ in out and SCHEMA_VERSION in out


def test_cli_compare_writes_outputs(tmp_path, capsys):
    assert main(["compare", "--n", "300", "--out", str(tmp_path)]) == EXIT_OK
    assert "PASS symmetric-detection" in capsys.readouterr().out
    assert (tmp_path / "records.csv").read_text().startswith(
        "trajectory_id,status,y0_initial,y1_final,y2_final\n")


def test_cli_default_out_from_env(tmp_path, monkeypatch):
    monkeypatch.setenv("BOHMPAIR_OUT", str(tmp_path / "env"))
    assert main(["validate", "--scenario", "fig3"]) == EXIT_OK
    assert (tmp_path / "env" / "summary.json").exists()


def test_cli_oracles(tmp_path, capsys):
    assert main(["oracles", "--scenario", "fig3", "--out", str(tmp_path)]) == EXIT_OK
    data = json.loads((tmp_path / "oracles.json").read_text())
    values = {o["name"]: o["value"] for o in data["oracles"]}
    assert values["empty_interval"] == pytest.approx(800.0)


def test_cli_config_override(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"wave_kind": "entangled-antisymmetric", "y0_mean": 0.2}))
    assert main(["simulate", "--config", str(cfg), "--n", "200", "--out", str(tmp_path / "o")]) == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["parameters"]["wave_kind"] == "entangled-antisymmetric"
    assert summary["checks"]["symmetric-detection"]["passed"]


@pytest.mark.parametrize("argv,code", [
    (["validate", "--config", "/nonexistent/c.json"], EXIT_CONFIG),
    (["simulate", "--n", "5"], EXIT_CONFIG),
    (["validate", "--scenario", "fig1", "--strict-regime", "--config", "{cfg}"], EXIT_REGIME),
    (["validate", "--out", "{file}/sub"], EXIT_IO),
])
def test_cli_exit_codes(argv, code, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"slit_offset_Y": 5}')
    blocker = tmp_path / "file"
    blocker.write_text("")
    argv = [a.format(cfg=cfg, file=blocker) for a in argv]
    if "--out" not in argv:
        argv += ["--out", str(tmp_path / "o")]
    assert main(argv) == code


def test_cli_abort_quota_exit(tmp_path, monkeypatch):
    import bohmpair.ensemble as ens
    real = ens.sample_initial

    def on_node(*a, **k):
        init = real(*a, **k)
        init.y2[:] = init.y1
        return init

    monkeypatch.setattr(ens, "sample_initial", on_node)
    cfg = tmp_path / "c.json"
    cfg.write_text('{"wave_kind": "entangled-antisymmetric"}')
    argv = ["simulate", "--config", str(cfg), "--n", "100", "--out", str(tmp_path)]
    assert main(argv) == EXIT_ABORT_QUOTA


def test_scenario_enum_values():
    assert {s.value for s in Scenario} == {"fig1", "fig2", "fig3", "custom"}
