"""Built-in experiment presets and the run orchestration behind the CLI."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import (DEFAULT_STRICTNESS, Kinematics, PhysicalConfig, RegimeFinding,
                     Scenario, ShiftMode, SourceSpec, WaveKind, derive_kinematics,
                     equilibrium_com_spread, validate_regime)
from .ensemble import (ABORT_QUOTA, DetectionRecords, histogram, run_ensemble,
                       selective_filter)
from .errors import ConfigError, DegenerateSupport, RegimeViolation
from .export import (SCHEMA_VERSION, pattern_payload, write_json, write_pattern_csv,
                     write_records_csv)
from .guidance import TrajectoryStatus
from .oracles import com_path, empty_interval, fringe_spacing, oracle_reports
from .patterns import DivergenceReport, Gap, Pattern, compare_patterns, measure_gap, uniform_edges
from .sqm import conditional_pattern_selective, line_pattern, marginal_pattern, opposite_side_mass
from .wavefunction import WaveFunction

COMMANDS = ("simulate", "predict", "compare", "validate", "oracles")
MIN_ENSEMBLE = 100
EQUIVARIANCE_KS = 0.02
EQUIVARIANCE_PVALUE = 0.01
GAP_RTOL = 0.25
SQM_GAP_DENSITY = 0.2
SYMMETRIC_PAIR_FRACTION = 0.95
PEAK_FRACTION = 0.05
PATTERN_REACH = 8.0

PRESETS: dict[Scenario, tuple[PhysicalConfig, SourceSpec, bool]] = {
    Scenario.FIG1: (
        PhysicalConfig(slit_offset_Y=1.0, screen_distance_D=2.0, detector_width_Delta=0.1),
        SourceSpec(WaveKind.ENTANGLED_SYMMETRIC, y0_mean=0.0, y0_spread=0.0),
        False,
    ),
    Scenario.FIG2: (
        PhysicalConfig(slit_offset_Y=0.05, screen_distance_D=2.0, detector_width_Delta=0.1),
        SourceSpec(WaveKind.UNENTANGLED),
        True,
    ),
    Scenario.FIG3: (
        PhysicalConfig(slit_offset_Y=0.05, screen_distance_D=40.0, detector_width_Delta=1.0),
        SourceSpec(WaveKind.UNENTANGLED, y0_mean=20.0, shift_mode=ShiftMode.SPLIT),
        True,
    ),
    Scenario.CUSTOM: (PhysicalConfig(), SourceSpec(), False),
}


def default_out_dir() -> Path:
    return Path(os.environ.get("BOHMPAIR_OUT", "bohmpair-out"))


@dataclass(frozen=True)
class RunManifest:
    scenario: Scenario = Scenario.FIG1
    config: PhysicalConfig = field(default_factory=lambda: PRESETS[Scenario.FIG1][0])
    source: SourceSpec = field(default_factory=lambda: PRESETS[Scenario.FIG1][1])
    n: int = 10_000
    tol: float = 1e-9
    selective: bool = False
    out_dir: Path | None = None
    seed: int = 0
    workers: int = 1
    strict_regime: bool = False
    strictness: float = DEFAULT_STRICTNESS
    abort_quota: float = ABORT_QUOTA
    peak_fraction: float = PEAK_FRACTION
    dump_trajectories: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scenario", Scenario(self.scenario))
        if self.n < MIN_ENSEMBLE:
            raise ConfigError(f"ensemble size must be >= {MIN_ENSEMBLE}, got {self.n}")
        if not 1e-12 <= self.tol <= 1e-3:
            raise ConfigError(f"tol must lie in [1e-12, 1e-3], got {self.tol!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.source.rng_seed != self.seed:
            object.__setattr__(self, "source", replace(self.source, rng_seed=self.seed))

    @classmethod
    def preset(cls, scenario, **overrides) -> RunManifest:
        scenario = Scenario(scenario)
        cfg, src, selective = PRESETS[scenario]
        args = {"scenario": scenario, "config": cfg, "source": src, "selective": selective}
        args.update(overrides)
        return cls(**args)

    def parameters(self) -> dict:
        return {**vars(self.config),
                **{k: v for k, v in vars(self.source).items() if k != "rng_seed"}}


@dataclass
class RunReport:
    manifest: RunManifest
    command: str
    kinematics: Kinematics
    regime: list[RegimeFinding]
    oracles: list
    records: DetectionRecords | None = None
    patterns: dict[str, Pattern] = field(default_factory=dict)
    divergence: dict[str, DivergenceReport] = field(default_factory=dict)
    checks: dict[str, dict] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    gap: Gap | None = None
    files: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values())

    def abort_stats(self):
        if self.records is None:
            return None
        status = self.records.status
        return {
            "n_total": len(self.records),
            "n_completed": int(self.records.completed.sum()),
            "n_aborted": self.records.n_aborted,
            "by_status": {s.label: int(np.count_nonzero(status == s)) for s in TrajectoryStatus},
            "quota": self.manifest.abort_quota,
        }

    def summary(self) -> dict:
        m = self.manifest
        return {
            "schema_version": SCHEMA_VERSION,
            "package_version": __version__,
            "command": self.command,
            "scenario": m.scenario.value,
            "seed": m.seed,
            "n": m.n if self.records is not None else None,
            "tol": m.tol,
            "selective": m.selective,
            "sqm_selective_reading": "max density over gap bins vs pattern peak",
            "parameters": m.parameters(),
            "kinematics": vars(self.kinematics),
            "regime": [f.as_dict() for f in self.regime],
            "oracles": [o.as_dict() for o in self.oracles],
            "abort_stats": self.abort_stats(),
            "divergence": {k: v.as_dict() for k, v in self.divergence.items()},
            "checks": self.checks,
            "stats": self.stats,
            "gap": self.gap.as_dict() if self.gap is not None else None,
            "files": self.files,
        }


def _check(value, threshold, passed):
    return {"value": float(value), "threshold": float(threshold), "passed": bool(passed)}


def screen_edges(manifest: RunManifest, kin: Kinematics) -> np.ndarray:
    """Bin edges aligned to the detector width, wide enough for every arrival.

    The symmetric core spans the drifted slits plus eight spread widths; a
    displaced source extends the side it is displaced to.
    """
    cfg, src = manifest.config, manifest.source
    width = cfg.detector_width_Delta
    stretch = math.sqrt(1.0 + kin.tau ** 2)
    reach = cfg.slit_offset_Y + abs(kin.u_y * kin.t_D) + PATTERN_REACH * cfg.sigma0 * stretch
    shift = 2.0 * abs(src.y0_mean) * stretch + 4.0 * src.y0_spread * stretch
    lo = -reach - (shift if src.y0_mean < 0 else 0.0)
    hi = reach + (shift if src.y0_mean > 0 else 0.0)
    lo = math.floor(lo / width) * width
    hi = math.ceil(hi / width) * width
    return uniform_edges(lo, hi, width)


def _reference_pattern(wf, manifest, kin, edges):
    """The |psi|^2 pattern a sharp or equilibrium source should reproduce,
    or ``None`` when the source is neither."""
    src = manifest.source
    if wf.kind.is_entangled:
        if src.y0_spread == 0:
            y_com = float(com_path(manifest.config, src.y0_mean, kin.t_D))
            return "sqm_line", line_pattern(wf, kin.t_D, edges, y_com)
        if src.y0_mean == 0 and math.isclose(src.y0_spread,
                                             equilibrium_com_spread(manifest.config)):
            return "sqm_marginal", None
        return None, None
    return ("sqm_marginal", None) if src.y0_mean == 0 else (None, None)


def run_scenario(manifest: RunManifest, command: str = "compare") -> RunReport:
    """Run one CLI verb for ``manifest`` and gather everything it reports.

    Raises :class:`RegimeViolation` when ``strict_regime`` is set and a
    regime finding fails, and lets :class:`AbortQuotaExceeded` through.
    """
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    cfg, src = manifest.config, manifest.source
    kin = derive_kinematics(cfg)
    findings = validate_regime(cfg, kin, src, manifest.scenario, manifest.strictness)
    report = RunReport(manifest, command, kin, findings,
                       oracle_reports(cfg, src.y0_mean, kin.t_D))
    if manifest.strict_regime:
        failed = [f.name for f in findings if not f.satisfied]
        if failed:
            raise RegimeViolation(f"regime conditions violated: {', '.join(failed)}")
    if command in ("validate", "oracles"):
        return report

    wf = WaveFunction(src.wave_kind, cfg, kin)
    edges = screen_edges(manifest, kin)
    t = kin.t_D

    if command in ("predict", "compare"):
        _predict(report, wf, edges, t)
    if command in ("simulate", "compare"):
        _simulate(report, wf, edges)
    if command == "compare":
        _compare(report, wf, edges)
    return report


def _predict(report, wf, edges, t):
    m = report.manifest
    report.patterns["sqm_marginal"] = marginal_pattern(wf, t, edges)
    name, line = _reference_pattern(wf, m, report.kinematics, edges)
    if name == "sqm_line":
        report.patterns["sqm_line"] = line
    if m.selective:
        report.stats["sqm_opposite_side_mass"] = opposite_side_mass(wf, t)
        try:
            report.patterns["sqm_selective"] = conditional_pattern_selective(wf, t, edges)
        except DegenerateSupport:
            report.patterns["sqm_selective"] = Pattern.empty(edges, source="sqm-selective")


def _simulate(report, wf, edges):
    m = report.manifest
    dump = None
    if m.dump_trajectories and m.out_dir is not None:
        Path(m.out_dir).mkdir(parents=True, exist_ok=True)
        dump = Path(m.out_dir) / "trajectories.csv"
        report.files["trajectories"] = dump.name
    records = run_ensemble(wf, m.source, m.n, m.tol, workers=m.workers,
                           abort_quota=m.abort_quota, dump_path=dump,
                           dump_limit=m.dump_trajectories)
    report.records = records
    rng = (edges[0], edges[-1])
    width = m.config.detector_width_Delta
    report.patterns["bqm"] = histogram(records, "both", width, rng)
    done = records.subset(records.completed)
    report.stats["n_completed"] = len(done)
    report.stats["axis_crossings"] = int(np.count_nonzero(done.crossed_y1)
                                         + np.count_nonzero(done.crossed_y2))
    report.stats["arrivals_outside_grid"] = int(np.count_nonzero(
        (np.concatenate([done.y1_final, done.y2_final]) < rng[0])
        | (np.concatenate([done.y1_final, done.y2_final]) >= rng[1])))

    if m.selective:
        kept = selective_filter(records)
        report.stats["n_selected"] = len(kept)
        report.patterns["bqm_selected"] = histogram(kept, "both", width, rng)

    if not wf.kind.is_entangled:
        report.checks["no-axis-crossing"] = _check(report.stats["axis_crossings"], 0,
                                                   report.stats["axis_crossings"] == 0)
    if wf.kind.is_entangled and m.source.y0_spread == 0 and len(done):
        y_com = 2.0 * com_path(m.config, m.source.y0_mean, report.kinematics.t_D)
        dev = float(np.max(np.abs(done.y1_final + done.y2_final - y_com)))
        limit = max(1e-6, 1e3 * m.tol) * m.config.sigma0
        report.checks["symmetric-detection"] = _check(dev, limit, dev <= limit)
    if m.selective and not wf.kind.is_entangled and m.source.y0_mean == 0:
        kept = selective_filter(records)
        half = 0.5 * fringe_spacing(m.config, report.kinematics.t_D)
        frac = (float(np.mean(np.abs(kept.y1_final + kept.y2_final) < half))
                if len(kept) else 0.0)
        report.stats["symmetric_pair_fraction"] = frac
        report.checks["first-maximum-symmetric-pairs"] = _check(
            frac, SYMMETRIC_PAIR_FRACTION, frac >= SYMMETRIC_PAIR_FRACTION)


def _compare(report, wf, edges):
    m, kin = report.manifest, report.kinematics
    bqm = report.patterns["bqm"]
    report.divergence["bqm_vs_sqm_marginal"] = compare_patterns(bqm, report.patterns["sqm_marginal"])
    name = ("sqm_line" if "sqm_line" in report.patterns
            else _reference_pattern(wf, m, kin, edges)[0])
    if name is not None:
        div = compare_patterns(bqm, report.patterns[name])
        report.divergence[f"bqm_vs_{name}"] = div
        report.checks["equivariance-ks"] = _check(div.ks, EQUIVARIANCE_KS, div.ks < EQUIVARIANCE_KS)
        report.checks["equivariance-chi2-p"] = _check(div.chi2_pvalue, EQUIVARIANCE_PVALUE,
                                                      div.chi2_pvalue > EQUIVARIANCE_PVALUE)
    if not m.selective:
        return
    sel, sqm_sel = report.patterns["bqm_selected"], report.patterns["sqm_selective"]
    report.divergence["bqm_selected_vs_sqm_selective"] = compare_patterns(sel, sqm_sel)
    if wf.kind.is_entangled or m.source.y0_mean == 0:
        return
    gap = measure_gap(sel, m.peak_fraction)
    report.gap = gap
    try:
        oracle = float(empty_interval(m.config, abs(m.source.y0_mean), kin.t_D))
    except RegimeViolation:
        return
    rel = abs(gap.length - oracle) / oracle
    report.checks["empty-interval"] = _check(rel, GAP_RTOL, rel <= GAP_RTOL)
    level = 0.0
    dens = sqm_sel.normalized_density
    if gap.length > 0 and dens.size and dens.max() > 0:
        inside = (sqm_sel.bin_edges[:-1] >= gap.left) & (sqm_sel.bin_edges[1:] <= gap.right)
        if inside.any():
            level = float(dens[inside].max() / dens.max())
    report.stats["sqm_selective_level_in_gap"] = level
    report.checks["sqm-density-in-gap"] = _check(level, SQM_GAP_DENSITY, level >= SQM_GAP_DENSITY)


def emit_plot_data(report: RunReport, out_dir=None) -> dict[str, str]:
    """Write records, pattern CSV/JSON files and ``summary.json``.

    Returns the mapping of logical names to file names (also stored in the
    summary).  ``OSError`` propagates.
    """
    out = Path(out_dir or report.manifest.out_dir or default_out_dir())
    out.mkdir(parents=True, exist_ok=True)
    files = report.files
    meta = {"seed": report.manifest.seed, "parameters": report.manifest.parameters(),
            "divergence": {k: v.as_dict() for k, v in report.divergence.items()}}
    if report.records is not None:
        write_records_csv(out / "records.csv", report.records)
        files["records"] = "records.csv"
    for name, pattern in report.patterns.items():
        write_pattern_csv(out / f"pattern_{name}.csv", pattern)
        write_json(out / f"pattern_{name}.json", pattern_payload(pattern, meta))
        files[f"pattern_{name}"] = f"pattern_{name}.csv"
    files["summary"] = "summary.json"
    write_json(out / "summary.json", report.summary())
    return files
