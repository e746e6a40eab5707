"""Initial-position sampling, ensemble runs, selective detection, histograms.

Trajectory ``i`` draws its random numbers from a Philox stream keyed by the
master seed with ``i`` in the high counter word, and ensembles are
integrated in fixed chunks of consecutive ids.  Records therefore depend
only on ``(seed, parameters)``, never on the number of worker processes.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np
from scipy.special import ndtri

from .config import ShiftMode, SourceSpec
from .errors import AbortQuotaExceeded, SamplingFailure
from .guidance import TrajectoryStatus, integrate_batch
from .patterns import Pattern, compare_patterns, measure_gap, uniform_edges  # noqa: F401
from .wavefunction import WaveFunction

log = logging.getLogger(__name__)

SAMPLER_POINTS = 2 ** 14
SAMPLER_HALF_WIDTH = 8.0
CHUNK_SIZE = 8192
ABORT_QUOTA = 0.01
_N_UNIFORMS = 4


# -- random numbers ------------------------------------------------------------


def trajectory_uniforms(seed: int, ids) -> np.ndarray:
    """``(len(ids), 4)`` uniforms in (0, 1), one independent Philox stream per id."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, 0x5EED_B0B0], dtype=np.uint64)
    out = np.empty((len(ids), _N_UNIFORMS))
    for row, i in enumerate(ids):
        bitgen = np.random.Philox(key=key, counter=np.array([0, 0, 0, int(i)], dtype=np.uint64))
        out[row] = np.random.Generator(bitgen).random(_N_UNIFORMS)
    # shift off zero: random() returns multiples of 2**-53 in [0, 1)
    return out + 2.0 ** -54


# -- tabulated sampling ----------------------------------------------------------


class TabulatedSampler:
    """Inverse-CDF sampling from a density tabulated on a fine grid.

    The CDF is accumulated with the trapezoid rule and inverted by linear
    interpolation.
    """

    def __init__(self, grid, density):
        self.grid = np.asarray(grid, dtype=float)
        density = np.asarray(density, dtype=float)
        if np.any(density < 0) or not density.sum() > 0:
            raise ValueError("density must be non-negative with positive mass")
        cdf = np.concatenate([[0.0], np.cumsum(0.5 * (density[1:] + density[:-1])
                                               * np.diff(self.grid))])
        self.cdf = cdf / cdf[-1]

    def __call__(self, u):
        return np.interp(u, self.cdf, self.grid)


def rejection_sample(density, lo, hi, n, rng, bound=None, min_acceptance=0.01,
                     batch=None):
    """Draw ``n`` samples from ``density`` on ``[lo, hi]`` with a flat envelope.

    ``bound`` defaults to 1.05 times the maximum on a 4097-point grid.
    Raises :class:`SamplingFailure` if the acceptance rate drops below
    ``min_acceptance``.
    """
    if bound is None:
        bound = 1.05 * float(np.max(density(np.linspace(lo, hi, 4097))))
    batch = batch or max(1024, 2 * n)
    out, tried = [], 0
    while sum(len(o) for o in out) < n:
        x = rng.uniform(lo, hi, batch)
        keep = rng.uniform(0.0, bound, batch) < density(x)
        tried += batch
        out.append(x[keep])
        got = sum(len(o) for o in out)
        if got / tried < min_acceptance:
            raise SamplingFailure(f"acceptance {got / tried:.2e} below {min_acceptance:g}")
    return np.concatenate(out)[:n]


def _sampler_grid(wf):
    reach = wf.config.slit_offset_Y + SAMPLER_HALF_WIDTH * wf.config.sigma0
    return np.linspace(-reach, reach, SAMPLER_POINTS)


def slit_sampler(wf: WaveFunction) -> TabulatedSampler:
    """Sampler for one particle of the unentangled state at t=0."""
    grid = _sampler_grid(wf)
    return TabulatedSampler(grid, wf.single_density(grid, 0.0))


def relative_sampler(wf: WaveFunction) -> TabulatedSampler:
    """Sampler for ``d = y1 - y0`` of an entangled pair at t=0.

    The conditional density of y1 given the center of mass y0 is
    |psi(y0 + d, y0 - d, 0)|^2.  The entangled wave functions factor into a
    center-of-mass Gaussian times a function of d, so the shape in d does
    not depend on y0 and one table serves every pair.
    """
    grid = _sampler_grid(wf)
    return TabulatedSampler(grid, wf.density(grid, -grid, 0.0))


@dataclass
class InitialConfigurations:
    trajectory_id: np.ndarray
    y1: np.ndarray
    y2: np.ndarray

    @property
    def y0(self):
        return 0.5 * (self.y1 + self.y2)

    def __len__(self):
        return self.y1.size


def sample_initial(wf: WaveFunction, source: SourceSpec, n: int, start: int = 0,
                   sampler=None) -> InitialConfigurations:
    """Initial positions for trajectories ``start .. start + n - 1``.

    Entangled kinds: the center of mass y0 ~ Normal(y0_mean, y0_spread) and
    y1 = y0 + d, y2 = y0 - d with d from the conditional density.
    Unentangled kind: y1 and y2 are independent draws from the two-slit
    density; a nonzero ``y0_mean`` displaces the pair according to
    ``source.shift_mode``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ids = np.arange(start, start + n, dtype=np.int64)
    u = trajectory_uniforms(source.rng_seed, ids)
    if wf.kind.is_entangled:
        sampler = sampler or relative_sampler(wf)
        y0 = source.y0_mean + source.y0_spread * ndtri(u[:, 0]) if source.y0_spread else \
            np.full(n, float(source.y0_mean))
        d = sampler(u[:, 1])
        return InitialConfigurations(ids, y0 + d, y0 - d)

    sampler = sampler or slit_sampler(wf)
    y1, y2 = sampler(u[:, 1]), sampler(u[:, 2])
    if source.y0_mean:
        if source.shift_mode is ShiftMode.JOINT:
            y1 = y1 + source.y0_mean
            y2 = y2 + source.y0_mean
        else:
            first = u[:, 3] < 0.5
            y1 = np.where(first, y1 + 2 * source.y0_mean, y1)
            y2 = np.where(first, y2, y2 + 2 * source.y0_mean)
    return InitialConfigurations(ids, y1, y2)


# -- detection records ---------------------------------------------------------


@dataclass(frozen=True)
class DetectionRecord:
    trajectory_id: int
    status: TrajectoryStatus
    y0_initial: float
    y1_initial: float
    y2_initial: float
    y1_final: float
    y2_final: float
    t_arrival: float


@dataclass
class DetectionRecords:
    """Columnar store of per-trajectory outcomes, ordered by trajectory id."""

    trajectory_id: np.ndarray
    status: np.ndarray
    y1_initial: np.ndarray
    y2_initial: np.ndarray
    y1_final: np.ndarray
    y2_final: np.ndarray
    t_arrival: np.ndarray
    crossed_y1: np.ndarray
    crossed_y2: np.ndarray
    min_margin: np.ndarray
    node_events: np.ndarray

    @property
    def y0_initial(self):
        return 0.5 * (self.y1_initial + self.y2_initial)

    @property
    def completed(self):
        return self.status == TrajectoryStatus.COMPLETED

    @property
    def n_aborted(self) -> int:
        return int(np.count_nonzero(~self.completed))

    def __len__(self):
        return self.trajectory_id.size

    def subset(self, mask) -> DetectionRecords:
        return DetectionRecords(**{f.name: getattr(self, f.name)[mask] for f in fields(self)})

    def __iter__(self):
        y0 = self.y0_initial
        for k in range(len(self)):
            yield DetectionRecord(
                int(self.trajectory_id[k]), TrajectoryStatus(int(self.status[k])),
                float(y0[k]), float(self.y1_initial[k]), float(self.y2_initial[k]),
                float(self.y1_final[k]), float(self.y2_final[k]), float(self.t_arrival[k]))

    @classmethod
    def concatenate(cls, parts):
        parts = list(parts)
        return cls(**{f.name: np.concatenate([getattr(p, f.name) for p in parts])
                      for f in fields(cls)})


def _run_chunk(wf, source, start, n, t_end, tol, record):
    init = sample_initial(wf, source, n, start)
    res = integrate_batch(wf, init.y1, init.y2, t_end, tol, record=record)
    recs = DetectionRecords(
        trajectory_id=init.trajectory_id, status=res.status,
        y1_initial=init.y1, y2_initial=init.y2,
        y1_final=res.y1, y2_final=res.y2, t_arrival=res.t,
        crossed_y1=res.crossed_y1, crossed_y2=res.crossed_y2,
        min_margin=res.min_margin, node_events=res.node_events,
    )
    samples = (res.sample_t, res.samples, res.n_recorded) if record else None
    return recs, samples


def _run_chunk_star(args):
    return _run_chunk(*args)


def run_ensemble(wf: WaveFunction, source: SourceSpec, n: int, tol: float = 1e-9, *,
                 workers: int = 1, chunk_size: int = CHUNK_SIZE,
                 abort_quota: float = ABORT_QUOTA, t_end: float | None = None,
                 dump_path=None, dump_limit: int | None = None) -> DetectionRecords:
    """Integrate ``n`` trajectories to the screen and collect their records.

    Per-trajectory aborts are reported through ``status``; the run itself
    fails with :class:`AbortQuotaExceeded` only when more than
    ``abort_quota`` of the trajectories aborted (the records are attached to
    the exception).  With ``dump_path`` the sampled trajectories (first
    ``dump_limit`` of them, or all) are written as CSV.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    t_end = wf.kin.t_D if t_end is None else t_end
    starts = list(range(0, n, chunk_size))
    jobs = []
    for s in starts:
        m = min(chunk_size, n - s)
        record = dump_path is not None and (dump_limit is None or s < dump_limit)
        jobs.append((wf, source, s, m, t_end, tol, record))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk_star, jobs))
    else:
        results = [_run_chunk(*job) for job in jobs]

    records = DetectionRecords.concatenate(r for r, _ in results)
    if dump_path is not None:
        _write_trajectory_dump(dump_path, results, dump_limit)

    n_abort = records.n_aborted
    if n_abort:
        log.info("%d of %d trajectories aborted", n_abort, n)
    if n_abort > abort_quota * n:
        exc = AbortQuotaExceeded(n_abort, n, abort_quota)
        exc.records = records
        raise exc
    return records


def _write_trajectory_dump(path, results, limit):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["trajectory_id", "t", "y1", "y2", "v1", "v2"])
        for recs, samples in results:
            if samples is None:
                continue
            sample_t, data, n_rec = samples
            for k, tid in enumerate(recs.trajectory_id):
                if limit is not None and tid >= limit:
                    break
                for j in range(int(n_rec[k])):
                    writer.writerow([int(tid), repr(float(sample_t[j]))]
                                    + [repr(float(v)) for v in data[k, j]])


# -- selection and histograms --------------------------------------------------


def selective_filter(records: DetectionRecords) -> DetectionRecords:
    """Keep completed pairs detected strictly on opposite sides of the axis."""
    keep = records.completed & (records.y1_final * records.y2_final < 0)
    return records.subset(keep)


PROJECTIONS = ("y1", "y2", "both")


def histogram(records: DetectionRecords, projection: str = "both",
              bin_width: float = 0.1, range=(-10.0, 10.0)) -> Pattern:
    """Arrival counts of completed records per screen bin.

    ``projection="both"`` pools the two arrivals of every pair.  Arrivals
    outside ``range`` are not counted.
    """
    if projection not in PROJECTIONS:
        raise ValueError(f"projection must be one of {PROJECTIONS}")
    edges = uniform_edges(range[0], range[1], bin_width)
    done = records.completed
    parts = []
    if projection in ("y1", "both"):
        parts.append(records.y1_final[done])
    if projection in ("y2", "both"):
        parts.append(records.y2_final[done])
    arrivals = np.concatenate(parts) if parts else np.empty(0)
    counts, _ = np.histogram(arrivals, bins=edges)
    return Pattern(edges, counts.astype(float),
                   {"source": "bqm", "projection": projection, "n_pairs": int(done.sum())})


def histogram_range(records: DetectionRecords, bin_width: float, pad_bins: int = 2):
    """A bin-aligned range covering every completed arrival."""
    done = records.completed
    ys = np.concatenate([records.y1_final[done], records.y2_final[done]])
    if ys.size == 0:
        return (-bin_width, bin_width)
    lo = (math.floor(ys.min() / bin_width) - pad_bins) * bin_width
    hi = (math.ceil(ys.max() / bin_width) + pad_bins) * bin_width
    return (lo, hi)
