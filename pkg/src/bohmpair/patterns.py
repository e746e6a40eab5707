"""Binned screen patterns, divergences between them, and gap finding."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import GridMismatch


def uniform_edges(lo: float, hi: float, width: float) -> np.ndarray:
    """Bin edges of constant ``width`` starting at ``lo`` and covering ``hi``."""
    if not width > 0:
        raise ValueError("bin width must be > 0")
    if not hi > lo:
        raise ValueError("empty range")
    n = int(math.ceil((hi - lo) / width - 1e-9))
    return lo + width * np.arange(n + 1)


@dataclass
class Pattern:
    """Non-negative weights per bin on a strictly increasing edge grid.

    Weights are arrival counts for simulated ensembles and probability
    masses for predicted patterns; both normalize the same way.
    """

    bin_edges: np.ndarray
    counts: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.bin_edges.ndim != 1 or self.bin_edges.size < 2:
            raise ValueError("need at least two bin edges")
        if not np.all(np.diff(self.bin_edges) > 0):
            raise ValueError("bin edges must be strictly increasing")
        if self.counts.shape != (self.bin_edges.size - 1,):
            raise ValueError("counts must have one entry per bin")
        if np.any(self.counts < 0) or not np.all(np.isfinite(self.counts)):
            raise ValueError("counts must be finite and non-negative")

    @classmethod
    def empty(cls, bin_edges, **meta):
        edges = np.asarray(bin_edges, dtype=float)
        return cls(edges, np.zeros(edges.size - 1), dict(meta))

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    @property
    def bin_width(self) -> float:
        return float(self.widths.mean())

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def total_weight(self) -> float:
        return float(self.counts.sum())

    @property
    def probabilities(self) -> np.ndarray:
        total = self.total_weight
        return self.counts / total if total > 0 else np.zeros_like(self.counts)

    @property
    def normalized_density(self) -> np.ndarray:
        return self.probabilities / self.widths


@dataclass(frozen=True)
class DivergenceReport:
    ks: float
    tv: float
    chi2: float
    chi2_dof: int
    chi2_pvalue: float

    def as_dict(self):
        return {"ks": self.ks, "tv": self.tv, "chi2": self.chi2,
                "chi2_dof": self.chi2_dof, "chi2_pvalue": self.chi2_pvalue}


def _bin_masses(density, edges, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
    vals = np.asarray(density(nodes.ravel()), dtype=float).reshape(nodes.shape)
    return (0.5 * (hi - lo) * w * vals).sum(axis=1)


def _grouped(observed, expected, min_expected):
    """Merge consecutive bins until each group expects >= ``min_expected``."""
    obs_g, exp_g = [], []
    o_acc = e_acc = 0.0
    for o, e in zip(observed, expected):
        o_acc += o
        e_acc += e
        if e_acc >= min_expected:
            obs_g.append(o_acc)
            exp_g.append(e_acc)
            o_acc = e_acc = 0.0
    if e_acc > 0 or o_acc > 0:
        if exp_g:
            obs_g[-1] += o_acc
            exp_g[-1] += e_acc
        else:
            obs_g.append(o_acc)
            exp_g.append(e_acc)
    return np.array(obs_g), np.array(exp_g)


def compare_patterns(observed: Pattern, expected, min_expected: float = 5.0) -> DivergenceReport:
    """KS statistic, total-variation distance and Pearson chi^2 between patterns.

    ``expected`` is a :class:`Pattern` on the same edges or a callable density
    (integrated over each bin).  Both sides are normalized over the bins.
    The chi^2 test treats ``observed.counts`` as counts and merges sparse
    bins so every group expects at least ``min_expected`` arrivals.
    """
    if callable(expected):
        masses = np.clip(_bin_masses(expected, observed.bin_edges), 0.0, None)
        expected = Pattern(observed.bin_edges, masses)
    if (observed.bin_edges.shape != expected.bin_edges.shape
            or not np.allclose(observed.bin_edges, expected.bin_edges,
                               rtol=1e-12, atol=1e-12 * observed.bin_width)):
        raise GridMismatch("patterns have different bin edges")

    p, q = observed.probabilities, expected.probabilities
    ks = float(np.max(np.abs(np.cumsum(p) - np.cumsum(q)))) if p.size else 0.0
    tv = float(0.5 * np.abs(p - q).sum())

    n = observed.total_weight
    if n == 0 or expected.total_weight == 0:
        return DivergenceReport(ks, tv, 0.0, 0, 1.0)
    o, e = _grouped(observed.counts, q * n, min_expected)
    dof = max(o.size - 1, 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(e > 0, (o - e) ** 2 / e, np.where(o > 0, np.inf, 0.0))
    chi2 = float(terms.sum())
    pvalue = float(stats.chi2.sf(chi2, dof)) if dof > 0 else 1.0
    return DivergenceReport(ks, tv, chi2, dof, pvalue)


@dataclass(frozen=True)
class Gap:
    length: float
    center: float
    left: float
    right: float

    def as_dict(self):
        return {k: (v if math.isfinite(v) else None) for k, v in vars(self).items()}


def measure_gap(pattern: Pattern, peak_fraction: float) -> Gap:
    """Widest run of bins below ``peak_fraction * max`` flanked by bins at or
    above that level on both sides.  Zero length if there is none."""
    if not 0 < peak_fraction < 1:
        raise ValueError("peak_fraction must lie in (0, 1)")
    dens = pattern.normalized_density
    none = Gap(0.0, math.nan, math.nan, math.nan)
    if dens.size == 0 or dens.max() <= 0:
        return none
    high = np.flatnonzero(dens >= peak_fraction * dens.max())
    edges = pattern.bin_edges
    spans = edges[high[1:]] - edges[high[:-1] + 1]
    if spans.size == 0 or spans.max() <= 0:
        return none
    k = int(np.argmax(spans))
    left, right = edges[high[k] + 1], edges[high[k + 1]]
    return Gap(float(right - left), float(0.5 * (left + right)), float(left), float(right))
