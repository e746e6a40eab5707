"""Standard quantum mechanical predictions from |psi|^2 by quadrature.

The normalization constants of the wave functions are never carried
symbolically; every density is divided by ``Z(t) = integral |psi|^2``
computed on a composite Gauss-Legendre grid.  All three wave functions are
symmetric under exchange of |psi|^2 arguments, so the y1 and y2 marginals
coincide and the pooled screen pattern equals either one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import DegenerateSupport, NonConvergence
from .patterns import Pattern
from .wavefunction import WaveFunction

PANEL_ORDER = 32
BIN_ORDER = 16
GRID_HALF_WIDTH = 8.0
MIN_COVERAGE = 6.0
CONVERGENCE_RTOL = 1e-8


@dataclass(frozen=True)
class QuadratureGrid:
    """1-D integration rule over ``[y_min, y_max]``, used along each axis."""

    y_min: float
    y_max: float
    n_points: int = 1024
    rule: str = "gauss-legendre"

    def __post_init__(self):
        if not self.y_max > self.y_min:
            raise ValueError("grid range is empty")
        if self.n_points < 64:
            raise ValueError("n_points must be >= 64")
        if self.rule not in ("gauss-legendre", "trapezoid"):
            raise ValueError(f"unknown rule {self.rule!r}")
        if self.rule == "gauss-legendre" and self.n_points % PANEL_ORDER:
            raise ValueError(f"gauss-legendre needs n_points divisible by {PANEL_ORDER}")

    def refined(self) -> QuadratureGrid:
        return replace(self, n_points=2 * self.n_points)

    def nodes_weights(self, split_at: float | None = None):
        """Nodes and weights; with ``split_at`` inside the range the rule is
        applied separately on both sides so a kink there is integrated exactly."""
        if split_at is not None and self.y_min < split_at < self.y_max:
            frac = (split_at - self.y_min) / (self.y_max - self.y_min)
            n_lo = max(PANEL_ORDER, int(round(frac * self.n_points / PANEL_ORDER)) * PANEL_ORDER)
            n_lo = min(n_lo, self.n_points - PANEL_ORDER)
            lo = _rule(self.rule, self.y_min, split_at, n_lo)
            hi = _rule(self.rule, split_at, self.y_max, self.n_points - n_lo)
            return np.concatenate([lo[0], hi[0]]), np.concatenate([lo[1], hi[1]])
        return _rule(self.rule, self.y_min, self.y_max, self.n_points)


def _rule(rule, a, b, n):
    if rule == "trapezoid":
        x = np.linspace(a, b, n)
        w = np.full(n, (b - a) / (n - 1))
        w[[0, -1]] *= 0.5
        return x, w
    return _gauss_legendre(a, b, n // PANEL_ORDER)


def _gauss_legendre(a, b, panels, order=PANEL_ORDER):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    return (mid + half * x).ravel(), (half * w).ravel()


def default_grid(wf: WaveFunction, t: float, n_points: int = 1024) -> QuadratureGrid:
    """Symmetric grid reaching 8 sigma0 sqrt(1 + tau^2) past the drifted slit centres."""
    cfg = wf.config
    reach = (abs(cfg.slit_offset_Y + wf.kin.u_y * t)
             + GRID_HALF_WIDTH * cfg.sigma0 * math.sqrt(1.0 + cfg.tau(t) ** 2))
    return QuadratureGrid(-reach, reach, n_points)


def _check_coverage(wf, t, grid):
    cfg = wf.config
    centre = abs(cfg.slit_offset_Y + wf.kin.u_y * t)
    need = centre + MIN_COVERAGE * cfg.sigma0 * math.sqrt(1.0 + cfg.tau(t) ** 2)
    if grid.y_min > -need or grid.y_max < need:
        raise ValueError(f"quadrature grid must cover +/-{need:.4g}")


def _agree(a, b, rtol=CONVERGENCE_RTOL):
    return abs(a - b) <= rtol * max(abs(a), abs(b))


# -- normalization -----------------------------------------------------------


@lru_cache(maxsize=64)
def _integral_2d(wf, t, grid, quadrants=False):
    x, w = grid.nodes_weights(split_at=0.0 if quadrants else None)
    rho = wf.density(x[:, None], x[None, :], t)
    if quadrants:
        rho = np.where(np.multiply.outer(x, x) < 0, rho, 0.0)
    return float(w @ rho @ w)


def _converged_integral(wf, t, grid, quadrants=False):
    grid = grid or default_grid(wf, t)
    _check_coverage(wf, t, grid)
    coarse = _integral_2d(wf, float(t), grid, quadrants)
    fine = _integral_2d(wf, float(t), grid.refined(), quadrants)
    if not _agree(coarse, fine):
        raise NonConvergence(
            f"integral changed by {abs(fine - coarse) / abs(fine):.2e} under refinement")
    return fine


def normalization(wf: WaveFunction, t: float, grid: QuadratureGrid | None = None) -> float:
    """Z(t) = double integral of |psi|^2.

    Raises :class:`NonConvergence` if doubling the grid changes Z by more
    than 1e-8 relative.
    """
    return _converged_integral(wf, t, grid)


def opposite_side_mass(wf: WaveFunction, t: float, grid: QuadratureGrid | None = None) -> float:
    """Probability that the two particles are found on opposite sides of the axis."""
    return (_converged_integral(wf, t, grid, quadrants=True)
            / normalization(wf, t, grid))


# -- joint detection probability ---------------------------------------------


def joint_probability(wf: WaveFunction, yM: float, yN: float, Delta: float, t: float,
                      grid: QuadratureGrid | None = None, panels: int = 1) -> float:
    """Probability of simultaneous detection in [yM, yM+Delta] x [yN, yN+Delta]."""
    if not Delta > 0:
        raise ValueError("Delta must be > 0")

    def rect(p):
        x1, w1 = _gauss_legendre(yM, yM + Delta, p)
        x2, w2 = _gauss_legendre(yN, yN + Delta, p)
        return float(w1 @ wf.density(x1[:, None], x2[None, :], t) @ w2)

    coarse, fine = rect(panels), rect(2 * panels)
    if not abs(fine - coarse) <= CONVERGENCE_RTOL * abs(fine) + 1e-300:
        raise NonConvergence("bin integral did not converge")
    return fine / normalization(wf, t, grid)


# -- screen patterns ---------------------------------------------------------


def _grid_nodes(wf, t, grid, split_at=None):
    grid = grid or default_grid(wf, t)
    _check_coverage(wf, t, grid)
    return grid.refined().nodes_weights(split_at)


def marginal_density(wf: WaveFunction, t: float, y, grid: QuadratureGrid | None = None):
    """Normalized marginal density p(y1) = integral |psi(y1, y2)|^2 dy2 / Z."""
    x, w = _grid_nodes(wf, t, grid)
    y = np.asarray(y, dtype=float)
    rho = wf.density(y.reshape(-1, 1), x[None, :], t)
    return (rho @ w).reshape(y.shape) / normalization(wf, t, grid)


def _bin_nodes(edges, split_at=None):
    """GL nodes per bin; bins containing ``split_at`` are split there."""
    edges = np.asarray(edges, dtype=float)
    cuts = edges
    if split_at is not None and edges[0] < split_at < edges[-1]:
        cuts = np.union1d(edges, [split_at])
    x, w = np.polynomial.legendre.leggauss(BIN_ORDER)
    lo, hi = cuts[:-1, None], cuts[1:, None]
    nodes = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    owner = np.repeat(np.searchsorted(edges, cuts[:-1], side="right") - 1, BIN_ORDER)
    return nodes, weights, owner


def _masses(values, weights, owner, n_bins):
    return np.bincount(owner, weights=values * weights, minlength=n_bins)


def marginal_pattern(wf: WaveFunction, t: float, edges, grid: QuadratureGrid | None = None) -> Pattern:
    """Probability mass per screen bin of the (pooled) single-arm marginal."""
    edges = np.asarray(edges, dtype=float)
    nodes, weights, owner = _bin_nodes(edges)
    dens = marginal_density(wf, t, nodes, grid)
    masses = _masses(dens, weights, owner, edges.size - 1)
    return Pattern(edges, np.clip(masses, 0.0, None),
                   {"source": "sqm-marginal", "t": float(t)})


def conditional_pattern_selective(wf: WaveFunction, t: float, edges,
                                  grid: QuadratureGrid | None = None) -> Pattern:
    """Screen pattern of pairs kept by selective detection (y1 y2 < 0).

    |psi|^2 is restricted to the two opposite-side quadrants and renormalized
    to unit mass; the pattern is the pooled marginal of what remains.
    Raises :class:`DegenerateSupport` if the kept mass is below 1e-12.
    """
    edges = np.asarray(edges, dtype=float)
    frac = opposite_side_mass(wf, t, grid)
    if frac < 1e-12:
        raise DegenerateSupport(f"opposite-side mass {frac:.3g} is negligible")
    kept = frac * normalization(wf, t, grid)
    x, w = _grid_nodes(wf, t, grid, split_at=0.0)
    nodes, weights, owner = _bin_nodes(edges, split_at=0.0)
    rho = wf.density(nodes[:, None], x[None, :], t)
    rho = np.where(np.multiply.outer(nodes, x) < 0, rho, 0.0)
    masses = _masses(rho @ w / kept, weights, owner, edges.size - 1)
    return Pattern(edges, np.clip(masses, 0.0, None),
                   {"source": "sqm-selective", "t": float(t), "kept_fraction": frac})


def line_pattern(wf: WaveFunction, t: float, edges, y_com: float = 0.0,
                 grid: QuadratureGrid | None = None) -> Pattern:
    """Pooled pattern of pairs whose center of mass sits at ``y_com``.

    The density along the line y1 + y2 = 2 y_com is |psi(y, 2 y_com - y)|^2;
    this is what an entangled source with a sharp center of mass produces
    at the screen (the center-of-mass stretch is uniform along the line).
    """
    edges = np.asarray(edges, dtype=float)
    x, w = _grid_nodes(wf, t, grid)
    x = x + y_com
    z = float(w @ wf.density(x, 2 * y_com - x, t))
    nodes, weights, owner = _bin_nodes(edges)
    dens = 0.5 * (wf.density(nodes, 2 * y_com - nodes, t)
                  + wf.density(2 * y_com - nodes, nodes, t)) / z
    masses = _masses(dens, weights, owner, edges.size - 1)
    return Pattern(edges, np.clip(masses, 0.0, None),
                   {"source": "sqm-line", "t": float(t), "y_com": float(y_com)})


def single_particle_upper_mass(wf: WaveFunction, t: float, grid: QuadratureGrid | None = None) -> float:
    """P(y > 0) for one particle of the unentangled product state."""
    x, w = _grid_nodes(wf, t, grid, split_at=0.0)
    rho = wf.single_density(x, t)
    return float((w * rho)[x > 0].sum() / (w @ rho))
