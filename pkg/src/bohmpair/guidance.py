"""Bohmian guidance velocities and trajectory integration.

The transverse velocity of particle i is (hbar/m) Im(d_i psi / psi).  Both
wave functions are sums of two products of Gaussian packets whose ratio is
``exp(g * dy)`` for a complex rate g, so each velocity needs a single
complex exponential and stays finite far out in the tails.  A point counts
as node-adjacent when the two terms cancel: ``|T1 + T2| < eps_node *
(|T1| + |T2|)``.

Trajectories are integrated with a Dormand-Prince 5(4) pair.  The batch
integrator advances many trajectories at once, each with its own step size,
so the result for a trajectory does not depend on which other trajectories
share its batch.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_STRICTNESS
from .errors import NodeProximity, RegimeViolation
from .oracles import com_velocity_closed
from .wavefunction import ConfigurationPoint, WaveFunction, sigma_t

EPS_NODE = 1e-6
N_OUTPUT_SAMPLES = 200


class TrajectoryStatus(enum.IntEnum):
    COMPLETED = 0
    NODE_ABORT = 1
    STEP_LIMIT_ABORT = 2

    @property
    def label(self) -> str:
        return {0: "Completed", 1: "NodeAbort", 2: "StepLimitAbort"}[self.value]


@dataclass(frozen=True)
class VelocityPair:
    v1: float
    v2: float


# -- velocities --------------------------------------------------------------


def _ratio_weights(log_r, sign):
    """For a sum 1 + sign*r with r = exp(log_r): the weight w = sign*r / (1 + sign*r)
    of the second term and the cancellation margin |1 + sign*r| / (1 + |r|)."""
    big = log_r.real > 0
    q = np.exp(np.where(big, -log_r, log_r))       # |q| <= 1
    with np.errstate(divide="ignore", invalid="ignore"):
        # big: r = 1/q, so w = sign / (q + sign)
        w = np.where(big, sign / (q + sign), sign * q / (1.0 + sign * q))
        margin = np.where(big, np.abs(q + sign), np.abs(1.0 + sign * q)) / (1.0 + np.abs(q))
    return w, margin


def velocity_field(wf: WaveFunction, y1, y2, t):
    """Vectorized velocities.

    Returns ``(v1, v2, margin)``; ``margin`` is the smallest cancellation
    ratio of the sums involved (1 means no cancellation, 0 an exact node).
    """
    cfg = wf.config
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    t = np.asarray(t, dtype=float)
    scale = cfg.hbar / cfg.mass
    c = 1.0 / (4.0 * cfg.sigma0 * sigma_t(cfg, t))
    off = cfg.slit_offset_Y + wf.kin.u_y * t
    # d/dy log psi_B - d/dy log psi_A; also log(psi_B / psi_A) = g * y
    g = -4.0 * c * off - 2j * cfg.k_y
    with np.errstate(invalid="ignore", over="ignore"):
        if wf.kind.is_entangled:
            # psi = A1 B2 +/- A2 B1 with log(A2 B1 / A1 B2) = g (y1 - y2)
            w, margin = _ratio_weights(g * (y1 - y2), wf.kind.exchange_sign)
            dA1 = -2.0 * (y1 - off) * c + 1j * cfg.k_y
            dB2 = -2.0 * (y2 + off) * c - 1j * cfg.k_y
            v1 = scale * (dA1 + g * w).imag
            v2 = scale * (dB2 - g * w).imag
        else:
            # each factor A + B guides its own particle
            w1, m1 = _ratio_weights(g * y1, 1)
            w2, m2 = _ratio_weights(g * y2, 1)
            v1 = scale * (-2.0 * (y1 - off) * c + 1j * cfg.k_y + g * w1).imag
            v2 = scale * (-2.0 * (y2 - off) * c + 1j * cfg.k_y + g * w2).imag
            margin = np.minimum(m1, m2)
    return v1, v2, margin


def velocity(wf: WaveFunction, point: ConfigurationPoint,
             eps_node: float = EPS_NODE) -> VelocityPair:
    """Guidance velocity at one configuration point.

    Raises :class:`NodeProximity` when the wave function nearly cancels there.
    """
    v1, v2, margin = velocity_field(wf, point.y1, point.y2, point.t)
    if not margin >= eps_node:
        raise NodeProximity(
            f"cancellation margin {float(margin):.3g} < {eps_node:g} at {point}")
    return VelocityPair(float(v1), float(v2))


def com_velocity(wf: WaveFunction, y, t, strictness: float = DEFAULT_STRICTNESS):
    """Closed-form center-of-mass velocity.

    Exact for the entangled kinds.  For the unentangled kind it only holds
    when ``Y << sigma0`` and ``k_y ~ 0``; otherwise :class:`RegimeViolation`.
    """
    cfg = wf.config
    if not wf.kind.is_entangled:
        if (cfg.slit_offset_Y / cfg.sigma0 > strictness
                or abs(cfg.k_y) * cfg.sigma0 > strictness):
            raise RegimeViolation(
                "unentangled center-of-mass law needs Y << sigma0 and k_y ~ 0")
    return com_velocity_closed(cfg, y, t)


# -- integration -------------------------------------------------------------

# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = _B - np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                    -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass
class BatchResult:
    """Per-trajectory outcome of :func:`integrate_batch` (arrays of length n)."""

    y1: np.ndarray
    y2: np.ndarray
    t: np.ndarray
    status: np.ndarray
    steps: np.ndarray
    node_events: np.ndarray
    min_margin: np.ndarray
    crossed_y1: np.ndarray
    crossed_y2: np.ndarray
    sample_t: np.ndarray | None = None
    samples: np.ndarray | None = None      # (n, n_samples + 1, 4): y1, y2, v1, v2
    n_recorded: np.ndarray | None = None


def _eval(wf, t, y):
    v1, v2, margin = velocity_field(wf, y[:, 0], y[:, 1], t)
    return np.stack([v1, v2], axis=1), margin


def integrate_batch(wf: WaveFunction, y1, y2, t_end: float, tol: float = 1e-9, *,
                    n_samples: int = N_OUTPUT_SAMPLES, record: bool = False,
                    eps_node: float = EPS_NODE, max_steps: int = 100_000,
                    h_min: float | None = None, h_max: float | None = None) -> BatchResult:
    """Integrate dy/dt = velocity for many trajectories from t=0 to ``t_end``.

    Steps are adapted per trajectory so that the local error estimate stays
    below ``tol`` (relative, with absolute floor ``tol * sigma0``).  Every
    trajectory lands exactly on the ``n_samples + 1`` output times
    ``linspace(0, t_end, n_samples + 1)``.  Node-adjacent stage evaluations
    reject the step and shrink it; a trajectory whose step falls below
    ``h_min`` while still node-adjacent ends with ``NODE_ABORT``.
    """
    if not 1e-12 <= tol <= 1e-3:
        raise ValueError(f"tol must lie in [1e-12, 1e-3], got {tol!r}")
    if not t_end > 0:
        raise ValueError("t_end must be > 0")
    y = np.stack([np.asarray(y1, dtype=float).ravel(),
                  np.asarray(y2, dtype=float).ravel()], axis=1)
    n = y.shape[0]
    h_min = 1e-12 * t_end if h_min is None else h_min
    h_max = t_end / 100 if h_max is None else h_max
    atol = tol * wf.config.sigma0
    out_t = np.linspace(0.0, t_end, n_samples + 1)

    t = np.zeros(n)
    h = np.full(n, min(h_max, out_t[1]))
    next_out = np.ones(n, dtype=np.intp)
    status = np.full(n, TrajectoryStatus.COMPLETED, dtype=np.int8)
    steps = np.zeros(n, dtype=np.int64)
    node_events = np.zeros(n, dtype=np.int64)
    sign0 = np.sign(y)
    crossed = np.zeros((n, 2), dtype=bool)

    k1, margin = _eval(wf, t, y)
    min_margin = margin.copy()
    active = np.ones(n, dtype=bool)
    at_node = ~(margin >= eps_node)
    status[at_node] = TrajectoryStatus.NODE_ABORT
    node_events[at_node] += 1
    active[at_node] = False

    samples = n_recorded = None
    if record:
        samples = np.full((n, n_samples + 1, 4), np.nan)
        samples[:, 0, :2] = y
        samples[:, 0, 2:] = k1
        n_recorded = np.ones(n, dtype=np.intp)

    while active.any():
        idx = np.flatnonzero(active)
        ti, yi, k1i = t[idx], y[idx], k1[idx]
        target = out_t[next_out[idx]]
        remaining = target - ti
        clipped = h[idx] >= remaining
        hi = np.where(clipped, remaining, h[idx])

        ks = [k1i]
        worst = np.ones(idx.size)
        for s in range(1, 7):
            ys = yi + hi[:, None] * sum(a * k for a, k in zip(_A[s], ks))
            ks_s, m = _eval(wf, ti + _C[s] * hi, ys)
            ks.append(ks_s)
            worst = np.minimum(worst, m)
        y5 = yi + hi[:, None] * sum(b * k for b, k in zip(_B, ks) if b != 0.0)
        err = hi[:, None] * sum(e * k for e, k in zip(_E, ks) if e != 0.0)
        scale = atol + tol * np.maximum(np.abs(yi), np.abs(y5))
        with np.errstate(invalid="ignore"):
            errn = np.max(np.abs(err) / scale, axis=1)

        node = ~(worst >= eps_node) | ~np.isfinite(errn)
        accept = ~node & (errn <= 1.0)
        steps[idx] += 1
        node_events[idx[node]] += 1

        with np.errstate(divide="ignore"):
            factor = np.clip(0.9 * errn ** -0.2, 0.2, 5.0)
        factor = np.where(np.isfinite(factor), factor, 0.2)
        h_new = np.where(node, 0.25 * hi, hi * factor)
        # a step shortened to hit an output time says little about the next one
        h_new = np.where(accept & clipped, np.maximum(h_new, h[idx]), h_new)

        # accepted steps
        acc = idx[accept]
        t[acc] = np.where(clipped[accept], target[accept], ti[accept] + hi[accept])
        y[acc] = y5[accept]
        k1[acc] = ks[6][accept]
        min_margin[acc] = np.minimum(min_margin[acc], worst[accept])
        crossed[acc] |= (np.sign(y5[accept]) != sign0[acc]) & (sign0[acc] != 0)

        landed = accept & clipped
        lidx = idx[landed]
        if record and lidx.size:
            j = next_out[lidx]
            samples[lidx, j, :2] = y[lidx]
            samples[lidx, j, 2:] = k1[lidx]
            n_recorded[lidx] = j + 1
        next_out[lidx] += 1
        done = lidx[next_out[lidx] > n_samples]
        active[done] = False

        # aborts
        too_small = node & (h_new < h_min)
        status[idx[too_small]] = TrajectoryStatus.NODE_ABORT
        active[idx[too_small]] = False
        h[idx] = np.clip(h_new, h_min, h_max)
        over = active[idx] & (steps[idx] >= max_steps)
        status[idx[over]] = TrajectoryStatus.STEP_LIMIT_ABORT
        active[idx[over]] = False

    return BatchResult(
        y1=y[:, 0], y2=y[:, 1], t=t, status=status, steps=steps,
        node_events=node_events, min_margin=min_margin,
        crossed_y1=crossed[:, 0], crossed_y2=crossed[:, 1],
        sample_t=out_t if record else None, samples=samples, n_recorded=n_recorded,
    )


@dataclass
class Trajectory:
    t: np.ndarray
    y1: np.ndarray
    y2: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    status: TrajectoryStatus
    min_margin: float
    node_events: int
    steps: int = 0
    crossed: tuple = field(default=(False, False))

    @property
    def points(self) -> list[ConfigurationPoint]:
        return [ConfigurationPoint(float(a), float(b), float(c))
                for a, b, c in zip(self.y1, self.y2, self.t)]


def integrate_trajectory(wf: WaveFunction, initial: ConfigurationPoint,
                         t_end: float | None = None, tol: float = 1e-9,
                         **kwargs) -> Trajectory:
    """Integrate one trajectory from ``initial`` (at t=0) to ``t_end``.

    ``t_end`` defaults to the screen arrival time.  Samples are taken at 200
    evenly spaced intervals; the last sample is the terminal point.
    """
    if initial.t != 0:
        raise ValueError("trajectories start at t=0")
    t_end = wf.kin.t_D if t_end is None else t_end
    res = integrate_batch(wf, [initial.y1], [initial.y2], t_end, tol, record=True, **kwargs)
    k = int(res.n_recorded[0])
    s = res.samples[0, :k]
    return Trajectory(
        t=res.sample_t[:k].copy(), y1=s[:, 0].copy(), y2=s[:, 1].copy(),
        v1=s[:, 2].copy(), v2=s[:, 3].copy(),
        status=TrajectoryStatus(int(res.status[0])),
        min_margin=float(res.min_margin[0]), node_events=int(res.node_events[0]),
        steps=int(res.steps[0]),
        crossed=(bool(res.crossed_y1[0]), bool(res.crossed_y2[0])),
    )
