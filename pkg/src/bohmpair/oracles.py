"""Closed-form reference quantities for the two-slit experiments.

These are the analytic center-of-mass path and quantum potential, the
fringe spacing and the width of the empty interval predicted under
selective detection.  They serve as test oracles and report values.

The de Broglie wavelength is taken for the forward motion,
``lambda = 2 pi hbar / (m u_x)``; with ``D = u_x t`` this makes
``lambda D / 2Y`` identical to ``pi hbar t / (Y m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import TAU_LARGE, PhysicalConfig, derive_kinematics
from .errors import RegimeViolation


@dataclass(frozen=True)
class OracleReport:
    name: str
    value: float
    units: str
    inputs: dict = field(default_factory=dict)

    def as_dict(self):
        return {"name": self.name, "value": self.value, "units": self.units,
                "inputs": dict(self.inputs)}


def com_path(config: PhysicalConfig, y0, t):
    """Center-of-mass coordinate y0 sqrt(1 + tau(t)^2)."""
    return np.asarray(y0) * np.sqrt(1.0 + config.tau(np.asarray(t)) ** 2)


def com_velocity_closed(config: PhysicalConfig, y, t):
    """a^2 y t / (1 + a^2 t^2) with a = hbar / (2 m sigma0^2)."""
    a = config.spreading_rate
    t = np.asarray(t)
    return a * a * np.asarray(y) * t / (1.0 + (a * t) ** 2)


def quantum_potential_com_field(config: PhysicalConfig, y0, y):
    """Q_cm as a function of the center-of-mass position: m y0^4 a^2 / (2 y^2).

    Returns 0 where ``y0 == 0``.
    """
    a = config.spreading_rate
    y0 = np.asarray(y0, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = config.mass * y0 ** 4 * a * a / (2.0 * y * y)
    return np.where(y0 == 0, 0.0, q)


def quantum_potential_com(config: PhysicalConfig, y0, t, form: str = "time"):
    """Center-of-mass quantum potential along the analytic path.

    ``form="time"`` uses (1/2) m y0^2 a^2 / (1 + a^2 t^2); ``form="position"``
    evaluates :func:`quantum_potential_com_field` at ``y = com_path(y0, t)``.
    Both are zero for ``y0 == 0``.
    """
    a = config.spreading_rate
    if form == "time":
        t = np.asarray(t, dtype=float)
        return 0.5 * config.mass * np.asarray(y0) ** 2 * a * a / (1.0 + (a * t) ** 2)
    if form == "position":
        return quantum_potential_com_field(config, y0, com_path(config, y0, t))
    raise ValueError(f"unknown form {form!r}")


def de_broglie_wavelength(config: PhysicalConfig) -> float:
    u_x = derive_kinematics(config).u_x
    return 2.0 * math.pi * config.hbar / (config.mass * u_x)


def fringe_spacing(config: PhysicalConfig, t):
    """Distance between neighbouring maxima, pi hbar t / (Y m)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("fringe spacing needs t > 0")
    return math.pi * config.hbar * t / (config.slit_offset_Y * config.mass)


def empty_interval(config: PhysicalConfig, y0_char, t):
    """Length hbar t y0 / (m sigma0^2) of the low-intensity interval.

    Only meaningful once the packets have spread a lot; raises
    :class:`RegimeViolation` when tau(t) < 10.
    """
    tau = float(config.tau(t))
    if tau < TAU_LARGE:
        raise RegimeViolation(f"empty interval needs tau >= {TAU_LARGE}, got {tau:.3g}")
    return config.hbar * t * y0_char / (config.mass * config.sigma0 ** 2)


def oracle_reports(config: PhysicalConfig, y0_char: float = 0.0,
                   t: float | None = None) -> list[OracleReport]:
    """All closed forms at screen time (or ``t``), for run reports."""
    kin = derive_kinematics(config)
    t = kin.t_D if t is None else t
    inputs = {"t": t, "y0": y0_char}
    reports = [
        OracleReport("de_broglie_wavelength", de_broglie_wavelength(config), "length",
                     {"u_x": kin.u_x}),
        OracleReport("fringe_spacing", float(fringe_spacing(config, t)), "length",
                     {"t": t, "Y": config.slit_offset_Y}),
        OracleReport("com_path", float(com_path(config, y0_char, t)), "length", inputs),
        OracleReport("quantum_potential_com",
                     float(quantum_potential_com(config, y0_char, t)), "energy", inputs),
    ]
    try:
        reports.append(OracleReport("empty_interval",
                                    float(empty_interval(config, y0_char, t)),
                                    "length", inputs))
    except RegimeViolation:
        pass
    return reports
