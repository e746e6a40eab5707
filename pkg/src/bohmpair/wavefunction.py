"""Slit wave packets and the two-particle wave functions built from them.

Amplitudes are evaluated as complex logarithms and exponentiated once, so
values far out in the Gaussian tails (where the density underflows) still
carry a usable phase.  The overall constant of each packet is set to 1;
densities are normalized numerically where a normalization is needed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .config import Kinematics, PhysicalConfig, WaveKind, derive_kinematics


@dataclass(frozen=True)
class ConfigurationPoint:
    """Transverse positions of both particles at time t."""

    y1: float
    y2: float
    t: float = 0.0

    def __post_init__(self):
        if not self.t >= 0:
            raise ValueError(f"t must be >= 0, got {self.t!r}")


class Slit(enum.Enum):
    A = 1   # upper slit, centre at +Y
    B = -1  # lower slit, centre at -Y


def sigma_t(config: PhysicalConfig, t):
    """Complex packet width sigma0 (1 + i hbar t / 2 m sigma0^2)."""
    return config.sigma0 * (1.0 + 1j * config.tau(np.asarray(t, dtype=float)))


def log_add(l1, l2, sign=1):
    """``log(exp(l1) + sign * exp(l2))`` for complex logs, without overflow.

    Exact cancellation gives ``-inf`` real part.
    """
    l1 = np.asarray(l1, dtype=complex)
    l2 = np.asarray(l2, dtype=complex)
    swap = l2.real > l1.real
    hi = np.where(swap, l2, l1)
    lo = np.where(swap, l1, l2)
    with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
        out = hi + np.log1p(sign * np.exp(lo - hi))
    if sign < 0:
        # exp(l2) - exp(l1) = -(exp(l1) - exp(l2))
        out = np.where(swap, out + 1j * np.pi, out)
    return out


@dataclass(frozen=True)
class WaveFunction:
    """One of the two-particle wave functions of the two-slit device.

    The x-motion is a plane wave, so both particles sit at ``x = u_x t`` and
    every amplitude is a function of ``(y1, y2, t)`` only.
    """

    kind: WaveKind
    config: PhysicalConfig
    kin: Kinematics | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", WaveKind(self.kind))
        if self.kin is None:
            object.__setattr__(self, "kin", derive_kinematics(self.config))

    # -- single-slit packets -------------------------------------------

    def log_packet(self, slit: Slit, y, t, *, reduced: bool = False):
        """Complex log of the packet leaving ``slit``.

        With ``reduced=True`` the factors shared by both slits at equal t
        (normalization prefactor, x-phase, forward energy phase) are left
        out; they cancel in every velocity.
        """
        cfg, kin = self.config, self.kin
        s = Slit(slit).value
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        st = sigma_t(cfg, t)
        z = y - s * (cfg.slit_offset_Y + kin.u_y * t)
        phase = s * cfg.k_y * (y - s * (cfg.slit_offset_Y + 0.5 * kin.u_y * t))
        out = -z * z / (4.0 * cfg.sigma0 * st) + 1j * phase
        if not reduced:
            common = cfg.k_x * kin.u_x * t - kin.E_x * t / cfg.hbar
            out = out - 0.25 * np.log(2.0 * np.pi * st * st) + 1j * common
        return out

    def packet(self, slit: Slit, y, t):
        return np.exp(self.log_packet(slit, y, t))

    def log_slit_sum(self, y, t, *, reduced=False):
        """log(psi_A + psi_B): one particle in the two-slit superposition."""
        return log_add(self.log_packet(Slit.A, y, t, reduced=reduced),
                       self.log_packet(Slit.B, y, t, reduced=reduced))

    # -- two-particle amplitude ----------------------------------------

    def log_psi(self, y1, y2, t, *, reduced=False):
        if self.kind.is_entangled:
            lA1 = self.log_packet(Slit.A, y1, t, reduced=reduced)
            lB1 = self.log_packet(Slit.B, y1, t, reduced=reduced)
            lA2 = self.log_packet(Slit.A, y2, t, reduced=reduced)
            lB2 = self.log_packet(Slit.B, y2, t, reduced=reduced)
            return log_add(lA1 + lB2, lA2 + lB1, self.kind.exchange_sign)
        return (self.log_slit_sum(y1, t, reduced=reduced)
                + self.log_slit_sum(y2, t, reduced=reduced))

    def psi(self, y1, y2, t):
        """Unnormalized two-particle amplitude."""
        with np.errstate(under="ignore"):
            return np.exp(self.log_psi(y1, y2, t))

    def density(self, y1, y2, t):
        """Unnormalized |psi|^2."""
        with np.errstate(under="ignore"):
            return np.exp(2.0 * self.log_psi(y1, y2, t).real)

    def single_density(self, y, t):
        """Unnormalized |psi_A + psi_B|^2 of one unentangled particle."""
        with np.errstate(under="ignore"):
            return np.exp(2.0 * self.log_slit_sum(y, t).real)
