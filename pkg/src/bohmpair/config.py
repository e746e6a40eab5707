"""Physical parameters, derived kinematics and regime checks.

All quantities are in natural units by default (``hbar = mass = sigma0 = 1``).
The regime conditions of the two-slit experiments are all dimensionless
ratios, so "a << b" is checked as ``a / b <= strictness`` with a default
strictness of 0.1.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

DEFAULT_STRICTNESS = 0.1
TAU_ORDER_ONE = (0.5, 2.0)
TAU_LARGE = 10.0
OFFSET_ORDER_WIDTH = (0.5, 2.0)


class WaveKind(str, enum.Enum):
    """Which two-particle wave function drives the experiment."""

    ENTANGLED_SYMMETRIC = "entangled-symmetric"
    ENTANGLED_ANTISYMMETRIC = "entangled-antisymmetric"
    UNENTANGLED = "unentangled"

    @property
    def is_entangled(self) -> bool:
        return self is not WaveKind.UNENTANGLED

    @property
    def exchange_sign(self) -> int:
        """+1 for the bosonic combination, -1 for the fermionic one."""
        return -1 if self is WaveKind.ENTANGLED_ANTISYMMETRIC else 1


class Scenario(str, enum.Enum):
    FIG1 = "fig1"
    FIG2 = "fig2"
    FIG3 = "fig3"
    CUSTOM = "custom"


class ShiftMode(str, enum.Enum):
    """How a nonzero ``y0_mean`` displaces an unentangled source.

    ``split`` moves one particle of each pair (chosen at random) by
    ``2 * y0_mean`` so the pair's center of mass moves by ``y0_mean`` while
    the other particle keeps its slit distribution.  ``joint`` translates
    both particles by ``y0_mean``.
    """

    SPLIT = "split"
    JOINT = "joint"


@dataclass(frozen=True)
class PhysicalConfig:
    hbar: float = 1.0
    mass: float = 1.0
    sigma0: float = 1.0
    slit_offset_Y: float = 1.0
    k_x: float = 1.0
    k_y: float = 0.0
    screen_distance_D: float = 2.0
    detector_width_Delta: float = 0.1

    def __post_init__(self):
        for name in ("hbar", "mass", "sigma0", "slit_offset_Y", "k_x",
                     "screen_distance_D", "detector_width_Delta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.k_y):
            raise ConfigError(f"k_y must be finite, got {self.k_y!r}")

    @property
    def spreading_rate(self) -> float:
        """hbar / (2 m sigma0^2): the rate at which the spreading parameter grows."""
        return self.hbar / (2.0 * self.mass * self.sigma0 ** 2)

    def tau(self, t):
        """Dimensionless spreading parameter hbar t / (2 m sigma0^2)."""
        return self.hbar * t / (2.0 * self.mass * self.sigma0 ** 2)


@dataclass(frozen=True)
class Kinematics:
    u_x: float
    u_y: float
    E_x: float
    t_D: float
    tau: float


def derive_kinematics(config: PhysicalConfig) -> Kinematics:
    """Forward/transverse speeds, forward energy and the screen arrival time."""
    u_x = config.hbar * config.k_x / config.mass
    if not u_x > 0:
        raise ConfigError(f"forward speed must be positive, got {u_x!r}")
    u_y = config.hbar * config.k_y / config.mass
    t_D = config.screen_distance_D / u_x
    return Kinematics(
        u_x=u_x,
        u_y=u_y,
        E_x=0.5 * config.mass * u_x ** 2,
        t_D=t_D,
        tau=config.tau(t_D),
    )


@dataclass(frozen=True)
class SourceSpec:
    wave_kind: WaveKind = WaveKind.ENTANGLED_SYMMETRIC
    y0_mean: float = 0.0
    y0_spread: float = 0.0
    rng_seed: int = 0
    shift_mode: ShiftMode = ShiftMode.SPLIT

    def __post_init__(self):
        object.__setattr__(self, "wave_kind", WaveKind(self.wave_kind))
        object.__setattr__(self, "shift_mode", ShiftMode(self.shift_mode))
        if not (math.isfinite(self.y0_spread) and self.y0_spread >= 0):
            raise ConfigError(f"y0_spread must be >= 0, got {self.y0_spread!r}")
        if not math.isfinite(self.y0_mean):
            raise ConfigError(f"y0_mean must be finite, got {self.y0_mean!r}")
        if not 0 <= int(self.rng_seed) < 2 ** 64:
            raise ConfigError(f"rng_seed must fit in 64 bits, got {self.rng_seed!r}")


def equilibrium_com_spread(config: PhysicalConfig) -> float:
    """Standard deviation of the t=0 center of mass under |psi|^2.

    Both entangled wave functions factor into a center-of-mass Gaussian
    ``exp(-y^2 / 2 sigma0^2)`` times a relative-coordinate part, so a source
    with this spread samples the full two-particle density.
    """
    return config.sigma0 / math.sqrt(2.0)


# -- regime checks ---------------------------------------------------------


@dataclass(frozen=True)
class RegimeFinding:
    name: str
    condition: str
    value: float
    lower: float | None = None
    upper: float | None = None
    satisfied: bool = field(init=False)

    def __post_init__(self):
        ok = math.isfinite(self.value)
        if self.lower is not None:
            ok = ok and self.value >= self.lower
        if self.upper is not None:
            ok = ok and self.value <= self.upper
        object.__setattr__(self, "satisfied", bool(ok))

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "condition": self.condition,
            "value": self.value if math.isfinite(self.value) else None,
            "lower": self.lower,
            "upper": self.upper,
            "satisfied": self.satisfied,
        }


def _much_less(name, condition, a, b, strictness):
    ratio = abs(a) / abs(b) if b != 0 else math.inf
    return RegimeFinding(name, condition, ratio, upper=strictness)


def validate_regime(config: PhysicalConfig, kin: Kinematics, source: SourceSpec,
                    scenario: Scenario | str = Scenario.CUSTOM,
                    strictness: float = DEFAULT_STRICTNESS) -> list[RegimeFinding]:
    """Check the inequalities a scenario relies on.

    Returns one finding per condition; nothing is raised for violations.
    ``Scenario.CUSTOM`` picks the checks from the source's wave kind.
    """
    scenario = Scenario(scenario)
    if scenario is Scenario.CUSTOM:
        if source.wave_kind.is_entangled:
            scenario = Scenario.FIG1
        elif source.y0_mean != 0:
            scenario = Scenario.FIG3
        else:
            scenario = Scenario.FIG2

    Y, s0 = config.slit_offset_Y, config.sigma0
    fringe = math.pi * config.hbar * kin.t_D / (Y * config.mass)
    transverse = RegimeFinding("transverse-momentum-small", "|k_y| sigma0 << 1",
                               abs(config.k_y) * s0, upper=strictness)

    if scenario is Scenario.FIG1:
        return [
            _much_less("spread-vs-fringe", "dy0 << pi hbar t / (Y m)",
                       source.y0_spread, fringe, strictness),
            _much_less("spread-vs-width", "dy0 << sigma0",
                       source.y0_spread, s0, strictness),
            RegimeFinding("tau-order-one", "hbar t / (2 m sigma0^2) ~ 1",
                          kin.tau, *TAU_ORDER_ONE),
            RegimeFinding("offset-order-width", "Y ~ sigma0", Y / s0,
                          *OFFSET_ORDER_WIDTH),
        ]
    if scenario is Scenario.FIG2:
        return [
            _much_less("offset-vs-2pi-width", "Y << 2 pi sigma0",
                       Y, 2 * math.pi * s0, strictness),
            _much_less("spread-vs-fringe", "dy0 ~ sigma0 << pi hbar t / (Y m)",
                       s0, fringe, strictness),
            RegimeFinding("tau-order-one", "hbar t / (2 m sigma0^2) ~ 1",
                          kin.tau, *TAU_ORDER_ONE),
            transverse,
        ]
    return [
        _much_less("offset-vs-width", "Y << sigma0", Y, s0, strictness),
        _much_less("width-vs-source-offset", "sigma0 << <y0>",
                   s0, source.y0_mean, strictness),
        RegimeFinding("tau-large", "hbar t / (2 m sigma0^2) >> 1",
                      kin.tau, lower=TAU_LARGE),
        transverse,
    ]


# -- config files ----------------------------------------------------------

_PHYSICAL_KEYS = {f.name for f in fields(PhysicalConfig)}
_SOURCE_KEYS = {f.name for f in fields(SourceSpec)}


def config_from_mapping(data: dict, base_config: PhysicalConfig | None = None,
                        base_source: SourceSpec | None = None):
    """Build ``(PhysicalConfig, SourceSpec)`` from a flat mapping.

    Missing keys fall back to ``base_config``/``base_source`` (natural-unit
    defaults if not given). Unknown keys raise :class:`ConfigError`.
    """
    unknown = set(data) - _PHYSICAL_KEYS - _SOURCE_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    phys = dict(vars(base_config or PhysicalConfig()))
    src = dict(vars(base_source or SourceSpec()))
    try:
        for key, value in data.items():
            if key in _PHYSICAL_KEYS:
                phys[key] = float(value)
            elif key == "rng_seed":
                src[key] = int(value)
            elif key in ("wave_kind", "shift_mode"):
                src[key] = value
            else:
                src[key] = float(value)
        return PhysicalConfig(**phys), SourceSpec(**src)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path, base_config=None, base_source=None):
    """Read a JSON config file; see :func:`config_from_mapping`."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_mapping(data, base_config, base_source)
