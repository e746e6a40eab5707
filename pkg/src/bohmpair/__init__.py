"""Bohmian and standard predictions for identical particle pairs at a double slit."""

__version__ = "0.1.0"

from .config import (PhysicalConfig, Scenario, ShiftMode, SourceSpec, WaveKind,  # noqa: E402
                     derive_kinematics, equilibrium_com_spread, load_config, validate_regime)
from .ensemble import histogram, run_ensemble, sample_initial, selective_filter  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .export import SCHEMA_VERSION  # noqa: E402
from .guidance import integrate_batch, integrate_trajectory, velocity, velocity_field  # noqa: E402
from .patterns import Pattern, compare_patterns, measure_gap  # noqa: E402
from .wavefunction import ConfigurationPoint, WaveFunction  # noqa: E402

__all__ = [
    "ConfigurationPoint", "Pattern", "PhysicalConfig", "SCHEMA_VERSION", "Scenario",
    "ShiftMode", "SourceSpec", "WaveFunction", "WaveKind", "compare_patterns",
    "derive_kinematics", "equilibrium_com_spread", "histogram", "integrate_batch",
    "integrate_trajectory", "load_config", "measure_gap", "run_ensemble",
    "sample_initial", "selective_filter", "validate_regime", "velocity", "velocity_field",
]
