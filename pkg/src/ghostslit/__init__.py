"""Deterministic Monte Carlo for an entangled-pair two-slit coincidence scan."""

__version__ = "0.1.0"

from .apparatus import ApparatusConfig, parse_config, serialize_config
from .diffraction import (
    DiffractionGeometry,
    build_sampler,
    first_minimum,
    relative_intensity,
)
from .engine import ScanHistogram, run_scan, run_trial, run_trials, TrialRng
from .kinematics import CODATA_1973, SI_2019, PhysicalConstants

__all__ = [
    "__version__",
    "ApparatusConfig",
    "parse_config",
    "serialize_config",
    "DiffractionGeometry",
    "build_sampler",
    "first_minimum",
    "relative_intensity",
    "ScanHistogram",
    "run_scan",
    "run_trial",
    "run_trials",
    "TrialRng",
    "CODATA_1973",
    "SI_2019",
    "PhysicalConstants",
]
