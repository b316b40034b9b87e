"""Apparatus geometry for the two-arm coincidence experiment.

The source emits photon pairs toward two arms: arm A holds an imaging lens
and slit A backed by a collection lens that funnels every transmitted photon
into detector D1; arm B holds slit B (removable) and the scanning detector
D2 half a metre downstream. The transverse axis is 1-D (the scan axis); both
arms are unfolded into straight lines from the source, the beam splitter
being ideal lossless routing.

Config files are flat ``key = value`` text with ``#`` comments. Lengths are
millimetres and angles milliradians in the file; everything is SI
internally. Keys absent from the file keep the default geometry below.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Callable

__all__ = [
    "ApparatusConfig",
    "SlitElement",
    "ThinLens",
    "ConfigParseError",
    "ConfigValidationError",
    "parse_config",
    "serialize_config",
    "apply_thin_lens",
    "CONFIG_KEYS",
]


class ConfigParseError(ValueError):
    """Malformed config text; message carries the offending line number."""


class ConfigValidationError(ValueError):
    """Structurally valid config violating a physical invariant."""


@dataclass(frozen=True)
class ApparatusConfig:
    """Complete geometry, SI units internally (metres, radians)."""

    photon_wavelength: float = 702.2e-9
    pump_wavelength: float = 351.1e-9  # informational only
    slit_a_width: float = 0.16e-3
    slit_b_width: float = 0.16e-3
    slit_b_present: bool = True
    detector_diameter: float = 0.18e-3
    dist_source_slit_a: float = 1.255
    dist_source_slit_b: float = 1.245
    dist_slit_b_d2: float = 0.500
    lens_enabled: bool = True
    lens_focal: float = 0.500
    lens_to_slit_a: float = 1.000
    source_diameter: float = 3.0e-3
    source_length: float = 3.0e-3
    beam_half_divergence: float = 2.0e-3
    momentum_jitter: float = 0.0

    def __post_init__(self):
        positive = (
            "photon_wavelength",
            "pump_wavelength",
            "slit_a_width",
            "slit_b_width",
            "detector_diameter",
            "dist_source_slit_a",
            "dist_source_slit_b",
            "dist_slit_b_d2",
            "lens_focal",
            "lens_to_slit_a",
            "source_diameter",
            "source_length",
        )
        for name in positive:
            if not getattr(self, name) > 0:
                raise ConfigValidationError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("beam_half_divergence", "momentum_jitter"):
            if getattr(self, name) < 0:
                raise ConfigValidationError(f"{name} must be non-negative")
        if self.slit_a_width >= self.source_diameter:
            raise ConfigValidationError("slit_a_width must be smaller than source_diameter")
        if self.slit_b_width >= self.source_diameter:
            raise ConfigValidationError("slit_b_width must be smaller than source_diameter")
        if self.lens_enabled and self.dist_source_slit_a < self.lens_to_slit_a:
            raise ConfigValidationError(
                "dist_source_slit_a must be >= lens_to_slit_a when the lens is enabled"
            )


@dataclass(frozen=True)
class SlitElement:
    """A slit screen: axial position, opening width, and presence flag."""

    axial_position: float
    width: float
    present: bool = True

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("slit width must be positive")


@dataclass(frozen=True)
class ThinLens:
    axial_position: float
    focal_length: float

    def __post_init__(self):
        if self.focal_length == 0:
            raise ValueError("focal length must be nonzero")


def apply_thin_lens(lens: ThinLens, y: float, theta: float) -> float:
    """Paraxial thin-lens action: returns the outgoing angle theta - y / f.

    Position is unchanged at the lens plane.
    """
    return theta - y / lens.focal_length


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _format_bool(value: bool) -> str:
    return "true" if value else "false"


# key -> (config field, file-to-SI conversion, SI-to-file conversion)
_KEY_TABLE: dict[str, tuple[str, Callable, Callable]] = {
    "photon_wavelength_nm": ("photon_wavelength", lambda v: float(v) * 1e-9, lambda v: repr(v * 1e9)),
    "pump_wavelength_nm": ("pump_wavelength", lambda v: float(v) * 1e-9, lambda v: repr(v * 1e9)),
    "slit_a_width_mm": ("slit_a_width", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "slit_b_width_mm": ("slit_b_width", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "slit_b_present": ("slit_b_present", _parse_bool, _format_bool),
    "detector_diameter_mm": ("detector_diameter", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "dist_source_slit_a_mm": ("dist_source_slit_a", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "dist_source_slit_b_mm": ("dist_source_slit_b", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "dist_slit_b_d2_mm": ("dist_slit_b_d2", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "lens_enabled": ("lens_enabled", _parse_bool, _format_bool),
    "lens_focal_mm": ("lens_focal", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "lens_to_slit_a_mm": ("lens_to_slit_a", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "source_diameter_mm": ("source_diameter", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "source_length_mm": ("source_length", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "beam_half_divergence_mrad": ("beam_half_divergence", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
    "momentum_jitter_mrad": ("momentum_jitter", lambda v: float(v) * 1e-3, lambda v: repr(v * 1e3)),
}

#: Recognized config-file keys, in canonical order.
CONFIG_KEYS = tuple(_KEY_TABLE)

_FIELD_TO_KEY = {spec[0]: key for key, spec in _KEY_TABLE.items()}


def parse_config(text: str) -> ApparatusConfig:
    """Parse flat key-value config text; absent keys keep their defaults.

    Raises :class:`ConfigParseError` for malformed lines or unknown keys
    (with the line number) and :class:`ConfigValidationError` when values
    break a physical invariant.
    """
    overrides: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _KEY_TABLE:
            raise ConfigParseError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigParseError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigParseError(f"line {lineno}: missing value for {key!r}")
        seen.add(key)
        field_name, to_si, _ = _KEY_TABLE[key]
        try:
            overrides[field_name] = to_si(value)
        except ValueError as exc:
            raise ConfigParseError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
    return ApparatusConfig(**overrides)


def serialize_config(cfg: ApparatusConfig) -> str:
    """Render a config as parseable key-value text (all keys, file units)."""
    lines = []
    for key, (field_name, _, to_file) in _KEY_TABLE.items():
        lines.append(f"{key} = {to_file(getattr(cfg, field_name))}")
    return "\n".join(lines) + "\n"


def config_as_dict(cfg: ApparatusConfig) -> dict[str, str]:
    """Config as a {file key: file-unit value string} mapping."""
    return {
        key: to_file(getattr(cfg, field_name))
        for key, (field_name, _, to_file) in _KEY_TABLE.items()
    }


def config_from_dict(mapping: dict[str, str]) -> ApparatusConfig:
    """Inverse of :func:`config_as_dict`; values are file-unit strings."""
    text = "\n".join(f"{k} = {v}" for k, v in mapping.items())
    return parse_config(text)


def describe_fields() -> tuple[str, ...]:
    """Names of the SI-unit config fields, for introspection."""
    return tuple(f.name for f in fields(ApparatusConfig))
