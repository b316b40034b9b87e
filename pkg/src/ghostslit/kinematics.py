"""Photon kinematics: energy, momentum, dynamic mass, flight time.

All quantities are SI (metres, seconds, joules, kilograms). The default
constant set uses the historical CODATA-1973 values so that the regression
tables in :mod:`ghostslit.cli` reproduce their reference digits exactly;
pass ``SI_2019`` to any function to recompute with modern exact values.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Planck's constant h [J s] and the vacuum speed of light c [m/s]."""

    h: float
    c: float


CODATA_1973 = PhysicalConstants(h=6.626176e-34, c=2.9979250e8)
SI_2019 = PhysicalConstants(h=6.62607015e-34, c=2.99792458e8)

#: Default constant set used throughout the package.
DEFAULT_CONSTANTS = CODATA_1973


@dataclass(frozen=True)
class PhotonKinematics:
    """Derived single-photon quantities for one wavelength."""

    wavelength: float
    energy: float
    momentum: float
    dynamic_mass: float

    def __post_init__(self):
        for name in ("wavelength", "energy", "momentum", "dynamic_mass"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


def energy_of(wavelength: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Photon energy E = h c / wavelength, wavelength in metres."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return constants.h * constants.c / wavelength


def momentum_of(wavelength: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Photon momentum P = h / wavelength (de Broglie), wavelength in metres."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return constants.h / wavelength


def dynamic_mass_of(momentum: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Dynamic mass M = P / c of a photon carrying momentum P."""
    if momentum < 0:
        raise ValueError(f"momentum must be non-negative, got {momentum}")
    return momentum / constants.c


def flight_time(path_length: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Time for light to traverse ``path_length`` metres in vacuum."""
    if path_length < 0:
        raise ValueError(f"path length must be non-negative, got {path_length}")
    return path_length / constants.c


def photon_kinematics(
    wavelength: float, constants: PhysicalConstants = DEFAULT_CONSTANTS
) -> PhotonKinematics:
    """Bundle energy, momentum and dynamic mass for one wavelength."""
    momentum = momentum_of(wavelength, constants)
    return PhotonKinematics(
        wavelength=wavelength,
        energy=energy_of(wavelength, constants),
        momentum=momentum,
        dynamic_mass=dynamic_mass_of(momentum, constants),
    )
