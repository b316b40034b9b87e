"""Single-slit far-field diffraction and a tabulated inverse-CDF sampler.

The intensity profile behind a slit of width s, observed at distance D for
wavelength lam, is the classical sinc-squared pattern

    I(y) / I(0) = [sin(beta) / beta]^2,   beta = pi * s * y / (lam * D),

with its first zero at y = lam * D / s. ``build_sampler`` turns the profile
into a generative model by tabulating the normalized CDF on a truncation
window and inverting it by monotone piecewise-linear interpolation. Uniform
illumination across the slit opening is assumed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

__all__ = [
    "DiffractionGeometry",
    "DiffractionSampler",
    "relative_intensity",
    "first_minimum",
    "uncertainty_form",
    "path_length",
    "build_sampler",
    "sample_deflection",
]

# Below this |beta| the direct quotient loses digits to cancellation; the
# series 1 - beta^2/3 + 2 beta^4/45 is exact to ~1e-17 there.
_SERIES_CUTOFF = 1e-4


@dataclass(frozen=True)
class DiffractionGeometry:
    """Slit width, wavelength and screen distance, all in metres."""

    slit_width: float
    wavelength: float
    screen_distance: float

    def __post_init__(self):
        for name in ("slit_width", "wavelength", "screen_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        # Far-field validity wants lam << s << D; warn but keep going.
        if not (self.wavelength * 10 < self.slit_width < self.screen_distance / 10):
            warnings.warn(
                "geometry outside the paraxial far-field regime "
                f"(lam={self.wavelength:g}, s={self.slit_width:g}, D={self.screen_distance:g})",
                stacklevel=3,
            )


def relative_intensity(geom: DiffractionGeometry, y):
    """Relative intensity [sin(beta)/beta]^2 at transverse offset(s) ``y``.

    Accepts a scalar or an ndarray; returns the same shape. The removable
    singularity at y = 0 evaluates to exactly 1.
    """
    y_arr = np.asarray(y, dtype=float)
    beta = math.pi * geom.slit_width * y_arr / (geom.wavelength * geom.screen_distance)
    small = np.abs(beta) < _SERIES_CUTOFF
    beta_safe = np.where(small, 1.0, beta)
    out = np.where(
        small,
        1.0 - beta * beta / 3.0 + 2.0 * beta**4 / 45.0,
        (np.sin(beta_safe) / beta_safe) ** 2,
    )
    if np.isscalar(y) or y_arr.ndim == 0:
        return float(out[()])
    return out


def first_minimum(geom: DiffractionGeometry) -> float:
    """Offset of the first zero of the pattern: y = lam * D / s."""
    return geom.wavelength * geom.screen_distance / geom.slit_width


def uncertainty_form(geom: DiffractionGeometry, photon_momentum: float) -> float:
    """Action y * P at the first minimum; algebraically h * D / s for P = h/lam."""
    return first_minimum(geom) * photon_momentum


def path_length(screen_distance: float, y: float) -> float:
    """Diagonal flight path sqrt(D^2 + y^2) from slit to an off-axis point."""
    if screen_distance < 0:
        raise ValueError(f"screen distance must be non-negative, got {screen_distance}")
    return math.hypot(screen_distance, y)


@dataclass(frozen=True, eq=False)
class DiffractionSampler:
    """Inverse-CDF sampler for the sinc-squared deflection distribution.

    The PDF is the relative intensity restricted to |y| <= L with
    L = truncation_lobes * lam * D / s, normalized to unit mass. The CDF is
    tabulated on the positive half-axis and mirrored, which makes the map
    exactly symmetric: u = 0.5 gives 0, and u / (1 - u) give equal and
    opposite offsets.
    """

    geometry: DiffractionGeometry
    truncation_lobes: int
    _y_half: np.ndarray = field(repr=False)
    _cdf_half: np.ndarray = field(repr=False)  # mass of [0, y], in [0, 0.5]

    @property
    def window(self) -> float:
        """Half-width L of the truncation window, metres."""
        return float(self._y_half[-1])

    def cdf(self, y):
        """Cumulative probability of the tabulated distribution at ``y``."""
        y_arr = np.asarray(y, dtype=float)
        half = np.interp(np.abs(y_arr), self._y_half, self._cdf_half)
        out = 0.5 + np.sign(y_arr) * half
        if np.isscalar(y) or y_arr.ndim == 0:
            return float(out[()])
        return out

    def sample(self, u):
        """Inverse CDF: map uniform u in [0, 1) to a transverse offset [m]."""
        u_arr = np.asarray(u, dtype=float)
        mag = np.interp(np.abs(u_arr - 0.5), self._cdf_half, self._y_half)
        out = np.where(u_arr >= 0.5, mag, -mag)
        if np.isscalar(u) or u_arr.ndim == 0:
            return float(out[()])
        return out

    def sample_angle(self, u):
        """Deflection expressed as a paraxial angle theta = y / D [rad]."""
        return self.sample(u) / self.geometry.screen_distance


def build_sampler(
    geom: DiffractionGeometry,
    truncation_lobes: int = 5,
    grid_points: int = 8192,
) -> DiffractionSampler:
    """Tabulate the normalized diffraction CDF by composite trapezoid quadrature.

    ``truncation_lobes`` sets the window to that many minima per side (>= 1);
    ``grid_points`` (>= 1024) is the resolution across the full window.
    """
    if truncation_lobes < 1:
        raise ValueError("truncation_lobes must be >= 1")
    if grid_points < 1024:
        raise ValueError("grid_points must be >= 1024")
    window = truncation_lobes * first_minimum(geom)
    y_half = np.linspace(0.0, window, grid_points // 2 + 1)
    pdf = relative_intensity(geom, y_half)
    cum = cumulative_trapezoid(pdf, y_half, initial=0.0)
    total = 2.0 * cum[-1]
    if not np.isfinite(total) or total <= 0.0:
        raise ValueError("degenerate geometry: diffraction profile has no mass")
    cdf_half = cum / total
    if np.any(np.diff(cdf_half) <= 0.0):
        raise ValueError("degenerate geometry: tabulated CDF is not strictly increasing")
    return DiffractionSampler(
        geometry=geom,
        truncation_lobes=truncation_lobes,
        _y_half=y_half,
        _cdf_half=cdf_half,
    )


def sample_deflection(sampler: DiffractionSampler, u) -> float:
    """Deterministic inverse-CDF draw; see :meth:`DiffractionSampler.sample`."""
    return sampler.sample(u)
