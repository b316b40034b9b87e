"""Retrodictive kinematics chains and scan-histogram feature extraction.

The kinematics side turns a detected transverse displacement into a speed,
momentum and position-momentum product under three readings of the same
detection record: diffraction at a physically present slit B, diffraction
at the "ghost" slit-B image, and diffraction at the source itself. The
histogram side locates the first diffraction minimum, measures profile
widths, and scores agreement with the single-slit intensity model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .apparatus import ApparatusConfig
from .diffraction import DiffractionGeometry, first_minimum, path_length
from .engine import ScanHistogram
from .kinematics import (
    DEFAULT_CONSTANTS,
    PhysicalConstants,
    dynamic_mass_of,
    flight_time,
    momentum_of,
)

__all__ = [
    "SCENARIOS",
    "KinematicsReport",
    "RetrodictedPair",
    "FeatureNotFoundError",
    "InsufficientCountsError",
    "transverse_velocity",
    "transverse_momentum",
    "uncertainty_product",
    "kinematics_report",
    "retrodict_pair",
    "extract_first_minimum",
    "profile_width",
    "goodness_of_fit",
    "two_sample_chisquare",
]


class FeatureNotFoundError(RuntimeError):
    """The requested histogram feature is absent or out of scan range."""


class InsufficientCountsError(RuntimeError):
    """Too few counts for a meaningful goodness-of-fit statistic."""


# Displacements read off the measured detection profiles: the first minimum
# of the wide (slit-B-present) curve and the edge of the narrow
# (slit-B-absent) peak.
OUTER_CURVE_MINIMUM = 2.2e-3
INNER_CURVE_EDGE = 0.9e-3

SCENARIOS = ("slit-b-present", "ghost-slit", "source-diffraction")

#: ratio_to_h below this flags an apparent sub-quantum action product.
_VIOLATION_MARGIN = 0.05


@dataclass(frozen=True)
class KinematicsReport:
    """One retrodictive chain: displacement to uncertainty product."""

    scenario: str
    y: float
    path: float
    transit_time: float
    v_y: float
    p_y: float
    delta_y: float
    product: float
    ratio_to_h: float
    apparent_violation: bool


class RetrodictedPair(NamedTuple):
    """Momenta and slit-plane position inferred from one detection."""

    p_y_b: float
    p_y_a: float
    slit_a_y: float
    theta_b: float
    theta_a: float


def transverse_velocity(y: float, t: float) -> float:
    """Mean transverse speed of a photon displaced ``y`` in time ``t``."""
    if t <= 0:
        raise ValueError(f"transit time must be positive, got {t}")
    return y / t


def transverse_momentum(mass: float, v_y: float) -> float:
    """Transverse momentum P_y = M * v_y."""
    return mass * v_y


def uncertainty_product(
    slit_width: float,
    p_y: float,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> tuple[float, float]:
    """Position-momentum product dy * dP_y and its ratio to h."""
    if slit_width <= 0:
        raise ValueError(f"slit width must be positive, got {slit_width}")
    product = slit_width * p_y
    return product, product / constants.h


def kinematics_report(
    scenario: str,
    cfg: ApparatusConfig,
    y: float | None = None,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> KinematicsReport:
    """Run one scenario's chain: flight time, v_y, P_y, product, ratio.

    ``scenario`` picks the displacement default and flight path:

    * ``slit-b-present``: y = 2.2 mm, path = diagonal from slit B to the
      detection point (essentially the 500 mm screen distance);
    * ``ghost-slit``: y = 0.9 mm, path = the same 500 mm, reading the inner
      curve as diffraction at the ghost image of slit A;
    * ``source-diffraction``: y = 0.9 mm, path = the full source-to-slit-B
      distance, reading the inner curve as diffraction at the source.

    Pass ``y`` to rerun a chain with a measured displacement.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    if scenario == "slit-b-present":
        y_val = OUTER_CURVE_MINIMUM if y is None else y
        path = path_length(cfg.dist_slit_b_d2, y_val)
    elif scenario == "ghost-slit":
        y_val = INNER_CURVE_EDGE if y is None else y
        path = cfg.dist_slit_b_d2
    else:
        y_val = INNER_CURVE_EDGE if y is None else y
        path = cfg.dist_source_slit_b
    t = flight_time(path, constants)
    v_y = transverse_velocity(y_val, t)
    mass = dynamic_mass_of(momentum_of(cfg.photon_wavelength, constants), constants)
    p_y = transverse_momentum(mass, v_y)
    delta_y = cfg.slit_b_width
    product, ratio = uncertainty_product(delta_y, p_y, constants)
    return KinematicsReport(
        scenario=scenario,
        y=y_val,
        path=path,
        transit_time=t,
        v_y=v_y,
        p_y=p_y,
        delta_y=delta_y,
        product=product,
        ratio_to_h=ratio,
        apparent_violation=ratio < 1.0 - _VIOLATION_MARGIN,
    )


def retrodict_pair(
    d2_y,
    origin_y,
    cfg: ApparatusConfig,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> RetrodictedPair:
    """Invert the slit-B-absent geometry from a D2 detection.

    With slit B absent and the lens off, the detected arm-B position fixes
    that photon's flight angle over the full source-to-D2 distance; the
    anticorrelated partner's angle, slit-A-plane position and momentum
    follow. Works elementwise on arrays.

    ``origin_y`` is the emission point. For measured data it is unknowable
    within the source diameter; passing 0 carries a systematic of half that
    diameter (1.5 mm at the default source).
    """
    span = cfg.dist_source_slit_b + cfg.dist_slit_b_d2
    theta_b = (d2_y - origin_y) / span
    theta_a = -theta_b
    momentum = momentum_of(cfg.photon_wavelength, constants)
    return RetrodictedPair(
        p_y_b=momentum * theta_b,
        p_y_a=momentum * theta_a,
        slit_a_y=origin_y + theta_a * cfg.dist_source_slit_a,
        theta_b=theta_b,
        theta_a=theta_a,
    )


def _counts(hist: ScanHistogram, which: str) -> np.ndarray:
    if which == "coincidence":
        return np.asarray(hist.coincidence, dtype=float)
    if which == "singles":
        return np.asarray(hist.singles, dtype=float)
    raise ValueError(f"which must be 'coincidence' or 'singles', got {which!r}")


def _smooth3(values: np.ndarray) -> np.ndarray:
    """3-bin moving average; edge bins average their available neighbours."""
    kernel = np.ones(3)
    summed = np.convolve(values, kernel, mode="same")
    norm = np.convolve(np.ones_like(values), kernel, mode="same")
    return summed / norm


def extract_first_minimum(
    hist: ScanHistogram,
    geom: DiffractionGeometry,
    which: str = "coincidence",
) -> float:
    """Locate the first diffraction minimum in a scan histogram.

    Counts are smoothed with a 3-bin moving average and the minimum bin is
    taken inside the window [0.5, 1.5] * (lam D / s) where the first zero of
    the model must lie. The scan has to cover that whole window.
    """
    counts = _counts(hist, which)
    expected = first_minimum(geom)
    lo, hi = 0.5 * expected, 1.5 * expected
    pos = hist.positions
    if pos[0] > lo or pos[-1] < hi:
        raise FeatureNotFoundError(
            f"scan [{pos[0]:.3g}, {pos[-1]:.3g}] m does not cover the "
            f"search window [{lo:.3g}, {hi:.3g}] m"
        )
    smoothed = _smooth3(counts)
    in_window = (pos >= lo) & (pos <= hi)
    window_counts = smoothed[in_window]
    if np.all(window_counts == window_counts[0]):
        raise FeatureNotFoundError("profile is flat inside the search window")
    return float(pos[in_window][np.argmin(window_counts)])


def profile_width(hist: ScanHistogram, which: str = "coincidence") -> float:
    """Full width at half maximum, linearly interpolated between bins.

    When a half-maximum crossing falls outside the scan (profile still above
    half max at an edge), the scan edge stands in for it, so the result is a
    lower bound for profiles wider than the scan.
    """
    counts = _counts(hist, which)
    if np.all(counts == 0):
        raise FeatureNotFoundError("histogram is empty")
    pos = hist.positions
    peak = int(np.argmax(counts))
    half = counts[peak] / 2.0

    def crossing(indices, fallback):
        prev_i = peak
        for i in indices:
            if counts[i] <= half:
                frac = (counts[prev_i] - half) / (counts[prev_i] - counts[i])
                return pos[prev_i] + frac * (pos[i] - pos[prev_i])
            prev_i = i
        return fallback

    left = crossing(range(peak - 1, -1, -1), pos[0])
    right = crossing(range(peak + 1, len(counts)), pos[-1])
    return float(right - left)


def _bin_edges(positions: np.ndarray) -> np.ndarray:
    mids = 0.5 * (positions[1:] + positions[:-1])
    first = positions[0] - (mids[0] - positions[0])
    last = positions[-1] + (positions[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _integrate_model(model: Callable, edges: np.ndarray, points_per_bin: int = 16) -> np.ndarray:
    """Per-bin mass of ``model`` by composite trapezoid inside each bin."""
    masses = np.empty(edges.size - 1)
    for i in range(edges.size - 1):
        grid = np.linspace(edges[i], edges[i + 1], points_per_bin + 1)
        masses[i] = np.trapezoid(model(grid), grid)
    return masses


def _merge_bins(observed: np.ndarray, expected: np.ndarray, min_expected: float):
    """Greedily pool adjacent bins until every pooled expectation is large enough."""
    obs_groups, exp_groups = [], []
    acc_o = acc_e = 0.0
    for o, e in zip(observed, expected):
        acc_o += o
        acc_e += e
        if acc_e >= min_expected:
            obs_groups.append(acc_o)
            exp_groups.append(acc_e)
            acc_o = acc_e = 0.0
    if acc_e > 0 and obs_groups:
        obs_groups[-1] += acc_o
        exp_groups[-1] += acc_e
    return np.asarray(obs_groups), np.asarray(exp_groups)


class GoodnessOfFit(NamedTuple):
    statistic: float
    pvalue: float
    dof: int
    bins_used: int


def goodness_of_fit(
    hist: ScanHistogram,
    model: Callable,
    which: str = "coincidence",
    min_expected: float = 5.0,
) -> GoodnessOfFit:
    """Pearson chi-square of binned counts against a shape model.

    ``model`` maps position (metres, vectorized) to relative intensity; it
    is integrated across each bin and normalized to the observed total.
    Adjacent bins are pooled until each expectation reaches ``min_expected``.
    """
    observed = _counts(hist, which)
    if observed.size < 2:
        raise InsufficientCountsError("need at least two bins for a fit statistic")
    total = observed.sum()
    if total <= 0:
        raise InsufficientCountsError("histogram has no counts")
    masses = _integrate_model(model, _bin_edges(hist.positions))
    mass_total = masses.sum()
    if not np.isfinite(mass_total) or mass_total <= 0:
        raise ValueError("model has no mass over the scan range")
    expected = masses * (total / mass_total)
    obs_g, exp_g = _merge_bins(observed, expected, min_expected)
    if obs_g.size < 2:
        raise InsufficientCountsError(
            f"only {obs_g.size} pooled bin(s) reach the expected-count floor"
        )
    statistic = float(np.sum((obs_g - exp_g) ** 2 / exp_g))
    dof = obs_g.size - 1
    return GoodnessOfFit(statistic, float(stats.chi2.sf(statistic, dof)), dof, obs_g.size)


def two_sample_chisquare(counts_a, counts_b, min_expected: float = 5.0) -> GoodnessOfFit:
    """Chi-square homogeneity test between two binned count profiles.

    Tests whether the two histograms are draws from one common shape,
    independent of their totals. Bins are pooled (on the combined counts)
    until each pooled sum reaches ``min_expected``.
    """
    a = np.asarray(counts_a, dtype=float)
    b = np.asarray(counts_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("count arrays must have identical shape")
    total_a, total_b = a.sum(), b.sum()
    if total_a <= 0 or total_b <= 0:
        raise InsufficientCountsError("both profiles need nonzero totals")
    a_g, comb_g = _merge_bins(a, a + b, min_expected)
    b_g = comb_g - a_g
    if a_g.size < 2:
        raise InsufficientCountsError("too few pooled bins for a comparison")
    k_a = math.sqrt(total_b / total_a)
    k_b = math.sqrt(total_a / total_b)
    with np.errstate(invalid="ignore"):
        terms = (k_a * a_g - k_b * b_g) ** 2 / (a_g + b_g)
    statistic = float(np.nansum(terms))
    dof = a_g.size - 1
    return GoodnessOfFit(statistic, float(stats.chi2.sf(statistic, dof)), dof, a_g.size)
