"""Diffraction profile, first-minimum arithmetic, and the inverse-CDF sampler.

Expected values tagged as derived are frozen from independent scipy.quad
oracles computed here, never from the sampler's own tabulation.
"""

import math

import numpy as np
import pytest
from scipy import integrate, stats

from ghostslit.cli import matches_printed
from ghostslit.diffraction import (
    DiffractionGeometry,
    build_sampler,
    first_minimum,
    path_length,
    relative_intensity,
    sample_deflection,
    uncertainty_form,
)
from ghostslit.kinematics import CODATA_1973, momentum_of


def paper_geometry(screen_distance=0.500):
    return DiffractionGeometry(
        slit_width=0.16e-3, wavelength=702.2e-9, screen_distance=screen_distance
    )


# Central-lobe fraction of sinc^2 truncated at 5 lobes, from the quad oracle
# below (the untruncated fraction would be 0.90282).
CENTRAL_LOBE_MASS_5 = 0.9214586


def sinc2_lobe_fraction(lobes):
    num, _ = integrate.quad(lambda x: (math.sin(x) / x) ** 2, 1e-300, math.pi, limit=200)
    den, _ = integrate.quad(
        lambda x: (math.sin(x) / x) ** 2, 1e-300, lobes * math.pi, limit=300
    )
    return num / den


def test_relative_intensity_center_and_zeros():
    geom = paper_geometry()
    assert relative_intensity(geom, 0.0) == 1.0
    fm = first_minimum(geom)
    for k in (1, 2, 3, 4):
        assert relative_intensity(geom, k * fm) < 1e-30
        assert relative_intensity(geom, -k * fm) < 1e-30


def test_relative_intensity_three_halves_minimum():
    geom = paper_geometry()
    y = 1.5 * first_minimum(geom)
    assert math.isclose(relative_intensity(geom, y), (2.0 / (3.0 * math.pi)) ** 2, rel_tol=1e-12)


def test_relative_intensity_even_and_bounded():
    geom = paper_geometry()
    ys = np.linspace(0.0, 0.02, 2001)
    vals = relative_intensity(geom, ys)
    # even in y: negation flips beta's sign exactly, and sinc^2 is even
    assert np.array_equal(vals, relative_intensity(geom, -ys))
    assert vals.max() == 1.0
    assert np.all((vals >= 0) & (vals <= 1.0))


def test_relative_intensity_series_branch_continuity():
    geom = paper_geometry()
    scale = geom.wavelength * geom.screen_distance / (math.pi * geom.slit_width)
    for beta in (0.9e-4, 1.1e-4):
        y = beta * scale
        direct = (math.sin(beta) / beta) ** 2
        assert math.isclose(relative_intensity(geom, y), direct, rel_tol=1e-10)


def test_first_minimum_reference_value():
    assert matches_printed(first_minimum(paper_geometry()) * 1e3, "2.194375")


def test_first_minimum_scaling_and_long_arm():
    geom = paper_geometry()
    wide = DiffractionGeometry(2 * geom.slit_width, geom.wavelength, geom.screen_distance)
    assert math.isclose(first_minimum(wide), first_minimum(geom) / 2.0, rel_tol=1e-15)
    assert matches_printed(first_minimum(paper_geometry(1.245)) * 1e3, "5.4640")


def test_uncertainty_form_identities():
    geom = paper_geometry()
    p = momentum_of(geom.wavelength)
    u = uncertainty_form(geom, p)
    # y*P at the first minimum is exactly h*D/s
    assert math.isclose(
        u, CODATA_1973.h * geom.screen_distance / geom.slit_width, rel_tol=1e-12
    )
    assert u == first_minimum(geom) * p
    double_d = DiffractionGeometry(geom.slit_width, geom.wavelength, 2 * geom.screen_distance)
    assert math.isclose(uncertainty_form(double_d, p), 2.0 * u, rel_tol=1e-15)


def test_exact_planck_identity():
    # s * (h/lam) * (lam D / s) / D = h to better than 1e-12 relative
    geom = paper_geometry()
    value = geom.slit_width * momentum_of(geom.wavelength) * first_minimum(geom) / geom.screen_distance
    assert abs(value - CODATA_1973.h) / CODATA_1973.h < 1e-12


def test_path_length():
    assert matches_printed(path_length(0.500, 2.2e-3) * 1e3, "500.00484")
    assert path_length(0.7, 0.0) == 0.7
    assert path_length(3.0, 4.0) == 5.0
    with pytest.raises(ValueError):
        path_length(-1.0, 0.0)


def test_geometry_validation_and_warning():
    with pytest.raises(ValueError):
        DiffractionGeometry(0.0, 702.2e-9, 0.5)
    with pytest.raises(ValueError):
        DiffractionGeometry(0.16e-3, -1.0, 0.5)
    with pytest.warns(UserWarning):
        DiffractionGeometry(1e-6, 702.2e-9, 0.5)  # s < 10*lam


def test_sampler_cdf_normalization_and_symmetry():
    sampler = build_sampler(paper_geometry())
    L = sampler.window
    assert sampler.cdf(-L) == 0.0
    assert sampler.cdf(L) == 1.0
    assert sampler.cdf(0.0) == 0.5
    ys = np.linspace(-L, L, 101)
    cdf = sampler.cdf(ys)
    assert np.all(np.diff(cdf) > 0)
    np.testing.assert_allclose(cdf + cdf[::-1], 1.0, atol=1e-15)


def test_sampler_central_lobe_mass_against_quad_oracle():
    oracle = sinc2_lobe_fraction(5)
    assert math.isclose(oracle, CENTRAL_LOBE_MASS_5, rel_tol=2e-6)
    sampler = build_sampler(paper_geometry())
    fm = first_minimum(paper_geometry())
    mass = sampler.cdf(fm) - sampler.cdf(-fm)
    assert math.isclose(mass, oracle, rel_tol=1e-4)


def test_sampler_inverse_symmetry():
    sampler = build_sampler(paper_geometry())
    assert sampler.sample(0.5) == 0.0
    # dyadic u values make |u - 0.5| exact, so the mirror is bitwise
    for u in (0.25, 0.125, 0.0625, 0.75, 0.9375):
        assert sampler.sample(u) == -sampler.sample(1.0 - u)
    rng = np.random.default_rng(5)
    u = rng.random(1000)
    np.testing.assert_allclose(
        sampler.sample(u), -sampler.sample(1.0 - u), atol=1e-9 * sampler.window
    )


def test_sampler_roundtrip_through_cdf():
    sampler = build_sampler(paper_geometry())
    u = np.linspace(0.01, 0.99, 199)
    np.testing.assert_allclose(sampler.cdf(sampler.sample(u)), u, atol=1e-6)


def test_sample_deflection_is_pure():
    sampler = build_sampler(paper_geometry())
    assert sample_deflection(sampler, 0.77) == sample_deflection(sampler, 0.77)
    again = build_sampler(paper_geometry())
    u = np.random.default_rng(6).random(100)
    assert np.array_equal(sampler.sample(u), again.sample(u))


def test_sampler_histogram_matches_intensity():
    # chi-square against per-bin quad integrals of the analytic profile
    geom = paper_geometry()
    sampler = build_sampler(geom)
    n = 1_000_000
    u = np.random.default_rng(7).random(n)
    samples = sampler.sample(u)

    fm = first_minimum(geom)
    edges = np.linspace(-3 * fm, 3 * fm, 65)
    observed, _ = np.histogram(samples, bins=edges)
    masses = np.array(
        [
            integrate.quad(lambda y: relative_intensity(geom, y), a, b, limit=200)[0]
            for a, b in zip(edges[:-1], edges[1:])
        ]
    )
    expected = masses / masses.sum() * observed.sum()
    assert expected.min() > 5
    chi2 = float(np.sum((observed - expected) ** 2 / expected))
    p = stats.chi2.sf(chi2, observed.size - 1)
    assert p > 0.01, f"chi2={chi2:.1f}, p={p:.4g}"

    # sample mean within 3 standard errors of zero
    se = samples.std() / math.sqrt(n)
    assert abs(samples.mean()) < 3 * se


def test_build_sampler_validation():
    geom = paper_geometry()
    with pytest.raises(ValueError):
        build_sampler(geom, truncation_lobes=0)
    with pytest.raises(ValueError):
        build_sampler(geom, grid_points=512)
    narrow = build_sampler(geom, truncation_lobes=1)
    assert math.isclose(narrow.window, first_minimum(geom), rel_tol=1e-15)
