import math

import numpy as np
import pytest

from ghostslit.cli import matches_printed
from ghostslit.kinematics import (
    CODATA_1973,
    SI_2019,
    dynamic_mass_of,
    energy_of,
    flight_time,
    momentum_of,
    photon_kinematics,
)

LAM = 702.2e-9


def test_energy_reference_value():
    assert matches_printed(energy_of(LAM), "2.82893e-19")


def test_energy_half_wavelength_doubles():
    # 351.1 nm is exactly half of 702.2 nm, so E doubles exactly.
    assert math.isclose(energy_of(351.1e-9), 2.0 * energy_of(LAM), rel_tol=1e-14)
    assert matches_printed(energy_of(351.1e-9), "5.65786e-19")


def test_energy_wavelength_product_is_hc():
    rng = np.random.default_rng(2)
    for lam in 10 ** rng.uniform(-9, -3, size=200):
        assert math.isclose(energy_of(lam) * lam, CODATA_1973.h * CODATA_1973.c, rel_tol=1e-14)


def test_momentum_reference_value():
    assert matches_printed(momentum_of(LAM), "9.43631e-28")
    # direct evaluation oracle at the pump wavelength
    assert math.isclose(momentum_of(351.1e-9), CODATA_1973.h / 351.1e-9, rel_tol=1e-15)


def test_momentum_de_broglie_identity():
    rng = np.random.default_rng(3)
    for lam in 10 ** rng.uniform(-9, -3, size=200):
        assert math.isclose(momentum_of(lam) * lam, CODATA_1973.h, rel_tol=1e-14)


def test_dynamic_mass_reference_value():
    assert matches_printed(dynamic_mass_of(9.43631e-28), "3.14761e-36")


def test_dynamic_mass_zero_and_roundtrip():
    assert dynamic_mass_of(0.0) == 0.0
    p = momentum_of(LAM)
    assert math.isclose(dynamic_mass_of(p) * CODATA_1973.c, p, rel_tol=1e-15)


def test_flight_time_reference_values():
    assert matches_printed(flight_time(0.500), "1.6678e-9")
    assert matches_printed(flight_time(1.245), "4.15287e-9")
    assert flight_time(0.0) == 0.0


def test_energy_momentum_mass_consistency():
    rng = np.random.default_rng(4)
    c = CODATA_1973.c
    for lam in 10 ** rng.uniform(-9, -3, size=200):
        assert math.isclose(energy_of(lam), momentum_of(lam) * c, rel_tol=1e-14)
        assert math.isclose(
            dynamic_mass_of(momentum_of(lam)) * c * c, energy_of(lam), rel_tol=1e-14
        )


def test_monotonicity():
    lams = np.geomspace(1e-9, 1e-3, 50)
    energies = [energy_of(l) for l in lams]
    momenta = [momentum_of(l) for l in lams]
    assert all(a > b for a, b in zip(energies, energies[1:]))
    assert all(a > b for a, b in zip(momenta, momenta[1:]))
    ps = np.linspace(0.0, 1e-25, 50)
    masses = [dynamic_mass_of(p) for p in ps]
    assert all(a < b for a, b in zip(masses, masses[1:]))
    ds = np.linspace(0.0, 10.0, 50)
    times = [flight_time(d) for d in ds]
    assert all(a < b for a, b in zip(times, times[1:]))


@pytest.mark.parametrize("bad", [0.0, -1e-9])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        energy_of(bad)
    with pytest.raises(ValueError):
        momentum_of(bad)
    with pytest.raises(ValueError):
        flight_time(-1.0)
    with pytest.raises(ValueError):
        dynamic_mass_of(-1e-30)


def test_photon_kinematics_bundle():
    k = photon_kinematics(LAM)
    assert k.wavelength == LAM
    assert k.energy == energy_of(LAM)
    assert k.momentum == momentum_of(LAM)
    assert k.dynamic_mass == dynamic_mass_of(momentum_of(LAM))


def test_modern_constants_shift_values():
    assert energy_of(LAM, SI_2019) != energy_of(LAM, CODATA_1973)
    assert not matches_printed(momentum_of(LAM, SI_2019), "9.43631e-28")
