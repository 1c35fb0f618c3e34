import math

import pytest

from ionpurify import hardware as hw
from ionpurify.hardware import CavityParams, HardwareParams


def test_decay_rate_from_cavity_geometry():
    assert hw.cavity_decay_rate(19000, 3e-3) == pytest.approx(6.61e7, rel=1e-3)


def test_emission_symmetric_point():
    # gamma = Gamma and 4 Omega^2 = gamma Gamma
    g = 2.0e7
    assert hw.emission_probability(g, g / 2, g) == pytest.approx(0.25, abs=1e-15)


def test_emission_lossless_limit():
    assert hw.emission_probability(1e7, 3e6, 1e-9) == pytest.approx(1, abs=1e-12)


@pytest.mark.parametrize("coupling", [1e5, 1e6, 1e7, 1e8])
def test_emission_is_a_probability(coupling):
    assert 0 < hw.emission_probability(9.9e6, coupling, 1.3e8) < 1


def test_cavity_params_override_derived_values():
    c = CavityParams(loss=1e7, finesse=19000, length=3e-3, gamma=5e6, coupling=2.5e6)
    assert c.decay_rate() == 5e6
    assert c.p_cav() == pytest.approx(hw.emission_probability(5e6, 2.5e6, 1e7))


def test_cavity_params_need_ingredients():
    with pytest.raises(ValueError, match="gamma"):
        CavityParams(loss=1e7, coupling=1e6).p_cav()
    with pytest.raises(ValueError):
        CavityParams(loss=-1.0)


def test_confocal_coupling_positive():
    c = CavityParams(loss=1e7, finesse=19000, length=3e-3, dipole=2e-29, wavelength=854e-9)
    assert c.coupling_rate() > 0
    assert 0 < c.p_cav() < 1


def test_efficiency():
    assert HardwareParams().efficiency == pytest.approx(1e-4 * 0.49 / 2 * 0.9, rel=1e-14)


def test_total_probability_mixed():
    assert hw.total_success_probability(HardwareParams(), fidelity=0.7) == pytest.approx(4.00e-7, rel=1e-3)


def test_total_probability_pure():
    assert hw.total_success_probability(HardwareParams(), a_squared=0.7) == pytest.approx(5.79e-7, rel=1e-3)


def test_throughput_values():
    params = HardwareParams()
    assert hw.throughput(hw.total_success_probability(params, fidelity=0.7), params.photon_rate) == pytest.approx(
        71.938125, rel=1e-12
    )
    assert hw.throughput(hw.total_success_probability(params, a_squared=0.7), params.photon_rate) == pytest.approx(
        104.18625, rel=1e-12
    )


def test_exactly_one_input():
    with pytest.raises(ValueError):
        hw.total_success_probability(HardwareParams())
    with pytest.raises(ValueError):
        hw.total_success_probability(HardwareParams(), fidelity=0.7, a_squared=0.7)


@pytest.mark.parametrize("field", ["p_cav", "eta", "zeta", "xi"])
@pytest.mark.parametrize("value", [0.0, 1.5, -0.1])
def test_factor_ranges(field, value):
    with pytest.raises(ValueError, match=field):
        HardwareParams(**{field: value})


def test_xi_scales_linearly():
    full = hw.total_success_probability(HardwareParams(xi=1.0), fidelity=0.9)
    half = hw.total_success_probability(HardwareParams(xi=0.5), fidelity=0.9)
    assert half == pytest.approx(full / 2, rel=1e-14)


def test_negative_throughput_inputs():
    with pytest.raises(ValueError):
        hw.throughput(-1e-7, 3e6)
    assert math.isclose(hw.throughput(0.0, 3e6), 0.0)
