import numpy as np
import pytest

from app.errors import MediumError, NegativeFrequencyError, ResonanceError, SimulationError
from services.medium_service import (
    dispersion_residual, optical_band, polynomial_coefficients, refractive_index,
)
from conftest import STEP, silica


def test_zero_frequency_limit(medium):
    kappas = np.asarray(medium.right.effective_elastic_constants)
    expected = np.sqrt(1.0 + 4.0 * np.pi * kappas.sum())
    assert refractive_index(medium.right, 0.0) == pytest.approx(expected, rel=1e-14)


def test_left_side_carries_the_step(medium):
    step = refractive_index(medium.left, 0.0) - refractive_index(medium.right, 0.0)
    assert abs(step - STEP) < 1e-12
    assert medium.left.effective_resonances == medium.right.effective_resonances


def test_fused_silica_at_1060_nm(medium):
    n = refractive_index(medium.right, 2.0 * np.pi / 1.06)
    assert abs(n - 1.4497) < 1e-3


def test_pole_guard_names_the_resonance(medium):
    resonance = medium.right.effective_resonances[2]
    with pytest.raises(ResonanceError) as info:
        refractive_index(medium.right, resonance + 1e-7)
    assert info.value.resonance == resonance


def test_negative_frequency_is_a_medium_error(medium):
    with pytest.raises(NegativeFrequencyError) as info:
        refractive_index(medium.right, -0.3)
    assert isinstance(info.value, MediumError)
    assert isinstance(info.value, SimulationError)
    assert info.value.frequency == -0.3


def test_normal_dispersion_below_first_resonance(medium):
    limit = 0.9 * min(medium.right.effective_resonances)
    values = [refractive_index(medium.right, lab) for lab in np.linspace(0.0, limit, 200)]
    assert np.all(np.diff(values) > 0)


def test_optical_band_edge(medium):
    edge, upper = optical_band(medium.right)
    assert 0.7 < edge < 0.8
    assert upper == pytest.approx(2.0 * np.pi / 0.1162414)


@pytest.mark.parametrize("omega", [0.07, 0.2, 0.43, 0.75])
def test_polynomial_matches_cleared_dispersion(medium, omega):
    side = medium.left
    coefficients = polynomial_coefficients(side, omega)
    rng = np.random.default_rng(11)
    for k in rng.normal(size=5) * 5 + 1j * rng.normal(size=5):
        lab = side.gamma * (omega + side.front_speed * k)
        cleared = dispersion_residual(side, k, omega) * np.prod(
            [r ** 2 - lab ** 2 for r in side.effective_resonances]
        )
        assert np.polyval(coefficients, k) == pytest.approx(cleared, rel=1e-9)


def test_polynomial_is_real_with_expected_leading_term(medium):
    side = medium.right
    coefficients = polynomial_coefficients(side, 0.3)
    assert np.all(coefficients.imag == 0)
    assert coefficients[0].real == pytest.approx(-(side.gamma * side.front_speed) ** 6)


def test_zero_frequency_has_zero_root(medium):
    coefficients = polynomial_coefficients(medium.right, 0.0)
    assert abs(coefficients[-1]) < 1e-12


def test_zero_step_gives_identical_sides():
    medium = silica(delta_n=0.0)
    for omega in (0.1, 0.3, 0.6):
        assert np.array_equal(
            polynomial_coefficients(medium.left, omega), polynomial_coefficients(medium.right, omega)
        )
