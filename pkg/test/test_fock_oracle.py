import numpy as np
import pytest

from app.errors import TruncationError
from services.fock_oracle import (
    MIN_TRUNCATION, fock_oracle_log_negativity, marginal_occupations, required_truncation,
    squeezed_thermal_covariance,
)
from services.quantum_service import log_negativity


def test_vacuum():
    assert fock_oracle_log_negativity(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_thermal_product_state_is_separable():
    assert fock_oracle_log_negativity(0.0, 1.0) == pytest.approx(0.0, abs=1e-9)


def test_two_mode_squeezed_vacuum_matches_covariance_path():
    expected = log_negativity(squeezed_thermal_covariance(1.0, 0.0))
    assert expected == pytest.approx(2.0, abs=1e-9)
    assert fock_oracle_log_negativity(1.0, 0.0, truncation=60) == pytest.approx(expected, abs=1e-6)


def random_states(count, seed=2024, max_occupation=2.0):
    """Squeezed thermal states whose marginal occupations stay at or below max_occupation"""
    rng = np.random.default_rng(seed)
    states = []
    while len(states) < count:
        r = rng.uniform(0.0, np.arcsinh(np.sqrt(max_occupation)))
        n_first, n_second = rng.uniform(0.0, max_occupation, size=2)
        if max(marginal_occupations(r, n_first, n_second)) <= max_occupation:
            states.append((r, n_first, n_second))
    return states


def test_randomized_gaussian_states_agree():
    states = random_states(20)
    assert max(max(marginal_occupations(*state)) for state in states) > 1.0
    for r, n_first, n_second in states:
        fock = fock_oracle_log_negativity(r, n_first, n_second)
        covariance = log_negativity(squeezed_thermal_covariance(r, n_first, n_second))
        assert fock == pytest.approx(covariance, abs=1e-6)


@pytest.mark.parametrize("r, n_first, n_second", [
    (np.arcsinh(np.sqrt(2.0)), 0.0, 0.0),
    (0.0, 2.0, 2.0),
    (0.3, 1.5, 0.2),
])
def test_default_truncation_covers_two_photons_per_mode(r, n_first, n_second):
    assert max(marginal_occupations(r, n_first, n_second)) <= 2.0 + 1e-12
    fock = fock_oracle_log_negativity(r, n_first, n_second)
    covariance = log_negativity(squeezed_thermal_covariance(r, n_first, n_second))
    assert fock == pytest.approx(covariance, abs=1e-6)


def test_truncation_grows_with_occupation():
    assert required_truncation(0.0, 0.0) == MIN_TRUNCATION
    assert required_truncation(0.0, 2.0) == 70
    assert required_truncation(0.0, 2.0) < required_truncation(0.5, 1.5)


def test_short_truncation_is_rejected():
    with pytest.raises(TruncationError):
        fock_oracle_log_negativity(1.5, 0.0, truncation=10)
