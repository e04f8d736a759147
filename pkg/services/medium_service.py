"""Dispersive medium on both sides of the front.

The field obeys the co-moving Hopfield dispersion relation

    c^2 k^2 = w^2 + sum_i 4 pi kappa_i Omega^2 / (1 - Omega^2 / Omega_i^2),
    Omega = gamma (w + u k),

on each side. The right side carries the base constants; the left side has all
kappa_i scaled by one common factor so that n(0) is raised by exactly delta_n.
"""
import logging
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from app.config import POLE_GUARD
from app.errors import NegativeFrequencyError, ResonanceError, StopBandError
from app.models import DispersionSide, Side
from app.schemas import MediumParams

logger = logging.getLogger(__name__)


class Medium:
    """Both sides of the index step, built once and shared read-only"""

    def __init__(self, params: MediumParams):
        self.params = params
        base_kappa = np.asarray(params.elastic_constants, dtype=float)
        n0_squared = 1.0 + 4.0 * np.pi * base_kappa.sum()
        n0 = np.sqrt(n0_squared)
        # exactly 1 when delta_n == 0
        self.kappa_scale = 1.0 + (2.0 * n0 + params.delta_n) * params.delta_n / (n0_squared - 1.0)

        self.right = DispersionSide(
            side=Side.RIGHT,
            effective_resonances=tuple(params.resonant_frequencies),
            effective_elastic_constants=tuple(params.elastic_constants),
            front_speed_fraction=params.front_speed_fraction,
            light_speed=params.light_speed,
        )
        self.left = DispersionSide(
            side=Side.LEFT,
            effective_resonances=tuple(params.resonant_frequencies),
            effective_elastic_constants=tuple(float(k) for k in base_kappa * self.kappa_scale),
            front_speed_fraction=params.front_speed_fraction,
            light_speed=params.light_speed,
        )
        logger.debug(f"Medium built: kappa scale {self.kappa_scale!r}, gamma {params.gamma!r}")

    def side(self, side: Side) -> DispersionSide:
        return self.left if side == Side.LEFT else self.right

    @property
    def sides(self) -> Tuple[DispersionSide, DispersionSide]:
        return self.left, self.right


def _constants(side: DispersionSide):
    order = np.argsort(side.effective_resonances)
    resonances = np.asarray(side.effective_resonances, dtype=float)[order]
    kappas = np.asarray(side.effective_elastic_constants, dtype=float)[order]
    return resonances, kappas


def index_squared(side: DispersionSide, lab_frequency: float) -> float:
    resonances, kappas = _constants(side)
    denominators = 1.0 - lab_frequency ** 2 / resonances ** 2
    return float(1.0 + np.sum(4.0 * np.pi * kappas / denominators))


def _guard_poles(side: DispersionSide, lab_frequency: float):
    for resonance in side.effective_resonances:
        if abs(lab_frequency - resonance) < POLE_GUARD:
            raise ResonanceError(lab_frequency, resonance)


def refractive_index(side: DispersionSide, lab_frequency: float) -> float:
    """n(Omega) from the Sellmeier form of the dispersion relation"""
    if lab_frequency < 0:
        raise NegativeFrequencyError(lab_frequency)
    _guard_poles(side, lab_frequency)
    n_squared = index_squared(side, lab_frequency)
    if n_squared < 0:
        raise StopBandError(lab_frequency)
    return float(np.sqrt(n_squared))


def index_derivative(side: DispersionSide, lab_frequency: float) -> float:
    """dn/dOmega"""
    resonances, kappas = _constants(side)
    denominators = 1.0 - lab_frequency ** 2 / resonances ** 2
    d_n_squared = np.sum(8.0 * np.pi * kappas * lab_frequency / resonances ** 2 / denominators ** 2)
    return float(d_n_squared / (2.0 * refractive_index(side, lab_frequency)))


def group_index(side: DispersionSide, lab_frequency: float) -> float:
    """n_g = n + Omega dn/dOmega"""
    return refractive_index(side, lab_frequency) + lab_frequency * index_derivative(side, lab_frequency)


def optical_band(side: DispersionSide) -> Tuple[float, float]:
    """(lower edge where n^2 = 0 above the IR resonance, next resonance up)"""
    resonances, _ = _constants(side)
    low, high = resonances[0], resonances[1]
    edge = brentq(
        lambda omega: index_squared(side, omega),
        low * (1.0 + 1e-12),
        high * (1.0 - 1e-12),
        xtol=1e-15 * high,
        rtol=4 * np.finfo(float).eps,
    )
    return float(edge), float(high)


def susceptibility(side: DispersionSide, lab_frequency):
    """G(Omega) = sum_i 4 pi kappa_i Omega^2 / (1 - Omega^2/Omega_i^2) and dG/dOmega"""
    resonances, kappas = _constants(side)
    omega = np.asarray(lab_frequency)[..., None]
    denominators = 1.0 - omega ** 2 / resonances ** 2
    # kappas meet omega first so long-double input keeps its precision
    value = np.sum(4.0 * np.pi * (kappas * omega ** 2 / denominators), axis=-1)
    derivative = np.sum(8.0 * np.pi * (kappas * omega / denominators ** 2), axis=-1)
    return value, derivative


def dispersion_residual(side: DispersionSide, wavenumber, comoving_frequency: float):
    """F(w, k) = c^2 k^2 - w^2 - G(gamma (w + u k)); vanishes on every mode"""
    lab = side.gamma * (comoving_frequency + side.front_speed * np.asarray(wavenumber))
    g_value, _ = susceptibility(side, lab)
    return side.light_speed ** 2 * np.asarray(wavenumber) ** 2 - comoving_frequency ** 2 - g_value


def dispersion_gradient(side: DispersionSide, wavenumber, comoving_frequency: float):
    """(dF/dk, dF/dw) of the dispersion residual"""
    k = np.asarray(wavenumber)
    lab = side.gamma * (comoving_frequency + side.front_speed * k)
    _, g_derivative = susceptibility(side, lab)
    d_k = 2.0 * side.light_speed ** 2 * k - side.gamma * side.front_speed * g_derivative
    d_omega = -2.0 * comoving_frequency - side.gamma * g_derivative
    return d_k, d_omega


def polynomial_coefficients(side: DispersionSide, comoving_frequency: float) -> np.ndarray:
    """Degree-8 polynomial in k (highest power first) with the same roots as F.

    P(k) = F(k) * prod_i (Omega_i^2 - Omega^2), expanded exactly.
    """
    resonances, kappas = _constants(side)
    omega = float(comoving_frequency)
    k = Polynomial([0.0, 1.0])
    lab = Polynomial([side.gamma * omega, side.gamma * side.front_speed])
    lab_squared = lab ** 2
    factors = [Polynomial([r ** 2]) - lab_squared for r in resonances]

    vacuum = side.light_speed ** 2 * k ** 2 - omega ** 2
    total = vacuum * factors[0] * factors[1] * factors[2]
    for i, (resonance, kappa) in enumerate(zip(resonances, kappas)):
        others = Polynomial([1.0])
        for j, factor in enumerate(factors):
            if j != i:
                others = others * factor
        total = total - 4.0 * np.pi * kappa * resonance ** 2 * lab_squared * others

    coefficients = np.zeros(9, dtype=complex)
    ascending = total.coef
    coefficients[9 - len(ascending):] = ascending[::-1]
    return coefficients
