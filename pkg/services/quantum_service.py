"""Photon flux, number correlations and Gaussian entanglement of the out-state.

The in-state is the vacuum of every in-mode; the out-state is its image under
the Bogoliubov map encoded by S. Covariance matrices use x = (a + a^+)/sqrt(2),
p = (a - a^+)/(i sqrt(2)) with interleaved ordering (x1, p1, x2, p2, ...), so the
vacuum is I/2.
"""
import logging
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from app.config import J_OVERSHOOT, LN_CALIBRATION_SCALE, UNCERTAINTY_SLACK
from app.errors import CalibrationError, UncertaintyViolation
from app.models import ModeLabel, ScatteringMatrix, Scenario
from app.schemas import FluxSpectrumRow, JCPoint, TwoModeReport

logger = logging.getLogger(__name__)


def _opposite_norm(s_matrix: ScatteringMatrix) -> np.ndarray:
    return s_matrix.eta_out[:, None] != s_matrix.eta_in[None, :]


def photon_numbers(s_matrix: ScatteringMatrix) -> np.ndarray:
    """N_alpha = sum over opposite-norm in-modes of |S_alpha beta|^2"""
    weights = np.abs(s_matrix.entries) ** 2
    return np.sum(np.where(_opposite_norm(s_matrix), weights, 0.0), axis=1)


def photon_flux(s_matrix: ScatteringMatrix) -> FluxSpectrumRow:
    fluxes = photon_numbers(s_matrix) / (2.0 * np.pi)
    labels = [str(label) for label in s_matrix.out_basis]
    return FluxSpectrumRow(
        omega=s_matrix.omega,
        scenario=s_matrix.scenario,
        fluxes={label: float(value) for label, value in zip(labels, fluxes)},
        norm_signs={label: int(sign) for label, sign in zip(labels, s_matrix.eta_out)},
    )


def correlation_matrix(s_matrix: ScatteringMatrix, bandwidth_ratio: float = 1.0):
    """Pearson photon-number correlations between out-modes.

    Returns (labels, C, flagged) where flagged marks entries forced to zero
    because one of the modes carries no photons.
    """
    entries = s_matrix.entries
    opposite = _opposite_norm(s_matrix)
    numbers = photon_numbers(s_matrix)
    variances = numbers * (numbers + 1.0)
    size = len(s_matrix.out_basis)
    correlations = np.zeros((size, size))
    flagged = np.zeros((size, size), dtype=bool)

    for i in range(size):
        for j in range(i, size):
            if variances[i] == 0.0 or variances[j] == 0.0:
                flagged[i, j] = flagged[j, i] = True
                continue
            mask = opposite[i]
            overlap = np.sum(np.conj(entries[i, mask]) * entries[j, mask])
            value = bandwidth_ratio * abs(overlap) ** 2 / np.sqrt(variances[i] * variances[j])
            correlations[i, j] = correlations[j, i] = value
    return s_matrix.out_basis, correlations, flagged


# Gaussian out-state
def bogoliubov_blocks(s_matrix: ScatteringMatrix) -> Tuple[np.ndarray, np.ndarray]:
    """(U, V) with b = U a + V a^+ for the out-mode annihilation operators"""
    entries = s_matrix.entries
    pos_out = s_matrix.eta_out > 0
    pos_in = s_matrix.eta_in > 0
    same = pos_out[:, None] == pos_in[None, :]
    conjugated = np.where(pos_out[:, None], entries, np.conj(entries))
    u = np.where(same, conjugated, 0.0)
    v = np.where(~same, conjugated, 0.0)
    return u, v


def _interleave(matrix_blocks: np.ndarray, size: int) -> np.ndarray:
    order = np.ravel(np.column_stack((np.arange(size), np.arange(size) + size)))
    return matrix_blocks[np.ix_(order, order)]


def symplectic_form(modes: int) -> np.ndarray:
    return np.kron(np.eye(modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def full_covariance(s_matrix: ScatteringMatrix) -> np.ndarray:
    u, v = bogoliubov_blocks(s_matrix)
    size = u.shape[0]
    transform = np.block([
        [np.real(u + v), -np.imag(u - v)],
        [np.imag(u + v), np.real(u - v)],
    ])
    covariance = 0.5 * transform @ transform.T
    return _interleave(covariance, size)


def symplectic_eigenvalues(covariance: np.ndarray) -> np.ndarray:
    modes = covariance.shape[0] // 2
    spectrum = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(modes) @ covariance)))
    return spectrum[::2]


def check_uncertainty(covariance: np.ndarray):
    modes = covariance.shape[0] // 2
    lowest = np.linalg.eigvalsh(covariance + 0.5j * symplectic_form(modes)).min()
    if lowest < -UNCERTAINTY_SLACK:
        raise UncertaintyViolation(f"covariance violates the uncertainty relation ({lowest:.3e})")


def reduced_covariance(s_matrix: ScatteringMatrix, pair: Tuple[ModeLabel, ModeLabel],
                       covariance: Optional[np.ndarray] = None) -> np.ndarray:
    """4x4 covariance of two out-modes in (x_a, p_a, x_b, p_b) order"""
    if covariance is None:
        covariance = full_covariance(s_matrix)
    first, second = (s_matrix.out_basis.index(label) for label in pair)
    rows = [2 * first, 2 * first + 1, 2 * second, 2 * second + 1]
    reduced = covariance[np.ix_(rows, rows)]
    check_uncertainty(reduced)
    return reduced


def log_negativity(covariance: np.ndarray) -> float:
    """Natural-log logarithmic negativity of a two-mode Gaussian state"""
    flip = np.diag([1.0, 1.0, 1.0, -1.0])
    transposed = flip @ covariance @ flip
    smallest = symplectic_eigenvalues(transposed).min()
    return float(max(0.0, -np.log(2.0 * smallest)))


def purity(covariance: np.ndarray) -> float:
    modes = covariance.shape[0] // 2
    return float(1.0 / (2.0 ** modes * np.sqrt(np.linalg.det(covariance))))


def degree_of_entanglement(log_neg: float, flux_first: float, flux_second: float) -> Optional[float]:
    """LN relative to a symmetric two-mode squeezed vacuum of the same energy.

    Photon numbers are N = 2 pi phi and the LN is rescaled to log base sqrt(e),
    so a symmetric two-mode squeezed vacuum gives exactly 1.
    """
    total = flux_first + flux_second
    if total <= 0.0:
        return None
    mean_photons = 2.0 * np.pi * total / 2.0
    value = LN_CALIBRATION_SCALE * log_neg / (4.0 * np.arcsinh(np.sqrt(mean_photons)))
    if value > 1.0 + J_OVERSHOOT:
        raise CalibrationError(f"degree of entanglement {value!r} exceeds 1")
    return float(min(max(value, 0.0), 1.0))


def two_mode_report(s_matrix: ScatteringMatrix, pair: Tuple[ModeLabel, ModeLabel],
                    bandwidth_ratio: float = 1.0, covariance: Optional[np.ndarray] = None,
                    correlations=None) -> TwoModeReport:
    if covariance is None:
        covariance = full_covariance(s_matrix)
    if correlations is None:
        correlations = correlation_matrix(s_matrix, bandwidth_ratio)
    labels, c_values, flagged = correlations
    first, second = (labels.index(label) for label in pair)
    numbers = photon_numbers(s_matrix)
    fluxes = (float(numbers[first] / (2 * np.pi)), float(numbers[second] / (2 * np.pi)))

    reduced = reduced_covariance(s_matrix, pair, covariance)
    log_neg = log_negativity(reduced)
    state_purity = purity(reduced)
    return TwoModeReport(
        pair=(str(pair[0]), str(pair[1])),
        fluxes=fluxes,
        correlation=float(c_values[first, second]),
        correlation_flagged=bool(flagged[first, second]),
        log_negativity=log_neg,
        degree_of_entanglement=degree_of_entanglement(log_neg, *fluxes),
        purity=state_purity,
        is_pure=abs(state_purity - 1.0) < 1e-9,
    )


def pair_reports(s_matrix: ScatteringMatrix, bandwidth_ratio: float = 1.0) -> Dict[Tuple[str, str], TwoModeReport]:
    """Reports for every unordered out-mode pair"""
    covariance = full_covariance(s_matrix)
    check_uncertainty(covariance)
    correlations = correlation_matrix(s_matrix, bandwidth_ratio)
    reports = {}
    for first, second in combinations(s_matrix.out_basis, 2):
        report = two_mode_report(s_matrix, (first, second), bandwidth_ratio, covariance, correlations)
        reports[report.pair] = report
    return reports


def jc_scatter(reports_by_scenario: Mapping[Scenario, Tuple[float, Mapping[Tuple[str, str], TwoModeReport]]]) -> List[JCPoint]:
    """(C, J) points of every pair at the typifying frequencies"""
    points = []
    for scenario in Scenario:
        if scenario not in reports_by_scenario:
            continue
        omega, reports = reports_by_scenario[scenario]
        for pair, report in reports.items():
            if report.degree_of_entanglement is None:
                continue
            points.append(JCPoint(
                scenario=scenario, omega=omega, pair=pair,
                correlation=report.correlation,
                degree_of_entanglement=report.degree_of_entanglement,
            ))
    logger.info(f"J-C scatter: {len(points)} points")
    return points
