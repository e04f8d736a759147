"""Mode matching at the index step and the Bogoliubov scattering matrix.

Each side is described by the co-moving Lagrangian

    L = (1/8pi) [(d_t A)^2 - c^2 (d_x A)^2]
        + sum_i [(D_t P_i)^2 - Omega_i^2 P_i^2] / (2 kappa_i Omega_i^2)
        - sum_i P_i D_t A,        D_t = gamma (d_t - u d_x),

which reproduces the dispersion relation. Across the step we match the
fields and their x-conjugate momenta, which keeps the norm current continuous.

Field vectors are stored in quadrature-real form,

    (A, i pi_A, -i P_1, -i P_2, -i P_3, pi_P1, pi_P2, pi_P3),

so a real propagating mode with real A has a real vector. The norm current
of a vector is then J = 2 Re(a* b + sum_i p_i* q_i).

The small off-diagonal entries of S decide the photon fluxes, so the matching
is done in extended precision: wavenumbers are re-polished as long doubles,
the vectors are built from them and the float64 QR solve is refined against
long-double residuals.
"""
import logging
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from app.config import CONDITION_LIMIT, EXTENDED_NEWTON_STEPS, REFINEMENT_SWEEPS, UNITARITY_FAIL
from app.errors import ConsistencyError, IllConditionedError, ScatteringError
from app.models import (
    DispersionSide, FrequencySolution, MatchingSystem, ModeLabel, ModeSolution, ModeTag,
    ScatteringMatrix, Side,
)
from services.medium_service import Medium, dispersion_gradient, dispersion_residual

logger = logging.getLogger(__name__)

COMPONENT_MEANING = (
    "A", "i*pi_A", "-i*P1", "-i*P2", "-i*P3", "pi_P1", "pi_P2", "pi_P3",
)


def extended_wavenumber(side: DispersionSide, mode: ModeSolution):
    """Mode wavenumber re-polished on the dispersion relation in long double"""
    omega = np.longdouble(mode.comoving_frequency)
    k = np.longdouble(mode.wavenumber.real) if mode.is_propagating else np.clongdouble(mode.wavenumber)
    for _ in range(EXTENDED_NEWTON_STEPS):
        d_k, _ = dispersion_gradient(side, k, omega)
        k = k - dispersion_residual(side, k, omega) / d_k
    return k


def _response(side: DispersionSide, mode: ModeSolution):
    """Lab frequency, resonance denominators and oscillator amplitudes for A = 1"""
    resonances = np.asarray(side.effective_resonances, dtype=np.longdouble)
    kappas = np.asarray(side.effective_elastic_constants, dtype=np.longdouble)
    k = extended_wavenumber(side, mode)
    lab = side.gamma * (np.longdouble(mode.comoving_frequency) + side.front_speed * k)
    denominators = 1.0 - lab ** 2 / resonances ** 2
    if np.any(np.abs(denominators) < 1e-12):
        raise ScatteringError(f"mode {mode.label} sits on an oscillator resonance", mode.comoving_frequency)
    polarization = 1j * kappas * lab / denominators
    return k, lab, resonances, kappas, polarization


def _raw_vector(side: DispersionSide, mode: ModeSolution) -> np.ndarray:
    k, lab, resonances, kappas, polarization = _response(side, mode)
    four_pi = 4 * np.longdouble(np.pi)
    vector = np.empty(len(COMPONENT_MEANING), dtype=np.clongdouble)
    vector[0] = 1
    vector[1] = 1j * (-1j * side.light_speed ** 2 * k / four_pi + side.gamma * side.front_speed * polarization.sum())
    vector[2:5] = -1j * polarization
    vector[5:8] = 1j * side.gamma * side.front_speed * lab * polarization / (kappas * resonances ** 2)
    return vector


def _current(vector: np.ndarray):
    a, b = vector[0], vector[1]
    p, q = vector[2:5], vector[5:8]
    return 2 * np.real(np.conj(a) * b + np.sum(np.conj(p) * q))


def vector_norm_flux(vector: np.ndarray) -> float:
    """x-component of the conserved norm current of one field vector"""
    return float(_current(vector))


def extended_field_vector(side: DispersionSide, mode: ModeSolution) -> np.ndarray:
    """Long-double field vector; propagating modes carry unit norm flux"""
    vector = _raw_vector(side, mode)
    if not mode.is_propagating:
        return vector
    flux = _current(vector)
    if flux == 0:
        raise ScatteringError(f"mode {mode.label} carries no norm flux", mode.comoving_frequency)
    return vector / np.sqrt(abs(flux))


def field_vector(side: DispersionSide, mode: ModeSolution) -> np.ndarray:
    """Matched quantities of a plane-wave mode.

    Propagating modes are scaled to unit norm flux with A real and positive;
    evanescent modes keep A = 1.
    """
    return extended_field_vector(side, mode).astype(complex)


def norm_flux(side: DispersionSide, mode: ModeSolution) -> float:
    return vector_norm_flux(field_vector(side, mode))


def norm_density(side: DispersionSide, mode: ModeSolution) -> float:
    """Time component of the norm current for the normalized mode"""
    amplitude = extended_field_vector(side, mode)[0]
    _, lab, resonances, kappas, polarization = _response(side, mode)
    polarization = polarization * amplitude
    omega = np.longdouble(mode.comoving_frequency)
    pi_t_a = -1j * omega * amplitude / (4 * np.longdouble(np.pi)) - side.gamma * polarization.sum()
    pi_t_p = -1j * side.gamma * lab * polarization / (kappas * resonances ** 2)
    total = np.conj(amplitude) * pi_t_a + np.sum(np.conj(polarization) * pi_t_p)
    return float(-2 * np.imag(total))


def build_matching_system(medium: Medium, fs: FrequencySolution) -> MatchingSystem:
    labels: List[ModeLabel] = []
    columns = []
    for side, modes in ((medium.left, fs.left_modes), (medium.right, fs.right_modes)):
        for mode in modes:
            labels.append(mode.label)
            columns.append(extended_field_vector(side, mode))
    return MatchingSystem(
        omega=fs.omega,
        labels=tuple(labels),
        columns=np.column_stack(columns),
        component_meaning=COMPONENT_MEANING,
    )


def _solve_refined(matrix: np.ndarray, rhs: np.ndarray, sweeps: int = REFINEMENT_SWEEPS) -> np.ndarray:
    """Column-pivoted QR solve with mixed-precision iterative refinement.

    The factorization runs in float64 on a rounded copy; residuals and the
    accumulated solution stay in the precision of ``matrix``.
    """
    q, r, perm = scipy.linalg.qr(matrix.astype(complex), pivoting=True)

    def solve(b):
        y = scipy.linalg.solve_triangular(r, q.conj().T @ b.astype(complex))
        x = np.empty_like(y)
        x[perm] = y
        return x

    solution = solve(rhs).astype(matrix.dtype)
    for _ in range(sweeps):
        solution = solution + solve(rhs - matrix @ solution)
    return solution


def pseudo_unitarity_residual(entries: np.ndarray, eta_in: np.ndarray, eta_out: np.ndarray) -> float:
    product = entries @ np.diag(eta_in) @ entries.conj().T
    return float(np.max(np.abs(product - np.diag(eta_out)))) if entries.size else 0.0


def build_scattering_matrix(medium: Medium, fs: FrequencySolution) -> ScatteringMatrix:
    """Unit-amplitude injection of every in-mode; S rows are out-modes"""
    if not fs.in_basis:
        raise ScatteringError("empty in-basis", fs.omega)
    system = build_matching_system(medium, fs)

    unknowns: List[Tuple[ModeLabel, float]] = []
    for side in (Side.LEFT, Side.RIGHT):
        sign = 1.0 if side == Side.LEFT else -1.0
        unknowns += [(label, sign) for label in fs.out_basis if label.side == side]
        unknowns += [(label, sign) for label in system.labels if label.side == side and label.tag == ModeTag.C]
    if len(unknowns) != len(COMPONENT_MEANING):
        raise ScatteringError(f"{len(unknowns)} unknown amplitudes for 8 matching conditions", fs.omega)

    matrix = np.column_stack([sign * system.column(label) for label, sign in unknowns])
    rhs = np.column_stack([
        (-1.0 if label.side == Side.LEFT else 1.0) * system.column(label) for label in fs.in_basis
    ])

    row_scale = 1.0 / np.max(np.abs(matrix), axis=1)
    matrix = matrix * row_scale[:, None]
    rhs = rhs * row_scale[:, None]
    column_scale = 1.0 / np.max(np.abs(matrix), axis=0)
    matrix = matrix * column_scale[None, :]

    condition_number = float(np.linalg.cond(matrix.astype(complex)))
    if not np.isfinite(condition_number) or condition_number > CONDITION_LIMIT:
        raise IllConditionedError(condition_number, fs.omega)

    amplitudes = _solve_refined(matrix, rhs) * column_scale[:, None]
    unknown_labels = [label for label, _ in unknowns]
    entries = np.vstack([amplitudes[unknown_labels.index(label)] for label in fs.out_basis]).astype(complex)

    eta_in = np.array([int(fs.mode(label).norm_sign) for label in fs.in_basis], dtype=float)
    eta_out = np.array([int(fs.mode(label).norm_sign) for label in fs.out_basis], dtype=float)
    residual = pseudo_unitarity_residual(entries, eta_in, eta_out)
    logger.debug(f"omega={fs.omega!r}: cond={condition_number:.3e} residual={residual:.3e}")
    if residual > UNITARITY_FAIL:
        raise ConsistencyError(residual, fs.omega)

    return ScatteringMatrix(
        omega=fs.omega,
        scenario=fs.scenario,
        in_basis=fs.in_basis,
        out_basis=fs.out_basis,
        entries=entries,
        eta_in=eta_in,
        eta_out=eta_out,
        residual=residual,
        condition_number=condition_number,
    )


def mixing_strength(s_matrix: ScatteringMatrix) -> float:
    """Largest off-diagonal |S| in the canonical basis pairing"""
    entries = s_matrix.entries
    off_diagonal = entries - np.diag(np.diag(entries))
    return float(np.max(np.abs(off_diagonal)))


def conjugate_pair(modes: Sequence[ModeSolution]) -> Tuple[ModeSolution, ModeSolution]:
    """(decaying, growing) evanescent modes of one side"""
    decaying = [mode for mode in modes if mode.label.tag == ModeTag.C]
    growing = [mode for mode in modes if mode.label.tag == ModeTag.CG]
    if len(decaying) != 1 or len(growing) != 1:
        raise ScatteringError("side has no evanescent pair")
    return decaying[0], growing[0]
