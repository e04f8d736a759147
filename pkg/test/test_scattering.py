import numpy as np
import pytest

from app.models import Scenario, Side
from services.kinematics_service import KinematicsSolver
from services.scattering_service import (
    COMPONENT_MEANING, build_matching_system, build_scattering_matrix, conjugate_pair,
    field_vector, mixing_strength, norm_density, norm_flux, vector_norm_flux,
)
from conftest import silica

SAMPLE_FREQUENCIES = [0.06, 0.12, 0.25, 0.5, 0.7]


@pytest.mark.parametrize("omega", SAMPLE_FREQUENCIES)
def test_propagating_modes_have_unit_norm_flux(medium, solver, omega):
    for side in medium.sides:
        for mode in solver.solve_modes(side.side, omega):
            if not mode.is_propagating:
                continue
            vector = field_vector(side, mode)
            assert abs(vector_norm_flux(vector)) == pytest.approx(1.0, abs=1e-9)
            assert vector[0].imag == 0.0 and vector[0].real > 0.0


@pytest.mark.parametrize("omega", SAMPLE_FREQUENCIES)
def test_norm_flux_is_density_times_group_velocity(medium, solver, omega):
    for side in medium.sides:
        for mode in solver.solve_modes(side.side, omega):
            if not mode.is_propagating:
                continue
            density = norm_density(side, mode)
            assert np.sign(density) == int(mode.norm_sign)
            assert norm_flux(side, mode) == pytest.approx(density * mode.group_velocity, rel=1e-8)


@pytest.mark.parametrize("omega", [0.06, 0.5, 0.7])
def test_evanescent_pair_vectors_are_conjugate(medium, solver, omega):
    for side in medium.sides:
        decaying, growing = conjugate_pair(solver.solve_modes(side.side, omega))
        first, second = field_vector(side, decaying), field_vector(side, growing)
        assert np.allclose(first, np.conj(second), rtol=1e-8, atol=1e-12)
        assert abs(vector_norm_flux(first)) < 1e-10 * np.vdot(first, first).real


def test_matching_system_is_square_per_side(medium, solver):
    system = build_matching_system(medium, solver.solve_frequency(0.3))
    assert system.columns.shape == (len(COMPONENT_MEANING), 16)
    assert sum(1 for label in system.labels if label.side == Side.LEFT) == 8
    assert np.all(np.linalg.norm(system.columns, axis=0) > 0)


def test_pseudo_unitarity_across_scenarios(medium, solver, typifying):
    for omega in list(typifying.values()) + SAMPLE_FREQUENCIES:
        s_matrix = build_scattering_matrix(medium, solver.solve_frequency(omega))
        assert s_matrix.entries.shape[0] == s_matrix.entries.shape[1]
        assert s_matrix.residual < 1e-8
        rows = np.sum(s_matrix.eta_in[None, :] * np.abs(s_matrix.entries) ** 2, axis=1)
        assert np.allclose(rows, s_matrix.eta_out, atol=1e-8)


def test_zero_step_is_identity(null_medium, null_solver):
    for omega in (0.08, 0.2, 0.3, 0.6):
        s_matrix = build_scattering_matrix(null_medium, null_solver.solve_frequency(omega))
        assert np.allclose(s_matrix.entries, np.eye(len(s_matrix.in_basis)), atol=1e-9)
        assert s_matrix.residual < 1e-10


def test_mixing_scales_linearly_with_step():
    strengths = []
    for step in (1e-7, 2e-7):
        medium = silica(delta_n=step)
        solver = KinematicsSolver(medium)
        solution = solver.solve_frequency(0.3)
        assert solution.scenario == Scenario.C_HORIZONLESS_MID
        strengths.append(mixing_strength(build_scattering_matrix(medium, solution)))
    assert strengths[1] / strengths[0] == pytest.approx(2.0, rel=0.05)


def test_black_hole_matrix_rows_include_hawking_mode(medium, solver, typifying):
    s_matrix = build_scattering_matrix(medium, solver.solve_frequency(typifying[Scenario.D_BLACK_HOLE]))
    assert "moR" in [str(label) for label in s_matrix.out_basis]
    assert s_matrix.scenario == Scenario.D_BLACK_HOLE
    assert s_matrix.condition_number < 1e12
