import numpy as np
import pytest

from app.config import POLE_GUARD
from app.errors import BoundaryError, KinematicsError
from app.models import ModeLabel, ModeTag, NormSign, Scenario, Side
from app.schemas import SweepConfig
from services.kinematics_service import (
    KinematicsSolver, classify_scenario, dispersion_curves, find_critical_frequencies, solve_roots,
    zero_dispersion_frequency,
)
from services.medium_service import optical_band, polynomial_coefficients
from services.sweep_service import build_frequency_grid
from conftest import silica

OPTICAL_POSITIVE = (ModeTag.LO, ModeTag.MO, ModeTag.UO)


def positive_optical(modes):
    return [mode for mode in modes if mode.label.tag in OPTICAL_POSITIVE]


@pytest.mark.parametrize("omega", [0.06, 0.2, 0.3, 0.55, 0.7])
def test_roots_solve_the_polynomial(medium, omega):
    for side in medium.sides:
        coefficients = polynomial_coefficients(side, omega)
        roots = solve_roots(side, omega)
        assert len(roots) == 8
        for k in roots:
            scale = np.max(np.abs(coefficients)) * max(1.0, abs(k)) ** 8
            assert abs(np.polyval(coefficients, k)) < 1e-9 * scale
        assert np.allclose(np.sort_complex(roots), np.sort_complex(np.conj(roots)), rtol=1e-9, atol=1e-12)



@pytest.mark.parametrize("omega", [0.06, 0.55, 0.7])
def test_complex_roots_are_exact_conjugates(medium, omega):
    for side in medium.sides:
        roots = solve_roots(side, omega)
        upper, lower = roots[roots.imag > 0], roots[roots.imag < 0]
        assert len(upper) == len(lower) == 1
        assert lower[0] == np.conj(upper[0])


def test_turning_point_search_stays_clear_of_the_resonance(medium):
    for side in medium.sides:
        edge, upper = optical_band(side)
        zero_dispersion = zero_dispersion_frequency(side)
        interval = find_critical_frequencies(side)
        assert edge < interval.lab_min < zero_dispersion < interval.lab_max < upper - POLE_GUARD


def test_solver_builds_on_the_default_medium():
    solver = KinematicsSolver(silica())
    assert all(interval is not None for interval in solver.intervals.values())
    assert solver.criticals is not None


def test_critical_frequencies_are_ordered(solver):
    min_left, max_left, min_right, max_right = solver.criticals
    assert min_left < min_right < max_left < max_right
    assert 0.1 < min_left < 0.2
    assert 0.35 < max_right < 0.5


def test_zero_step_criticals_coincide(null_solver):
    min_left, max_left, min_right, max_right = null_solver.criticals
    assert abs(min_left - min_right) < 1e-12
    assert abs(max_left - max_right) < 1e-12


@pytest.mark.parametrize("side", [Side.LEFT, Side.RIGHT])
def test_dense_scan_brackets_turning_points(solver, side):
    interval = solver.intervals[side]
    for critical, below, above in ((interval.omega_min, 1, 3), (interval.omega_max, 3, 1)):
        scan = critical * (1.0 + np.linspace(-1e-3, 1e-3, 41))
        for omega in scan[np.abs(scan / critical - 1.0) > 1e-7]:
            count = len(positive_optical(solver.solve_modes(side, omega)))
            assert count == (below if omega < critical else above)


def test_subluminal_interval_mode_content(solver, typifying):
    modes = solver.solve_modes(Side.RIGHT, typifying[Scenario.C_HORIZONLESS_MID])
    optical = [mode for mode in modes if mode.label.tag in OPTICAL_POSITIVE + (ModeTag.NO,)]
    signs = sorted(int(mode.norm_sign) for mode in optical)
    assert signs == [-1, 1, 1, 1]


def test_group_velocity_matches_finite_difference(solver):
    omega, step = 0.3, 1e-6
    for side in Side:
        centre = solver.solve_modes(side, omega)
        below = {mode.label: mode for mode in solver.solve_modes(side, omega - step)}
        above = {mode.label: mode for mode in solver.solve_modes(side, omega + step)}
        for mode in centre:
            if not mode.is_propagating:
                continue
            dk = above[mode.label].wavenumber.real - below[mode.label].wavenumber.real
            assert mode.group_velocity == pytest.approx(2.0 * step / dk, rel=1e-4)


@pytest.mark.parametrize("omega", [0.08, 0.12, 0.25, 0.5, 0.7])
def test_mode_classification_rules(solver, omega):
    for side in Side:
        modes = solver.solve_modes(side, omega)
        assert len(modes) == 8
        assert len({mode.label for mode in modes}) == 8
        for mode in modes:
            if mode.is_propagating:
                assert abs(mode.wavenumber.imag) == 0.0
                expected = NormSign.POSITIVE if mode.lab_frequency.real > 0 else NormSign.NEGATIVE
                assert mode.norm_sign == expected
                assert (mode.group_velocity > 0) == (mode.label.tag == ModeTag.MO)
            else:
                assert abs(mode.wavenumber.imag) >= 1e-8
        has_mo = any(mode.label.tag == ModeTag.MO for mode in modes)
        assert has_mo == (len(positive_optical(modes)) == 3)


def test_classify_scenario_examples(solver):
    criticals = solver.criticals
    min_left, max_left, min_right, max_right = criticals
    assert classify_scenario(0.5 * (min_left + min_right), criticals) == Scenario.B_WHITE_HOLE
    assert classify_scenario(0.5 * (max_left + max_right), criticals) == Scenario.D_BLACK_HOLE
    assert classify_scenario(1.5 * max_right, criticals) == Scenario.E_HIGH
    assert classify_scenario(0.5 * min_left, criticals) == Scenario.A_HORIZONLESS_LOW
    with pytest.raises(BoundaryError):
        classify_scenario(max_left, criticals)



def test_classify_scenario_with_swapped_lower_edges():
    # slow fronts put the right lower turning point just below the left one
    criticals = (0.6907709, 29.73, 0.6907708, 29.74)
    assert classify_scenario(0.3, criticals) == Scenario.A_HORIZONLESS_LOW
    assert classify_scenario(0.69077085, criticals) == Scenario.B_WHITE_HOLE
    assert classify_scenario(10.0, criticals) == Scenario.C_HORIZONLESS_MID
    assert classify_scenario(29.735, criticals) == Scenario.D_BLACK_HOLE
    assert classify_scenario(40.0, criticals) == Scenario.E_HIGH


def test_interleaved_horizon_intervals_are_rejected():
    with pytest.raises(KinematicsError):
        classify_scenario(0.45, (0.5, 0.4, 0.6, 0.7))


@pytest.mark.parametrize("omega", [0.3, 0.6])
def test_slower_front_is_classified(omega):
    solution = KinematicsSolver(silica(u=0.2)).solve_frequency(omega)
    assert solution.scenario == Scenario.A_HORIZONLESS_LOW
    assert len(solution.in_basis) == len(solution.out_basis)


@pytest.mark.parametrize("omega", [0.1, 0.3])
def test_slow_front_infrared_triplet(omega):
    solution = KinematicsSolver(silica(u=0.05)).solve_frequency(omega)
    assert solution.scenario == Scenario.A_HORIZONLESS_LOW
    for side in Side:
        modes = solution.modes(side)
        tags = [mode.label.tag for mode in modes]
        assert len(set(tags)) == len(tags) == 8
        assert {ModeTag.LL, ModeTag.ML, ModeTag.HL} <= set(tags)
        triplet = [solution.mode(ModeLabel(tag=tag, side=side)) for tag in (ModeTag.LL, ModeTag.ML, ModeTag.HL)]
        labs = [mode.lab_frequency.real for mode in triplet]
        assert 0.0 < labs[0] < labs[1] < labs[2] < min(silica(u=0.05).right.effective_resonances)
        assert triplet[1].group_velocity > 0.0
        assert triplet[0].group_velocity < 0.0 and triplet[2].group_velocity < 0.0
    assert len(solution.in_basis) == len(solution.out_basis)


def test_scenario_sequence_along_the_sweep(solver):
    config = SweepConfig(points=400, out_dir="unused")
    grid = build_frequency_grid(config, solver.intervals)
    sequence = []
    for omega in grid:
        scenario = classify_scenario(omega, solver.criticals)
        if not sequence or sequence[-1] != scenario:
            sequence.append(scenario)
    assert sequence == list(Scenario)


def test_white_hole_bases(solver, typifying):
    solution = solver.solve_frequency(typifying[Scenario.B_WHITE_HOLE])
    names = {str(label) for label in solution.in_basis}, {str(label) for label in solution.out_basis}
    assert "moL" in names[0]
    assert {"loL", "noL", "uoL"} <= names[1]
    assert len(solution.in_basis) == len(solution.out_basis) == 7


def test_black_hole_emits_middle_optical_mode(solver, typifying):
    solution = solver.solve_frequency(typifying[Scenario.D_BLACK_HOLE])
    assert "moR" in {str(label) for label in solution.out_basis}
    assert len(solution.in_basis) == len(solution.out_basis)


@pytest.mark.parametrize("omega", [0.08, 0.3, 0.7])
def test_kept_evanescent_modes_decay_away_from_front(solver, omega):
    solution = solver.solve_frequency(omega)
    for side, x in ((Side.LEFT, -1.0), (Side.RIGHT, 1.0)):
        for mode in solution.modes(side):
            if mode.label.tag == ModeTag.C:
                assert abs(np.exp(1j * mode.wavenumber * x)) < 1.0


def test_zero_step_bases_pair_by_wavenumber(null_solver):
    for omega in (0.1, 0.3, 0.6):
        solution = null_solver.solve_frequency(omega)
        assert len(solution.in_basis) == len(solution.out_basis)
        for incoming, outgoing in zip(solution.in_basis, solution.out_basis):
            assert incoming.tag == outgoing.tag
            assert solution.mode(incoming).wavenumber == solution.mode(outgoing).wavenumber


def test_full_log_grid_is_well_formed(solver):
    config = SweepConfig(points=2000, spacing="log", out_dir="unused")
    for omega in build_frequency_grid(config, solver.intervals):
        solution = solver.solve_frequency(omega)
        assert len(solution.left_modes) == len(solution.right_modes) == 8
        assert len(solution.in_basis) == len(solution.out_basis)


def test_dispersion_curves_cover_both_sides(medium):
    rows = dispersion_curves(medium, samples=50)
    assert len(rows) == 2 * 2 * 50
    assert {row[0] for row in rows} == {"L", "R"}
    for side, branch, lab, k, omega in rows:
        if branch == "negative":
            assert lab < 0


def test_solver_reports_missing_interval():
    solver = KinematicsSolver(silica(u=0.7))
    assert solver.intervals[Side.RIGHT] is None
    assert solver.criticals is None
