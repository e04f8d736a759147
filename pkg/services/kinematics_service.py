"""Mode solutions, subluminal intervals and kinematic scenarios."""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from app.config import (
    EDGE_TOLERANCE, GROUP_VELOCITY_TOL, NEWTON_MAX_ITER, POLE_GUARD, ROOT_RESIDUAL_TOL, TOL_IMAG,
)
from app.errors import BoundaryError, KinematicsError, LabelingError, RootFindingError
from app.models import (
    DispersionSide, FrequencySolution, ModeLabel, ModeSolution, ModeTag, Nature, NormSign,
    Scenario, Side, SubluminalInterval,
)
from services.medium_service import (
    Medium, dispersion_gradient, dispersion_residual, group_index, optical_band,
    polynomial_coefficients, refractive_index,
)

logger = logging.getLogger(__name__)

# (band, sign of lab frequency) -> tag, for every band holding a single root
_BAND_TAGS = {
    (0, -1): ModeTag.NL,
    (0, 1): ModeTag.LL,
    (1, -1): ModeTag.NO,
    (2, 1): ModeTag.UL,
    (2, -1): ModeTag.NUL,
}

# Bands that hold three positive roots at some front speeds, ordered by lab frequency
_TRIPLET_TAGS = {
    (0, 1): (ModeTag.LL, ModeTag.ML, ModeTag.HL),
    (1, 1): (ModeTag.LO, ModeTag.MO, ModeTag.UO),
}


def _bracket(side: DispersionSide) -> Tuple[float, float]:
    """Optical band shrunk away from the edge and from the pole guard"""
    edge, upper = optical_band(side)
    return edge * (1.0 + 1e-9), upper - 2.0 * POLE_GUARD


# Critical frequencies
def zero_dispersion_frequency(side: DispersionSide) -> float:
    """Lab frequency of the group-index minimum inside the optical band"""
    low, high = _bracket(side)
    result = minimize_scalar(
        lambda lab: group_index(side, lab),
        bounds=(low, high),
        method="bounded",
        options={"xatol": 1e-12 * high},
    )
    return float(result.x)


def _comoving_from_lab(side: DispersionSide, lab: float) -> float:
    n = refractive_index(side, lab)
    return float(side.gamma * lab * (1.0 - side.front_speed * n / side.light_speed))


def find_critical_frequencies(side: DispersionSide) -> Optional[SubluminalInterval]:
    """Turning points of the optical branch in the co-moving frame.

    They sit where the lab group velocity c/n_g equals the front speed. Returns
    None when the front is faster than every optical group velocity.
    """
    low, high = _bracket(side)
    zero_dispersion = zero_dispersion_frequency(side)

    def excess(lab):
        return side.front_speed * group_index(side, lab) / side.light_speed - 1.0

    if excess(zero_dispersion) >= 0.0:
        logger.warning(f"No subluminal interval on side {side.side.value} at u/c={side.front_speed_fraction!r}")
        return None

    options = dict(xtol=1e-15 * high, rtol=4 * np.finfo(float).eps, maxiter=200)
    lab_min = brentq(excess, low, zero_dispersion, **options)
    lab_max = brentq(excess, zero_dispersion, high, **options)
    return SubluminalInterval(
        side=side.side,
        omega_min=_comoving_from_lab(side, lab_min),
        omega_max=_comoving_from_lab(side, lab_max),
        lab_min=float(lab_min),
        lab_max=float(lab_max),
        zero_dispersion=zero_dispersion,
    )


def classify_scenario(omega: float, criticals: Sequence[float]) -> Scenario:
    """Interval lookup; criticals = (w_minL, w_maxL, w_minR, w_maxR).

    The white-hole interval spans the two lower turning points and the
    black-hole interval the two upper ones, in whichever order the sides put
    them. Slow fronts near the optical band edge swap the lower pair.
    """
    min_left, max_left, min_right, max_right = criticals
    white = sorted((min_left, min_right))
    black = sorted((max_left, max_right))
    if white[1] > black[0]:
        raise KinematicsError(f"horizon intervals overlap: {(*white, *black)!r}", omega=omega)
    for edge in (*white, *black):
        if abs(omega - edge) <= EDGE_TOLERANCE * edge:
            raise BoundaryError(f"frequency on critical edge {edge!r}", omega=omega)

    if omega < white[0]:
        return Scenario.A_HORIZONLESS_LOW
    if omega < white[1]:
        return Scenario.B_WHITE_HOLE
    if omega < black[0]:
        return Scenario.C_HORIZONLESS_MID
    if omega < black[1]:
        return Scenario.D_BLACK_HOLE
    return Scenario.E_HIGH


# Roots
def _polish(side: DispersionSide, omega: float, roots: np.ndarray) -> np.ndarray:
    """Newton iterations on the dispersion relation itself"""
    k = roots.astype(complex)
    for _ in range(NEWTON_MAX_ITER):
        d_k, _ = dispersion_gradient(side, k, omega)
        step = dispersion_residual(side, k, omega) / d_k
        k = k - step
        if np.all(np.abs(step) <= 1e-14 * np.maximum(1.0, np.abs(k))):
            break
    return k


def _relative_residual(side: DispersionSide, omega: float, k: np.ndarray) -> np.ndarray:
    lab = side.gamma * (omega + side.front_speed * k)
    resonances = np.asarray(side.effective_resonances)
    kappas = np.asarray(side.effective_elastic_constants)
    terms = 4.0 * np.pi * kappas * lab[:, None] ** 2 / (1.0 - lab[:, None] ** 2 / resonances ** 2)
    scale = side.light_speed ** 2 * np.abs(k) ** 2 + omega ** 2 + np.sum(np.abs(terms), axis=1)
    return np.abs(dispersion_residual(side, k, omega)) / np.maximum(scale, np.finfo(float).tiny)


def solve_roots(side: DispersionSide, omega: float) -> np.ndarray:
    """All 8 wavenumbers at this co-moving frequency, polished"""
    initial = np.roots(polynomial_coefficients(side, omega))
    if len(initial) != 8:
        raise RootFindingError(f"expected 8 roots, found {len(initial)}", omega=omega, side=side.side.value)

    polished = _polish(side, omega, initial)
    separation = np.abs(initial[:, None] - initial[None, :])
    np.fill_diagonal(separation, np.inf)
    drift = np.abs(polished - initial)
    if np.any(drift > 0.25 * separation.min(axis=1) + 1e-12):
        raise RootFindingError("Newton polish jumped between roots", omega=omega, side=side.side.value)

    real = np.abs(polished.imag) < TOL_IMAG
    if np.any(real):
        k_real = polished.real[real]
        for _ in range(3):
            d_k, _ = dispersion_gradient(side, k_real, omega)
            k_real = k_real - dispersion_residual(side, k_real, omega) / d_k
        polished[real] = k_real

    # complex roots of a real polynomial come in exact conjugate pairs
    upper = [i for i in np.flatnonzero(~real) if polished[i].imag > 0]
    lower = [i for i in np.flatnonzero(~real) if polished[i].imag < 0]
    if len(upper) != len(lower):
        raise RootFindingError("unpaired complex root", omega=omega, side=side.side.value)
    for i in upper:
        j = min(lower, key=lambda index: abs(polished[index] - np.conj(polished[i])))
        lower.remove(j)
        mean = 0.5 * (polished[i] + np.conj(polished[j]))
        polished[i], polished[j] = mean, np.conj(mean)

    residual = _relative_residual(side, omega, polished)
    if np.any(residual > ROOT_RESIDUAL_TOL):
        raise RootFindingError(
            f"root residual {residual.max():.3e} above tolerance", omega=omega, side=side.side.value
        )
    return polished


def group_velocity(side: DispersionSide, wavenumber: float, omega: float) -> float:
    """dw/dk by implicit differentiation of the dispersion relation"""
    d_k, d_omega = dispersion_gradient(side, wavenumber, omega)
    return float(-d_k / d_omega)


def _band_index(side: DispersionSide, lab_abs: float) -> int:
    return int(np.searchsorted(np.sort(side.effective_resonances), lab_abs))


def solve_modes(side: DispersionSide, omega: float, zero_dispersion: Optional[float] = None) -> Tuple[ModeSolution, ...]:
    """All 8 modes with classification and labels.

    Real roots are labelled by the band of the lab frequency and its sign. The
    optical band, and the IR band for slow fronts, can hold three positive
    roots, named in order of lab frequency. A lone positive optical root is lo
    below the group-index minimum and uo above; a lone IR root is ll.
    """
    if zero_dispersion is None:
        zero_dispersion = zero_dispersion_frequency(side)
    roots = solve_roots(side, omega)
    where = dict(omega=omega, side=side.side.value)

    groups: Dict[Tuple[int, int], List[float]] = {}
    complex_roots = []
    for k in roots:
        if k.imag == 0.0:
            lab = side.gamma * (omega + side.front_speed * k.real)
            key = (_band_index(side, abs(lab)), 1 if lab > 0 else -1)
            groups.setdefault(key, []).append(float(k.real))
        else:
            complex_roots.append(complex(k))

    labelled: List[Tuple[ModeTag, complex]] = []
    for key, members in groups.items():
        if key in _TRIPLET_TAGS and len(members) > 1:
            members.sort(key=lambda k: side.gamma * (omega + side.front_speed * k))
            if len(members) == 3:
                labelled += list(zip(_TRIPLET_TAGS[key], members))
            elif len(members) == 2:
                raise BoundaryError(f"two positive roots in band {key[0]}: turning point", **where)
            else:
                raise LabelingError(f"{len(members)} positive roots in band {key[0]}", **where)
        elif key == (1, 1):
            lab = side.gamma * (omega + side.front_speed * members[0])
            labelled.append((ModeTag.LO if lab < zero_dispersion else ModeTag.UO, members[0]))
        elif key in _BAND_TAGS and len(members) == 1:
            labelled.append((_BAND_TAGS[key], members[0]))
        else:
            raise LabelingError(f"{len(members)} real roots in band {key}", **where)

    if len(complex_roots) == 2:
        decaying_sign = -1.0 if side.side == Side.LEFT else 1.0
        complex_roots.sort(key=lambda k: decaying_sign * k.imag, reverse=True)
        labelled += [(ModeTag.C, complex_roots[0]), (ModeTag.CG, complex_roots[1])]
    elif complex_roots:
        raise LabelingError(f"{len(complex_roots)} complex roots", **where)

    modes = []
    for tag, k in labelled:
        label = ModeLabel(tag=tag, side=side.side)
        lab = side.gamma * (omega + side.front_speed * k)
        if tag in (ModeTag.C, ModeTag.CG):
            modes.append(ModeSolution(
                wavenumber=complex(k), comoving_frequency=omega, lab_frequency=complex(lab),
                nature=Nature.EVANESCENT, label=label,
            ))
            continue
        velocity = group_velocity(side, k, omega)
        if tag in (ModeTag.MO, ModeTag.ML) and velocity <= 0:
            raise LabelingError(f"middle root {label} with non-positive group velocity", **where)
        modes.append(ModeSolution(
            wavenumber=complex(k), comoving_frequency=omega, lab_frequency=complex(lab),
            norm_sign=NormSign.POSITIVE if lab > 0 else NormSign.NEGATIVE,
            group_velocity=velocity, nature=Nature.PROPAGATING, label=label,
        ))
    modes.sort(key=lambda mode: mode.label.sort_key)
    return tuple(modes)


def assign_in_out(left_modes: Sequence[ModeSolution], right_modes: Sequence[ModeSolution]):
    """Split propagating modes into in/out bases by transport direction.

    On the left, modes moving towards the front (v_g > 0) are incoming; on the
    right it is the reverse. Evanescent modes stay out of both bases.
    """
    in_basis, out_basis = [], []
    for modes, towards_front in ((left_modes, 1.0), (right_modes, -1.0)):
        for mode in modes:
            if not mode.is_propagating:
                continue
            if abs(mode.group_velocity) < GROUP_VELOCITY_TOL:
                raise BoundaryError(
                    f"zero group velocity for {mode.label}", omega=mode.comoving_frequency,
                    side=mode.side.value,
                )
            if towards_front * mode.group_velocity > 0:
                in_basis.append(mode.label)
            else:
                out_basis.append(mode.label)
    in_basis.sort(key=lambda label: label.sort_key)
    out_basis.sort(key=lambda label: label.sort_key)
    return tuple(in_basis), tuple(out_basis)


class KinematicsSolver:
    """Per-medium mode solver; subluminal intervals are computed once"""

    def __init__(self, medium: Medium):
        self.medium = medium
        self.intervals: Dict[Side, Optional[SubluminalInterval]] = {}
        self._zero_dispersion: Dict[Side, float] = {}
        for side in medium.sides:
            self.intervals[side.side] = find_critical_frequencies(side)
            self._zero_dispersion[side.side] = zero_dispersion_frequency(side)

    @property
    def criticals(self) -> Optional[Tuple[float, float, float, float]]:
        left, right = self.intervals[Side.LEFT], self.intervals[Side.RIGHT]
        if left is None or right is None:
            return None
        return left.omega_min, left.omega_max, right.omega_min, right.omega_max

    def solve_modes(self, side: Side, omega: float) -> Tuple[ModeSolution, ...]:
        return solve_modes(self.medium.side(side), omega, self._zero_dispersion[side])

    def solve_frequency(self, omega: float) -> FrequencySolution:
        left = self.solve_modes(Side.LEFT, omega)
        right = self.solve_modes(Side.RIGHT, omega)
        criticals = self.criticals
        scenario = classify_scenario(omega, criticals) if criticals is not None else None
        in_basis, out_basis = assign_in_out(left, right)
        if len(in_basis) != len(out_basis):
            raise KinematicsError(
                f"unbalanced bases: {len(in_basis)} in, {len(out_basis)} out", omega=omega
            )
        return FrequencySolution(
            omega=omega, left_modes=left, right_modes=right, scenario=scenario,
            in_basis=in_basis, out_basis=out_basis,
        )


def dispersion_curves(medium: Medium, samples: int = 400) -> List[Tuple[str, str, float, float, float]]:
    """Optical branch in the co-moving frame, (side, branch, Omega, k, w) rows.

    The positive branch carries lo/mo/uo, its mirror image the no mode.
    """
    rows = []
    for side in medium.sides:
        edge, upper = optical_band(side)
        for lab in np.geomspace(edge * (1.0 + 1e-6), upper * (1.0 - 1e-3), samples):
            lab_k = refractive_index(side, lab) * lab / side.light_speed
            k = side.gamma * (lab_k - side.front_speed * lab / side.light_speed ** 2)
            omega = side.gamma * (lab - side.front_speed * lab_k)
            rows.append((side.side.value, "positive", float(lab), float(k), float(omega)))
            rows.append((side.side.value, "negative", float(-lab), float(-k), float(-omega)))
    return rows
