"""Frequency sweep: grid, per-frequency evaluation and artifact assembly."""
import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from app.config import EDGE_NUDGE
from app.errors import SimulationError
from app.models import ModeLabel, ModeTag, Scenario, Side, SubluminalInterval
from app.schemas import FrequencyRecord, SweepArtifacts, SweepConfig, TypifyingResult
from services.kinematics_service import KinematicsSolver, dispersion_curves
from services.medium_service import Medium
from services.quantum_service import (
    correlation_matrix, degree_of_entanglement, full_covariance, jc_scatter, log_negativity,
    pair_reports, photon_flux, reduced_covariance,
)
from services.output_service import write_artifacts
from services.scattering_service import build_scattering_matrix

logger = logging.getLogger(__name__)

HAWKING_PARTNER = ModeLabel(tag=ModeTag.NO, side=Side.LEFT)


class SweepEngine:
    """Medium, solver and per-frequency pipeline for one configuration"""

    def __init__(self, config: SweepConfig):
        self.config = config
        self.medium = Medium(config.medium_params())
        self.solver = KinematicsSolver(self.medium)

    def analyse(self, omega: float):
        """(FrequencySolution, ScatteringMatrix) at one frequency"""
        solution = self.solver.solve_frequency(omega)
        return solution, build_scattering_matrix(self.medium, solution)

    def evaluate(self, omega: float) -> FrequencyRecord:
        try:
            solution, s_matrix = self.analyse(omega)
            flux = photon_flux(s_matrix)
            entanglement = self._partner_entanglement(s_matrix, flux.fluxes)
        except SimulationError as exc:
            logger.warning(f"Gap at omega={omega!r}: {type(exc).__name__}: {exc}")
            return FrequencyRecord(omega=omega, ok=False, reason=f"{type(exc).__name__}: {exc}")

        return FrequencyRecord(
            omega=omega,
            ok=True,
            scenario=solution.scenario,
            residual=s_matrix.residual,
            condition_number=s_matrix.condition_number,
            fluxes=flux.fluxes,
            norm_signs=flux.norm_signs,
            entanglement=entanglement,
            modes=(solution.left_modes + solution.right_modes) if self.config.dump_modes else (),
            smatrix=s_matrix if self.config.dump_smatrix else None,
        )

    def _partner_entanglement(self, s_matrix, fluxes) -> Dict[str, Tuple[float, Optional[float]]]:
        """LN and J of noL with every positive-norm out-mode"""
        if HAWKING_PARTNER not in s_matrix.out_basis:
            return {}
        covariance = full_covariance(s_matrix)
        partner = str(HAWKING_PARTNER)
        results = {}
        for label in s_matrix.out_basis:
            if s_matrix.out_sign(label) < 0:
                continue
            reduced = reduced_covariance(s_matrix, (HAWKING_PARTNER, label), covariance)
            log_neg = log_negativity(reduced)
            results[str(label)] = (log_neg, degree_of_entanglement(log_neg, fluxes[partner], fluxes[str(label)]))
        return results


# Grid
def _zones(criticals: Sequence[float], exclusion: float) -> List[Tuple[float, float, float]]:
    width = max(exclusion, EDGE_NUDGE)
    return [(c, c * (1.0 - width), c * (1.0 + width)) for c in criticals]


def _segments(start: float, stop: float, zones) -> List[Tuple[float, float]]:
    """[start, stop] with the exclusion zones cut out"""
    segments = [(start, stop)]
    for _, low, high in zones:
        low, high = low * (1.0 - 1e-9), high * (1.0 + 1e-9)
        pieces = []
        for a, b in segments:
            if high <= a or low >= b:
                pieces.append((a, b))
                continue
            if low > a:
                pieces.append((a, low))
            if high < b:
                pieces.append((high, b))
        segments = pieces
    return segments


def _tier(segments: List[Tuple[float, float]], count: int) -> np.ndarray:
    """Linear points spread over the segments as if they were contiguous"""
    lengths = np.array([b - a for a, b in segments])
    offsets = np.concatenate(([0.0], np.cumsum(lengths)))
    positions = np.linspace(0.0, offsets[-1], count)
    points = np.empty(count)
    for i, t in enumerate(positions):
        index = min(np.searchsorted(offsets, t, side="right") - 1, len(segments) - 1)
        points[i] = segments[index][0] + (t - offsets[index])
    return points


def build_frequency_grid(config: SweepConfig, intervals: Dict[Side, Optional[SubluminalInterval]]) -> np.ndarray:
    """Sweep grid; no point lands inside a near-critical exclusion zone.

    A horizon window narrower than its exclusion zones has nothing left to
    densify and hands its points to the logarithmic background.
    """
    lo, hi, count = config.omega_min, config.omega_max, config.points
    criticals = [value for interval in intervals.values() if interval is not None
                 for value in (interval.omega_min, interval.omega_max)]
    zones = _zones(criticals, config.critical_exclusion)

    windows = []
    left, right = intervals.get(Side.LEFT), intervals.get(Side.RIGHT)
    if config.spacing == "two-tier" and left is not None and right is not None:
        for pair in ((left.omega_min, right.omega_min), (left.omega_max, right.omega_max)):
            a, b = sorted(pair)
            pad = b - a
            a, b = max(a - pad, lo), min(b + pad, hi)
            if b > a:
                segments = _segments(a, b, zones)
                if segments:
                    windows.append(segments)
                else:
                    logger.debug(f"Horizon window [{a!r}, {b!r}] lies inside the exclusion zones")

    if config.spacing == "linear":
        grid = np.linspace(lo, hi, count)
    elif not windows:
        grid = np.geomspace(lo, hi, count)
    else:
        dense = int(round(config.densification * count / (1.0 + len(windows) * config.densification)))
        dense = min(dense, (count - 2) // len(windows))
        background = count - dense * len(windows)
        parts = [np.geomspace(lo, hi, background)]
        parts += [_tier(segments, dense) for segments in windows]
        grid = np.sort(np.concatenate(parts))

    for critical, low, high in zones:
        inside = (grid > low) & (grid < high)
        grid[inside & (grid < critical)] = low
        grid[inside & (grid >= critical)] = high
    grid = np.sort(grid)
    for i in range(1, len(grid)):
        if grid[i] <= grid[i - 1]:
            grid[i] = np.nextafter(grid[i - 1], np.inf)
    return grid


def typifying_frequencies(intervals: Dict[Side, Optional[SubluminalInterval]], omega_floor: float) -> Dict[Scenario, float]:
    """One representative frequency per kinematic scenario"""
    left, right = intervals.get(Side.LEFT), intervals.get(Side.RIGHT)
    chosen: Dict[Scenario, float] = {}
    found = [interval for interval in (left, right) if interval is not None]
    if left is not None:
        lowest = min(interval.omega_min for interval in found)
        chosen[Scenario.A_HORIZONLESS_LOW] = float(np.sqrt(omega_floor * lowest))
    if left is not None and right is not None:
        chosen[Scenario.B_WHITE_HOLE] = 0.5 * (left.omega_min + right.omega_min)
        chosen[Scenario.C_HORIZONLESS_MID] = 0.5 * (
            max(left.omega_min, right.omega_min) + min(left.omega_max, right.omega_max)
        )
        chosen[Scenario.D_BLACK_HOLE] = 0.5 * (left.omega_max + right.omega_max)
    if right is not None:
        chosen[Scenario.E_HIGH] = 1.5 * max(interval.omega_max for interval in found)
    if len(chosen) < len(Scenario):
        missing = [scenario.value for scenario in Scenario if scenario not in chosen]
        logger.warning(f"Partial typifying set, missing scenarios {missing}")
    return chosen


def _evaluate_chunk(config_text: str, omegas: List[float]) -> List[FrequencyRecord]:
    engine = SweepEngine(SweepConfig.from_text(config_text))
    return [engine.evaluate(omega) for omega in omegas]


def evaluate_grid(config: SweepConfig, engine: SweepEngine, grid: Sequence[float],
                  progress: bool = True) -> List[FrequencyRecord]:
    """Records in grid order regardless of the number of workers"""
    omegas = [float(omega) for omega in grid]
    if config.jobs == 1:
        return [engine.evaluate(omega) for omega in tqdm(omegas, desc="Sweep", disable=not progress)]

    chunk_count = config.jobs * 4
    chunks = [[float(omega) for omega in chunk] for chunk in np.array_split(omegas, chunk_count) if len(chunk)]
    records: List[FrequencyRecord] = []
    with ProcessPoolExecutor(max_workers=config.jobs) as executor:
        results = executor.map(_evaluate_chunk, [config.to_text()] * len(chunks), chunks)
        for chunk_records in tqdm(results, total=len(chunks), desc="Sweep chunks", disable=not progress):
            records.extend(chunk_records)
    return records


def analyse_typifying(engine: SweepEngine, typifying: Dict[Scenario, float]):
    """Full pair reports and C/J matrices at each typifying frequency"""
    results, reports_by_scenario = [], {}
    for scenario, omega in typifying.items():
        try:
            _, s_matrix = engine.analyse(omega)
            reports = pair_reports(s_matrix, engine.config.bandwidth_ratio)
        except SimulationError as exc:
            logger.warning(f"Typifying frequency {scenario.value} ({omega!r}) failed: {exc}")
            continue
        reports_by_scenario[scenario] = (omega, reports)
        labels, correlations, _ = correlation_matrix(s_matrix, engine.config.bandwidth_ratio)
        names = [str(label) for label in labels]
        size = len(names)
        entanglement: List[List[Optional[float]]] = [[None] * size for _ in range(size)]
        for (first, second), report in reports.items():
            i, j = names.index(first), names.index(second)
            entanglement[i][j] = entanglement[j][i] = report.degree_of_entanglement
        results.append(TypifyingResult(
            scenario=scenario, omega=omega, labels=tuple(names),
            correlations=correlations.tolist(), entanglement=entanglement,
        ))
    return results, jc_scatter(reports_by_scenario)


def run_sweep(config: SweepConfig, progress: bool = True) -> SweepArtifacts:
    """Evaluate the whole grid plus the typifying frequencies and write CSVs"""
    engine = SweepEngine(config)
    intervals = engine.solver.intervals
    for side, interval in intervals.items():
        if interval is not None:
            logger.info(f"Subluminal interval {side.value}: [{interval.omega_min!r}, {interval.omega_max!r}]")

    grid = build_frequency_grid(config, intervals)
    logger.info(f"Sweeping {len(grid)} frequencies in [{config.omega_min!r}, {config.omega_max!r}] with {config.jobs} job(s)")
    records = evaluate_grid(config, engine, grid, progress)

    typifying = typifying_frequencies(intervals, config.omega_min)
    typifying_results, points = analyse_typifying(engine, typifying)
    strong = [point for point in points if point.correlation > 0.99]
    if strong:
        weak = sum(1 for point in strong if point.degree_of_entanglement <= 0.9)
        logger.info(f"{len(strong)} pair(s) with C > 0.99, {weak} of them with J <= 0.9")

    artifacts = SweepArtifacts(
        config=config,
        kappa_scale=engine.medium.kappa_scale,
        left_elastic_constants=engine.medium.left.effective_elastic_constants,
        right_elastic_constants=engine.medium.right.effective_elastic_constants,
        resonant_frequencies=engine.medium.right.effective_resonances,
        intervals={side.value: interval for side, interval in intervals.items()},
        typifying=typifying,
        grid=[float(omega) for omega in grid],
        records=records,
        typifying_results=typifying_results,
        jc_points=points,
        dispersion=dispersion_curves(engine.medium),
    )
    artifacts = write_artifacts(artifacts)
    logger.info(f"Sweep finished: {artifacts.failed} gap row(s) out of {len(records)}")
    return artifacts
