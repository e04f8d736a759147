"""Number-basis logarithmic negativity of two-mode squeezed thermal states.

Independent of the covariance path: the density matrix is built explicitly in
a truncated Fock basis, partially transposed and its trace norm taken. The
squeezer conserves m1 - m2, so the state is assembled block by block.
"""
import logging
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from app.errors import TruncationError

logger = logging.getLogger(__name__)

TAIL_TOLERANCE = 1e-10
MIN_TRUNCATION = 40


def thermal_distribution(mean: float, size: int) -> np.ndarray:
    levels = np.arange(size)
    if mean == 0.0:
        return (levels == 0).astype(float)
    return (mean / (mean + 1.0)) ** levels / (mean + 1.0)


def marginal_occupations(r: float, n_th: float, n_th2: Optional[float] = None) -> Tuple[float, float]:
    """Mean photon numbers of both modes; each marginal is thermal"""
    n_second = n_th if n_th2 is None else n_th2
    cosh2, sinh2 = np.cosh(r) ** 2, np.sinh(r) ** 2
    return cosh2 * n_th + sinh2 * (n_second + 1.0), cosh2 * n_second + sinh2 * (n_th + 1.0)


def required_truncation(r: float, n_th: float, n_th2: Optional[float] = None) -> int:
    """Smallest per-mode cutoff whose geometric tails stay 100x below the tolerance"""
    largest = max(marginal_occupations(r, n_th, n_th2))
    if largest == 0.0:
        return MIN_TRUNCATION
    ratio = largest / (largest + 1.0)
    # P(m > T) = ratio^(T+1) per mode; both modes together
    levels = np.log(0.5e-2 * TAIL_TOLERANCE) / np.log(ratio)
    return max(MIN_TRUNCATION, int(np.ceil(levels)))


def _difference_block(r: float, difference: int, mean_first: float, mean_second: float,
                      size: int) -> np.ndarray:
    """Density matrix restricted to |i + d+, i + d->, i = 0..size-1"""
    shift_first, shift_second = max(difference, 0), max(-difference, 0)
    padded = 2 * size + 8
    levels = np.arange(1, padded)
    raising = np.zeros((padded, padded))
    raising[levels, levels - 1] = np.sqrt((levels + shift_first) * (levels + shift_second))
    squeezer = expm(r * (raising - raising.T))

    weights = (thermal_distribution(mean_first, padded + shift_first)[shift_first:]
               * thermal_distribution(mean_second, padded + shift_second)[shift_second:])
    block = squeezer @ np.diag(weights) @ squeezer.T
    return block[:size, :size]


def fock_oracle_log_negativity(r: float, n_th: float, n_th2: Optional[float] = None,
                               truncation: Optional[int] = None) -> float:
    """ln ||rho^T2||_1 for S2(r) (thermal(n_th) x thermal(n_th2)) S2(r)^+.

    ``truncation`` is the largest photon number kept per mode. By default it
    grows with the marginal occupations so the discarded tail stays below
    ``TAIL_TOLERANCE``.
    """
    if r < 0 or n_th < 0 or (n_th2 is not None and n_th2 < 0):
        raise ValueError("squeezing and thermal occupations must be non-negative")
    n_second = n_th if n_th2 is None else n_th2
    if truncation is None:
        truncation = required_truncation(r, n_th, n_second)
        logger.debug(f"Fock truncation {truncation} for r={r!r}, n_th=({n_th!r}, {n_second!r})")
    cutoff = truncation

    blocks: Dict[int, np.ndarray] = {}
    kept = 0.0
    for difference in range(-cutoff, cutoff + 1):
        size = cutoff - abs(difference) + 1
        blocks[difference] = _difference_block(r, difference, n_th, n_second, size)
        kept += np.trace(blocks[difference])
    tail = 1.0 - kept
    if tail > TAIL_TOLERANCE:
        raise TruncationError(tail, truncation)

    trace_norm = 0.0
    for total in range(0, 2 * cutoff + 1):
        first_levels = range(max(0, total - cutoff), min(total, cutoff) + 1)
        transposed = np.empty((len(first_levels), len(first_levels)))
        for row, m1 in enumerate(first_levels):
            n2 = total - m1
            for column, n1 in enumerate(first_levels):
                m2 = total - n1
                block = blocks[m1 - m2]
                transposed[row, column] = block[min(m1, m2), min(n1, n2)]
        trace_norm += np.sum(np.abs(np.linalg.eigvalsh(transposed)))
    return float(np.log(trace_norm))


def squeezed_thermal_covariance(r: float, n_th: float, n_th2: Optional[float] = None) -> np.ndarray:
    """Covariance (x1, p1, x2, p2) of the same state, vacuum = I/2"""
    n_second = n_th if n_th2 is None else n_th2
    cosh, sinh = np.cosh(r), np.sinh(r)
    flip = np.diag([1.0, -1.0])
    squeezer = np.block([[cosh * np.eye(2), sinh * flip], [sinh * flip, cosh * np.eye(2)]])
    thermal = np.diag([n_th + 0.5, n_th + 0.5, n_second + 0.5, n_second + 0.5])
    return squeezer @ thermal @ squeezer.T
