"""Exception hierarchy for the RIF emission simulator.

Everything raised on purpose by the package derives from ``SimulationError`` so
the sweep can turn a failure at one frequency into a gap row and move on.
"""
from typing import Optional


class SimulationError(Exception):
    """Base class for all expected simulation failures"""


class ConfigError(SimulationError):
    """Invalid or unreadable sweep configuration"""


# Medium
class MediumError(SimulationError):
    """Invalid evaluation of the dispersive medium"""


class ResonanceError(MediumError):
    def __init__(self, frequency: float, resonance: float):
        self.frequency = frequency
        self.resonance = resonance
        super().__init__(
            f"lab frequency {frequency!r} is within the pole guard of resonance {resonance!r}"
        )


class StopBandError(MediumError):
    def __init__(self, frequency: float):
        self.frequency = frequency
        super().__init__(f"lab frequency {frequency!r} lies in a stop band (n^2 < 0)")


class NegativeFrequencyError(MediumError):
    def __init__(self, frequency: float):
        self.frequency = frequency
        super().__init__(f"refractive index needs a non-negative lab frequency, got {frequency!r}")


# Kinematics
class KinematicsError(SimulationError):
    """Failure while solving or classifying the modes at one frequency"""

    def __init__(self, message: str, omega: Optional[float] = None, side: Optional[str] = None):
        self.omega = omega
        self.side = side
        where = []
        if omega is not None:
            where.append(f"omega={omega!r}")
        if side is not None:
            where.append(f"side={side}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class RootFindingError(KinematicsError):
    pass


class BoundaryError(KinematicsError):
    """Frequency sits on a turning point or an interval edge"""


class LabelingError(KinematicsError):
    pass


# Scattering
class ScatteringError(SimulationError):
    def __init__(self, message: str, omega: Optional[float] = None):
        self.omega = omega
        suffix = f" (omega={omega!r})" if omega is not None else ""
        super().__init__(f"{message}{suffix}")


class IllConditionedError(ScatteringError):
    def __init__(self, condition_number: float, omega: Optional[float] = None):
        self.condition_number = condition_number
        super().__init__(f"matching system condition number {condition_number:.3e}", omega)


class ConsistencyError(ScatteringError):
    def __init__(self, residual: float, omega: Optional[float] = None):
        self.residual = residual
        super().__init__(f"pseudo-unitarity residual {residual:.3e}", omega)


# Quantum
class QuantumStateError(SimulationError):
    pass


class UncertaintyViolation(QuantumStateError):
    pass


class CalibrationError(QuantumStateError):
    pass


class TruncationError(QuantumStateError):
    def __init__(self, tail_mass: float, truncation: int):
        self.tail_mass = tail_mass
        self.truncation = truncation
        super().__init__(
            f"Fock truncation {truncation} leaves tail mass {tail_mass:.3e}; increase truncation"
        )
