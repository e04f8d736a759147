from enum import Enum, IntEnum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.config import SLOW_FRONT_TAGS, TAG_ORDER


class Side(str, Enum):
    LEFT = "L"    # x < 0, high index
    RIGHT = "R"   # x > 0, base medium


class ModeTag(str, Enum):
    NO = "no"
    LO = "lo"
    MO = "mo"
    UO = "uo"
    UL = "ul"
    NL = "nl"
    LL = "ll"
    NUL = "nul"
    ML = "ml"     # IR-band triplet of slow fronts, with ll
    HL = "hl"
    C = "c"       # decaying complex root
    CG = "cg"     # growing conjugate of c, never matched


class Nature(str, Enum):
    PROPAGATING = "propagating"
    EVANESCENT = "evanescent"


class NormSign(IntEnum):
    POSITIVE = 1
    NEGATIVE = -1


class Scenario(str, Enum):
    A_HORIZONLESS_LOW = "A"
    B_WHITE_HOLE = "B"
    C_HORIZONLESS_MID = "C"
    D_BLACK_HOLE = "D"
    E_HIGH = "E"


POSITIVE_NORM_TAGS = (ModeTag.UO, ModeTag.MO, ModeTag.LO, ModeTag.UL, ModeTag.HL, ModeTag.ML, ModeTag.LL)


class ModeLabel(BaseModel):
    model_config = ConfigDict(frozen=True)

    tag: ModeTag
    side: Side

    def __str__(self) -> str:
        return f"{self.tag.value}{self.side.value}"

    @property
    def sort_key(self) -> Tuple[int, int]:
        order = TAG_ORDER + SLOW_FRONT_TAGS
        rank = order.index(self.tag.value) if self.tag.value in order else len(order)
        return rank, 0 if self.side == Side.LEFT else 1

    @classmethod
    def parse(cls, text: str) -> "ModeLabel":
        """Inverse of str(), e.g. 'noL' -> ModeLabel(no, L)"""
        return cls(tag=ModeTag(text[:-1]), side=Side(text[-1]))


def all_labels(include_growing: bool = False):
    """Every (tag, side) combination in canonical order"""
    labels = [ModeLabel(tag=ModeTag(tag), side=side) for tag in TAG_ORDER + SLOW_FRONT_TAGS for side in Side]
    if include_growing:
        labels += [ModeLabel(tag=ModeTag.CG, side=side) for side in Side]
    return labels


class DispersionSide(BaseModel):
    """Medium constants seen by the field on one side of the front"""
    model_config = ConfigDict(frozen=True)

    side: Side
    effective_resonances: Tuple[float, float, float]
    effective_elastic_constants: Tuple[float, float, float]
    front_speed_fraction: float
    light_speed: float = 1.0

    @property
    def front_speed(self) -> float:
        return self.front_speed_fraction * self.light_speed

    @property
    def gamma(self) -> float:
        return 1.0 / np.sqrt(1.0 - self.front_speed_fraction ** 2)


class SubluminalInterval(BaseModel):
    """Co-moving frequency range with three positive-norm optical roots"""
    model_config = ConfigDict(frozen=True)

    side: Side
    omega_min: float
    omega_max: float
    lab_min: float              # lab frequency of the turning point at omega_min
    lab_max: float
    zero_dispersion: float      # lab frequency of the group-index minimum


class ModeSolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    wavenumber: complex
    comoving_frequency: float
    lab_frequency: complex
    norm_sign: Optional[NormSign] = None
    group_velocity: Optional[float] = None
    nature: Nature
    label: ModeLabel

    @property
    def is_propagating(self) -> bool:
        return self.nature == Nature.PROPAGATING

    @property
    def side(self) -> Side:
        return self.label.side


class FrequencySolution(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega: float
    left_modes: Tuple[ModeSolution, ...]
    right_modes: Tuple[ModeSolution, ...]
    scenario: Optional[Scenario] = None
    in_basis: Tuple[ModeLabel, ...]
    out_basis: Tuple[ModeLabel, ...]

    def modes(self, side: Side) -> Tuple[ModeSolution, ...]:
        return self.left_modes if side == Side.LEFT else self.right_modes

    def mode(self, label: ModeLabel) -> ModeSolution:
        for candidate in self.modes(label.side):
            if candidate.label == label:
                return candidate
        raise KeyError(str(label))


class MatchingSystem(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega: float
    labels: Tuple[ModeLabel, ...]
    columns: np.ndarray                  # shape (8, len(labels))
    component_meaning: Tuple[str, ...]

    def column(self, label: ModeLabel) -> np.ndarray:
        return self.columns[:, self.labels.index(label)]


class ScatteringMatrix(BaseModel):
    """Bogoliubov map from in-mode to out-mode amplitudes at one omega"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    omega: float
    scenario: Optional[Scenario] = None
    in_basis: Tuple[ModeLabel, ...]
    out_basis: Tuple[ModeLabel, ...]
    entries: np.ndarray        # rows = out_basis, cols = in_basis
    eta_in: np.ndarray
    eta_out: np.ndarray
    residual: float
    condition_number: float

    def element(self, out_label: ModeLabel, in_label: ModeLabel) -> complex:
        return complex(self.entries[self.out_basis.index(out_label), self.in_basis.index(in_label)])

    def out_sign(self, label: ModeLabel) -> int:
        return int(self.eta_out[self.out_basis.index(label)])
