import os
import sys

import numpy as np
import pytest

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.models import ModeLabel, ModeTag, ScatteringMatrix, Side
from app.schemas import MediumParams
from services.kinematics_service import KinematicsSolver
from services.medium_service import Medium
from services.sweep_service import typifying_frequencies

FRONT_SPEED = 2.0 / 3.0
STEP = 2e-6


def silica(delta_n: float = STEP, u: float = FRONT_SPEED) -> Medium:
    return Medium(MediumParams.from_preset("fused_silica", u, delta_n))


@pytest.fixture(scope="session")
def medium():
    return silica()


@pytest.fixture(scope="session")
def solver(medium):
    return KinematicsSolver(medium)


@pytest.fixture(scope="session")
def null_medium():
    return silica(delta_n=0.0)


@pytest.fixture(scope="session")
def null_solver(null_medium):
    return KinematicsSolver(null_medium)


@pytest.fixture(scope="session")
def typifying(solver):
    return typifying_frequencies(solver.intervals, 0.05)


def label(text: str) -> ModeLabel:
    return ModeLabel.parse(text)


def two_mode_squeezer(r: float) -> ScatteringMatrix:
    """S of a pure two-mode squeezer between a positive and a negative norm mode"""
    entries = np.array([[np.cosh(r), np.sinh(r)], [np.sinh(r), np.cosh(r)]], dtype=complex)
    return ScatteringMatrix(
        omega=0.3,
        in_basis=(label("moL"), label("noR")),
        out_basis=(label("moR"), label("noL")),
        entries=entries,
        eta_in=np.array([1.0, -1.0]),
        eta_out=np.array([1.0, -1.0]),
        residual=0.0,
        condition_number=1.0,
    )
