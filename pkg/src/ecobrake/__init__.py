"""Energy-efficient braking plans: disengaged coasting, engaged coasting, braking.

Two solvers share one model: an indirect minimum-principle shooting solver
(``solve_indirect``) and a direct parametric NLP over an affine speed-feedback
braking law (``solve_direct``).
"""

from .analytic import BrakeLaw, BrakePhaseSpec, CoastPhaseSpec
from .direct import DirectSolution, Theta, solve_direct
from .errors import PlanningError
from .indirect import IndirectSolution, SwitchTimes, solve_indirect
from .model import (
    Coefficients,
    Environment,
    Mode,
    Scenario,
    State,
    VehicleParams,
    case_study_scenario,
    derive_coefficients,
)
from .trajectory import Trajectory, compare, extract_trajectory, resimulate

__all__ = [
    "BrakeLaw",
    "BrakePhaseSpec",
    "CoastPhaseSpec",
    "Coefficients",
    "DirectSolution",
    "Environment",
    "IndirectSolution",
    "Mode",
    "PlanningError",
    "Scenario",
    "State",
    "SwitchTimes",
    "Theta",
    "Trajectory",
    "VehicleParams",
    "case_study_scenario",
    "compare",
    "derive_coefficients",
    "extract_trajectory",
    "resimulate",
    "solve_direct",
    "solve_indirect",
]
