"""Longitudinal vehicle model with three discrete driving modes.

The continuous state is ``(s, v)``: travelled distance and speed. In every
mode the speed obeys

    dv/dt = -c_air * v**2 - a_alpha + u

where ``u`` is zero while coasting disengaged, ``-a_eng`` while coasting with
the powertrain engaged and a (non-positive) braking command while braking.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import MissingCommand, NonPositiveResistance, ScenarioError


class Mode(enum.Enum):
    Q1_DisengagedCoast = "q1"
    Q2_EngagedCoast = "q2"
    Q3_Brake = "q3"

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class VehicleParams:
    mass: float  # kg
    frontal_area: float  # m^2
    drag_coeff: float
    rolling_coeff: float
    engine_drag_decel: float  # m/s^2, a_eng >= 0
    u_min: float  # m/s^2, most negative braking command allowed

    def __post_init__(self):
        checks = [
            ("mass", self.mass > 0, "must be > 0"),
            ("frontal_area", self.frontal_area > 0, "must be > 0"),
            ("drag_coeff", self.drag_coeff > 0, "must be > 0"),
            ("rolling_coeff", self.rolling_coeff >= 0, "must be >= 0"),
            ("engine_drag_decel", self.engine_drag_decel >= 0, "must be >= 0"),
            ("u_min", self.u_min < 0, "must be < 0"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise ScenarioError(f"vehicle.{name} {msg} (got {getattr(self, name)!r})")


@dataclass(frozen=True)
class Environment:
    slope_angle: float = 0.0  # rad
    gravity: float = 9.81  # m/s^2
    air_density: float = 1.29  # kg/m^3

    def __post_init__(self):
        if not self.gravity > 0:
            raise ScenarioError(f"environment.gravity must be > 0 (got {self.gravity!r})")
        if not self.air_density > 0:
            raise ScenarioError(
                f"environment.air_density must be > 0 (got {self.air_density!r})"
            )

    @classmethod
    def from_degrees(cls, slope_deg: float, gravity: float = 9.81, air_density: float = 1.29):
        return cls(math.radians(slope_deg), gravity, air_density)


@dataclass(frozen=True)
class Coefficients:
    """Lumped resistance coefficients used by every closed form."""

    c_air: float  # 1/m
    a_alpha: float  # m/s^2
    a_eng: float = 0.0  # m/s^2

    def a_eff(self, mode: Mode) -> float:
        """Constant part of the coasting deceleration in ``mode``."""
        if mode is Mode.Q1_DisengagedCoast:
            return self.a_alpha
        if mode is Mode.Q2_EngagedCoast:
            return self.a_alpha + self.a_eng
        raise ValueError("a_eff is only defined for coasting modes")


@dataclass(frozen=True)
class State:
    s: float
    v: float

    def __post_init__(self):
        if self.s < 0 or self.v < 0:
            raise ValueError(f"state must be nonnegative (got s={self.s}, v={self.v})")


def derive_coefficients(vp: VehicleParams, env: Environment) -> Coefficients:
    c_air = env.air_density * vp.drag_coeff * vp.frontal_area / (2.0 * vp.mass)
    a_alpha = (
        vp.rolling_coeff * env.gravity * math.cos(env.slope_angle)
        + env.gravity * math.sin(env.slope_angle)
    )
    if not a_alpha > 0:
        raise NonPositiveResistance(
            f"a_alpha = {a_alpha:.6g} m/s^2 <= 0; downhill or resistance-free "
            "roads are not supported by the coasting closed forms"
        )
    return Coefficients(c_air=c_air, a_alpha=a_alpha, a_eng=vp.engine_drag_decel)


def mode_control(mode: Mode, braking_command: float | None = None, a_eng: float = 0.0) -> float:
    """Control input applied in ``mode``."""
    if mode is Mode.Q3_Brake:
        if braking_command is None:
            raise MissingCommand("braking mode requires a braking command")
        return float(braking_command)
    if braking_command is not None:
        raise ValueError(f"{mode.name} takes no braking command")
    if mode is Mode.Q1_DisengagedCoast:
        return 0.0
    return -a_eng


def dynamics_rhs(x: State, mode: Mode, u: float, c: Coefficients) -> tuple[float, float]:
    # mode only selects u upstream; the vector field shape is shared.
    return x.v, -c.c_air * x.v * x.v - c.a_alpha + u


@dataclass(frozen=True)
class Scenario:
    """Boundary data and weights of one braking manoeuvre.

    Distances are measured from the start point, so ``distance_to_target`` is
    ``s_f - s_0``.
    """

    v0: float  # m/s
    distance_to_target: float  # m
    v_f: float  # m/s
    w_u: float
    w_t: float
    vehicle: VehicleParams
    env: Environment = field(default_factory=Environment)

    def __post_init__(self):
        if not 0 < self.v_f < self.v0:
            raise ScenarioError(
                f"boundary: need 0 < v_f < v0 (got v0={self.v0!r}, v_f={self.v_f!r})"
            )
        if not self.distance_to_target > 0:
            raise ScenarioError(
                f"boundary.distance must be > 0 (got {self.distance_to_target!r})"
            )
        if not self.w_u > 0:
            raise ScenarioError(f"weights.w_u must be > 0 (got {self.w_u!r})")
        if not self.w_t > 0:
            raise ScenarioError(f"weights.w_t must be > 0 (got {self.w_t!r})")

    @property
    def coefficients(self) -> Coefficients:
        return derive_coefficients(self.vehicle, self.env)

    @property
    def a_eng(self) -> float:
        return self.vehicle.engine_drag_decel

    @property
    def u_min(self) -> float:
        return self.vehicle.u_min


CASE_STUDY_VEHICLE = VehicleParams(
    mass=2795.0,
    frontal_area=2.26,
    drag_coeff=0.25,
    rolling_coeff=0.015,
    engine_drag_decel=0.4,
    u_min=-2.0,
)
CASE_STUDY_ENV = Environment.from_degrees(2.0, gravity=9.81, air_density=1.29)


def case_study_scenario(**overrides) -> Scenario:
    """150 km/h down to 100 km/h within 500 m, w_u = 0.1, w_t = 1."""
    kw = dict(
        v0=150.0 / 3.6,
        distance_to_target=500.0,
        v_f=100.0 / 3.6,
        w_u=0.1,
        w_t=1.0,
        vehicle=CASE_STUDY_VEHICLE,
        env=CASE_STUDY_ENV,
    )
    kw.update(overrides)
    return Scenario(**kw)
