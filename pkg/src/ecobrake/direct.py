"""Parametric approximation: affine speed feedback while braking.

The decision vector is ``theta = [dt_q1, dt_q2, u_m, u_n]``. Coasting closed
forms carry the state to the braking switch, the braking closed forms give
the braking duration and the distance at which the target speed is reached,
and the control energy integral follows from the braking ODE itself:

    c_air * int v^2 dt = v(t_s2) - v_f - (a_alpha - u_n) * dt_q3 - u_m * ds_q3

so the whole problem is a small smooth NLP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import BrakeLaw, BrakePhaseSpec, CoastPhaseSpec
from .errors import DomainError
from .indirect import (
    BRAKING_STEPS,
    CostTerms,
    SwitchTimes,
    _beyond_braking_limit,
    _solve_coast_only,
    bracket_guess,
    check_reachable,
    default_guess,
    terminal_lambda_v,
)
from .model import Coefficients, Mode, Scenario
from .numerics import NlpConfig, NlpResult, nlp_solve

G_C_MARGIN = 1e-8
INEQ_NAMES = (
    "u_max_ts2", "u_max_tf", "u_min_ts2", "u_min_tf", "g_c", "dt_q1", "dt_q2",
)
# the closed forms need braking to start at or above v_f; the solver adds this row
DOMAIN_ROW = "v_ts2_minus_vf"


@dataclass(frozen=True)
class Theta:
    dt_q1: float
    dt_q2: float
    u_m: float
    u_n: float

    def as_array(self) -> np.ndarray:
        return np.array([self.dt_q1, self.dt_q2, self.u_m, self.u_n])

    @property
    def law(self) -> BrakeLaw:
        return BrakeLaw(self.u_m, self.u_n)


@dataclass(frozen=True)
class Phases:
    q1: CoastPhaseSpec
    q2: CoastPhaseSpec
    brake: BrakePhaseSpec | None  # None where the law has no real roots
    s_brake: float
    v_brake: float
    dt_q3: float
    ds_q3: float


def phases(theta: Theta, scn: Scenario, c: Coefficients, strict: bool = True) -> Phases:
    """Chain the closed forms through all three phases.

    With ``strict=False`` a braking start below v_f is accepted and yields a
    negative braking duration (the analytic continuation the solver needs at
    the zero-braking boundary).
    """
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    t_s1 = theta.dt_q1
    t_s2 = theta.dt_q1 + theta.dt_q2
    s1, v1 = analytic.coast_end(q1, t_s1)
    q2 = analytic.coast_phase(Mode.Q2_EngagedCoast, t_s1, s1, v1, c)
    s2, v2 = analytic.coast_end(q2, t_s2)
    if strict and v2 < scn.v_f:
        raise DomainError(f"coasting already dropped below v_f (v(t_s2) = {v2:.6g})")
    dt_q3, ds_q3 = analytic.brake_span(theta.law, c.c_air, c.a_alpha, v2, scn.v_f)
    brake = None
    if theta.law.discriminant(c) > 0.0:
        brake = analytic.brake_phase(theta.law, t_s2, s2, v2, c)
    return Phases(q1, q2, brake, s2, v2, dt_q3, ds_q3)


def control_energy(theta: Theta, ph: Phases, scn: Scenario, c: Coefficients) -> float:
    """Closed-form ``int u^2 dt`` over braking (without the w_u/2 factor)."""
    u_m, u_n = theta.u_m, theta.u_n
    int_v2 = (ph.v_brake - scn.v_f - (c.a_alpha - u_n) * ph.dt_q3 - u_m * ph.ds_q3) / c.c_air
    return u_m * u_m * int_v2 - 2.0 * u_m * u_n * ph.ds_q3 + u_n * u_n * ph.dt_q3


def _cost_from(theta: Theta, ph: Phases, scn: Scenario, c: Coefficients) -> CostTerms:
    J_u = 0.5 * scn.w_u * control_energy(theta, ph, scn, c)
    J_t = scn.w_t * (theta.dt_q1 + theta.dt_q2 + ph.dt_q3)
    return CostTerms(J_u=J_u, J_t=J_t)


def _gf_from(ph: Phases, scn: Scenario) -> float:
    return scn.distance_to_target - (ph.s_brake + ph.ds_q3)


def direct_cost(theta: Theta, scn: Scenario, c: Coefficients) -> CostTerms:
    return _cost_from(theta, phases(theta, scn, c), scn, c)


def constraint_gf(theta: Theta, scn: Scenario, c: Coefficients) -> float:
    return _gf_from(phases(theta, scn, c), scn)


def constraints_ineq(theta: Theta, scn: Scenario, c: Coefficients) -> np.ndarray:
    """``[g_umax(2), g_umin(2), g_c, dt_q1, dt_q2]``, feasible when all >= 0.

    Only needs the coasting part to be valid, so it also works where the
    braking closed forms are undefined.
    """
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    t_s2 = theta.dt_q1 + theta.dt_q2
    v1 = analytic.coast_velocity(q1, theta.dt_q1)
    s1 = analytic.coast_distance(q1, theta.dt_q1)
    q2 = analytic.coast_phase(Mode.Q2_EngagedCoast, theta.dt_q1, s1, v1, c)
    v2 = analytic.coast_velocity(q2, t_s2)
    u_s2 = theta.law.command(v2)
    u_f = theta.law.command(scn.v_f)
    return np.array([
        -u_s2,
        -u_f,
        u_s2 - scn.u_min,
        u_f - scn.u_min,
        theta.law.discriminant(c),
        theta.dt_q1,
        theta.dt_q2,
    ])


def initial_theta(scn: Scenario, c: Coefficients) -> Theta:
    """Durations of a bracketed extremal, law through its two endpoint commands.

    A constant braking command (u_m = 0, u_n < 0) has no real closed form, so
    the law is fitted to the extremal command at the braking switch and at
    v_f instead. Falls back to the indirect heuristic durations.
    """
    if _beyond_braking_limit(scn, c):
        return _coast_only_theta(scn, c)
    g, two_phase = bracket_guess(scn, c), False
    if g is None and c.a_eng > 0.0:
        # no three-phase extremal at all (tiny speed drops): start from coasting
        coast = _solve_coast_only(scn, c, BRAKING_STEPS)
        if coast is not None:
            return _coast_only_theta(scn, c, coast.times)
    if g is None:
        g, two_phase = bracket_guess(scn, c, two_phase=True), True
    if g is None:
        return _heuristic_theta(scn, c)
    dt1, dt2 = g.t_s1, g.t_s2 - g.t_s1
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    s1, v1 = analytic.coast_end(q1, dt1)
    q2 = analytic.coast_phase(Mode.Q2_EngagedCoast, dt1, s1, v1, c)
    v2 = analytic.coast_velocity(q2, g.t_s2)
    u_start = 0.0 if two_phase else -2.0 * c.a_eng
    u_end = -terminal_lambda_v(-scn.w_t / v1, scn, c) / scn.w_u
    if v2 - scn.v_f < 1e-6:
        return _heuristic_theta(scn, c)
    u_m = (u_end - u_start) / (v2 - scn.v_f)
    u_n = u_start + u_m * v2
    return _widen(Theta(dt1, dt2, u_m, u_n), c)


def _law_through(u: float, v: float, c: Coefficients) -> BrakeLaw:
    """Law commanding ``u`` at speed ``v`` with a comfortably real braking closed form.

    Uses 1.5 times the most negative u_m for which the discriminant would vanish.
    """
    u_m = -1.5 * (2.0 * c.c_air * v + math.sqrt(4.0 * (c.c_air * v) ** 2 + 4.0 * c.c_air * (c.a_alpha - u)))
    return BrakeLaw(u_m, u + u_m * v)


def _coast_only_theta(scn: Scenario, c: Coefficients, g: SwitchTimes | None = None) -> Theta:
    """Coasting durations that hit the target; a law braking at -2 a_eng at v_f."""
    if g is None:
        g = _solve_coast_only(scn, c, BRAKING_STEPS).times
    law = _law_through(max(-2.0 * c.a_eng, 0.9 * scn.u_min), scn.v_f, c)
    return Theta(g.t_s1, g.t_s2 - g.t_s1, law.u_m, law.u_n)


def _widen(theta: Theta, c: Coefficients) -> Theta:
    u_m = theta.u_m
    while BrakeLaw(u_m, theta.u_n).discriminant(c) < 100 * G_C_MARGIN:
        u_m = 2.0 * u_m - 1e-2
    return Theta(theta.dt_q1, theta.dt_q2, u_m, theta.u_n)


def _heuristic_theta(scn: Scenario, c: Coefficients) -> Theta:
    """Default-guess durations with a law through the mean required command."""
    g = default_guess(scn)
    dt1, dt2 = g.t_s1, g.t_s2 - g.t_s1
    dt3 = g.t_f - g.t_s2
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    s1, v1 = analytic.coast_end(q1, dt1)
    q2 = analytic.coast_phase(Mode.Q2_EngagedCoast, dt1, s1, v1, c)
    v2 = analytic.coast_velocity(q2, dt1 + dt2)
    if v2 <= scn.v_f:
        dt2 = 0.0
        v2 = v1
        if v2 <= scn.v_f:
            raise DomainError("default guess coasts below the target speed")
    v_mean = 0.5 * (v2 + scn.v_f)
    u_req = -(v2 - scn.v_f) / dt3 + c.c_air * v_mean ** 2 + c.a_alpha
    law = _law_through(min(max(u_req, 0.9 * scn.u_min), -1e-3), v_mean, c)
    return Theta(dt1, dt2, law.u_m, law.u_n)


@dataclass
class SaturationAudit:
    u_max: float
    u_min: float
    u_endpoints: tuple
    bound_violation: float
    interior_excess: float  # how far the dense grid exceeds the endpoint extrema


@dataclass
class DirectSolution:
    scenario: Scenario
    coefficients: Coefficients
    theta: Theta
    dt_q3: float
    law: BrakeLaw
    cost: CostTerms
    g_f: float
    g_ineq: np.ndarray
    saturation: SaturationAudit
    phases: Phases
    nlp: NlpResult | None = None
    residuals: dict = field(default_factory=dict)

    @property
    def durations(self) -> tuple[float, float, float]:
        return self.theta.dt_q1, self.theta.dt_q2, self.dt_q3

    @property
    def times(self):
        t_s1 = self.theta.dt_q1
        t_s2 = t_s1 + self.theta.dt_q2
        return t_s1, t_s2, t_s2 + self.dt_q3


def audit_saturation(theta: Theta, ph: Phases, scn: Scenario, n: int = 2001) -> SaturationAudit:
    t = ph.brake.t_start + np.linspace(0.0, ph.dt_q3, n)
    u = theta.law.command(np.asarray(analytic.brake_velocity(ph.brake, t)))
    ends = (float(theta.law.command(ph.v_brake)), float(theta.law.command(scn.v_f)))
    hi, lo = float(np.max(u)), float(np.min(u))
    excess = max(0.0, hi - max(ends), min(ends) - lo)
    viol = max(0.0, hi, scn.u_min - lo)
    return SaturationAudit(hi, lo, ends, viol, excess)


def evaluate(theta: Theta, scn: Scenario, c: Coefficients, nlp: NlpResult | None = None
             ) -> DirectSolution:
    # a converged zero-braking plan may start braking a hair below v_f
    ph = phases(theta, scn, c, strict=False)
    if ph.brake is None:
        raise DomainError("braking law has no real equilibrium (g_c < 0)")
    cost = _cost_from(theta, ph, scn, c)
    g_f = _gf_from(ph, scn)
    g_ineq = constraints_ineq(theta, scn, c)
    audit = audit_saturation(theta, ph, scn)
    residuals = {"g_f": g_f}
    residuals.update({name: float(val) for name, val in zip(INEQ_NAMES, g_ineq)})
    residuals[DOMAIN_ROW] = ph.v_brake - scn.v_f
    residuals["saturation_violation"] = audit.bound_violation
    residuals["saturation_interior_excess"] = audit.interior_excess
    if nlp is not None:
        residuals["kkt"] = nlp.kkt_residual
    return DirectSolution(
        scenario=scn, coefficients=c, theta=theta, dt_q3=ph.dt_q3, law=theta.law,
        cost=cost, g_f=g_f, g_ineq=g_ineq, saturation=audit, phases=ph, nlp=nlp,
        residuals=residuals,
    )


def solve_direct(scn: Scenario, cfg: NlpConfig = NlpConfig(), guess: Theta | None = None
                 ) -> DirectSolution:
    c = scn.coefficients
    check_reachable(scn, c)
    x0 = (guess or initial_theta(scn, c)).as_array()
    # g_c lives on a ~1e-2 scale; bring it to m/s^2 like the control rows
    g_c_scale = 1.0 / (4.0 * c.c_air)

    cache = {}

    def both(x):
        key = x.tobytes()
        if key not in cache:
            cache.clear()
            theta = Theta(*x)
            ph = phases(theta, scn, c, strict=False)
            cache[key] = (_cost_from(theta, ph, scn, c).J, _gf_from(ph, scn), ph.v_brake)
        return cache[key]

    def cost(x):
        return both(x)[0]

    def eq(x):
        return np.array([both(x)[1]])

    def ineq(x):
        g = constraints_ineq(Theta(*x), scn, c)
        g[4] = (g[4] - G_C_MARGIN) * g_c_scale
        return np.append(g, both(x)[2] - scn.v_f)

    res = nlp_solve(cost, eq, ineq, x0, cfg)
    return evaluate(Theta(*map(float, res.x)), scn, c, res)
