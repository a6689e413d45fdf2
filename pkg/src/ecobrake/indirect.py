"""Minimum-principle solution of the three-phase braking problem.

Both coasting phases have closed-form states and costates, so the switching
and final times ``(t_s1, t_s2, t_f)`` fully determine the start of the braking
arc: its state comes from the coasting closed forms, its speed costate is
pinned to ``2 w_u a_eng`` and the (constant) distance costate follows from
``lambda_v(t_s1) = 0``. Shooting the braking state/costate ODE to the end and
matching target distance, target speed and the free-final-time costate value
gives three equations in the three times, solved by Newton.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import CoastPhaseSpec
from .errors import (
    DegenerateTimes,
    Infeasible,
    InfeasibleOrdering,
    NegativeDiscriminant,
    NoConvergence,
    PlanningError,
)
from .model import Coefficients, Mode, Scenario
from .numerics import IntegratorConfig, NewtonConfig, integrate, newton_solve

DEGENERATE_DV = 1e-9
BRAKING_STEPS = IntegratorConfig(500)

# phase structures an indirect plan can take
THREE_PHASE = "q1-q2-q3"
COAST_BRAKE = "q1-q3"
COAST_ONLY = "q1-q2"


@dataclass(frozen=True)
class SwitchTimes:
    t_s1: float
    t_s2: float
    t_f: float

    @property
    def ordered(self) -> bool:
        return 0.0 <= self.t_s1 <= self.t_s2 <= self.t_f

    @property
    def durations(self) -> tuple[float, float, float]:
        return self.t_s1, self.t_s2 - self.t_s1, self.t_f - self.t_s2

    def as_array(self) -> np.ndarray:
        return np.array([self.t_s1, self.t_s2, self.t_f])


@dataclass(frozen=True)
class AugmentedState:
    s: float
    v: float
    lambda_v: float


@dataclass(frozen=True)
class CostTerms:
    J_u: float
    J_t: float

    @property
    def J(self) -> float:
        return self.J_u + self.J_t


@dataclass
class IndirectSolution:
    scenario: Scenario
    coefficients: Coefficients
    times: SwitchTimes
    lambda_s: float
    lambda_v_tf: float
    q1: CoastPhaseSpec
    q2: CoastPhaseSpec | None
    tau: np.ndarray
    braking: np.ndarray  # rows of (s, v, lambda_v) on the tau grid
    cost: CostTerms
    residuals: dict = field(default_factory=dict)
    integ: IntegratorConfig = BRAKING_STEPS
    structure: str = THREE_PHASE

    @property
    def two_phase(self) -> bool:
        return self.structure == COAST_BRAKE

    @property
    def durations(self) -> tuple[float, float, float]:
        return self.times.durations

    @property
    def braking_times(self) -> np.ndarray:
        return self.times.t_s2 + (self.times.t_f - self.times.t_s2) * self.tau


def hamiltonian(mode: Mode, s: float, v: float, lambda_s: float, lambda_v: float,
                u: float, c: Coefficients, w_u: float, w_t: float) -> float:
    running = w_t if mode is not Mode.Q3_Brake else 0.5 * w_u * u * u + w_t
    return lambda_s * v + lambda_v * (-c.c_air * v * v - c.a_alpha + u) + running


def optimal_brake_control(lambda_v, w_u: float):
    return -lambda_v / w_u


def terminal_lambda_v(lambda_s: float, scn: Scenario, c: Coefficients) -> float:
    """Speed costate at t_f implied by H(t_f) = 0 at the target speed."""
    a = scn.w_u * (c.c_air * scn.v_f ** 2 + c.a_alpha)
    disc = a * a + 2.0 * scn.w_u * (scn.w_t + lambda_s * scn.v_f)
    if disc < 0:
        raise NegativeDiscriminant(
            f"terminal costate condition has no real root (w_t + lambda_s v_f = "
            f"{scn.w_t + lambda_s * scn.v_f:.4g})"
        )
    return -a + math.sqrt(disc)


def coast_phases(times: SwitchTimes, scn: Scenario, c: Coefficients):
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    s1, v1 = analytic.coast_end(q1, times.t_s1)
    q2 = analytic.coast_phase(Mode.Q2_EngagedCoast, times.t_s1, s1, v1, c)
    return q1, q2


def lambda_s_of_times(times: SwitchTimes, scn: Scenario, c: Coefficients) -> float:
    """Distance costate that makes the speed costate vanish at t_s1."""
    _, q2 = coast_phases(times, scn, c)
    v1 = q2.v_start
    v2 = analytic.coast_velocity(q2, times.t_s2)
    if abs(v1 - v2) < DEGENERATE_DV:
        raise DegenerateTimes("engaged coasting has zero length; distance costate undefined")
    d2 = c.c_air * v2 * v2 + c.a_alpha + c.a_eng
    return -2.0 * scn.w_u * c.a_eng * d2 / (v1 - v2)


def _braking_rhs(duration, lambda_s, c: Coefficients, w_u: float):
    def rhs(_tau, z):
        v, lam = z[1], z[2]
        return duration * np.array([
            v,
            -c.c_air * v * v - c.a_alpha - lam / w_u,
            -lambda_s + 2.0 * c.c_air * v * lam,
        ])
    return rhs


def _shoot_raw(times: SwitchTimes, scn: Scenario, c: Coefficients, integ: IntegratorConfig,
               dense: bool = False):
    if not times.ordered:
        raise InfeasibleOrdering(f"times out of order: {times}", times)
    q1, q2 = coast_phases(times, scn, c)
    s2, v2 = analytic.coast_end(q2, times.t_s2)
    lambda_s = lambda_s_of_times(times, scn, c)
    z0 = np.array([s2, v2, 2.0 * scn.w_u * c.a_eng])
    rhs = _braking_rhs(times.t_f - times.t_s2, lambda_s, c, scn.w_u)
    out = integrate(rhs, z0, (0.0, 1.0), integ, dense=dense)
    return q1, q2, lambda_s, out


def shoot(times: SwitchTimes, scn: Scenario, c: Coefficients,
          integ: IntegratorConfig = BRAKING_STEPS) -> np.ndarray:
    """Terminal mismatch ``[s - s_f, v - v_f, lambda_v - lambda_v(t_f)]`` in natural units."""
    _, _, lambda_s, zf = _shoot_raw(times, scn, c, integ)
    return np.array([
        zf[0] - scn.distance_to_target,
        zf[1] - scn.v_f,
        zf[2] - terminal_lambda_v(lambda_s, scn, c),
    ])


def residual_scale(scn: Scenario) -> np.ndarray:
    return np.array([scn.distance_to_target, scn.v_f, 1.0])


def default_guess(scn: Scenario) -> SwitchTimes:
    t_f = scn.distance_to_target / (0.5 * (scn.v0 + scn.v_f))
    return SwitchTimes(0.6 * t_f, 0.85 * t_f, t_f)


def coasting_reach(scn: Scenario, c: Coefficients) -> float:
    """Distance covered by disengaged coasting from v0 down to v_f."""
    b1 = math.sqrt(c.a_alpha / c.c_air)
    return math.log(((scn.v0 / b1) ** 2 + 1) / ((scn.v_f / b1) ** 2 + 1)) / (2 * c.c_air)


def check_reachable(scn: Scenario, c: Coefficients) -> None:
    reach = coasting_reach(scn, c)
    if reach < scn.distance_to_target:
        raise Infeasible(
            f"target needs propulsion: coasting alone reaches v_f after {reach:.6g} m "
            f"< {scn.distance_to_target:.6g} m"
        )


def _coast_time(a_eff: float, c: Coefficients, v_from: float, v_to: float) -> float:
    b1 = math.sqrt(a_eff / c.c_air)
    b2 = -math.sqrt(a_eff * c.c_air)
    return (math.atan(v_to / b1) - math.atan(v_from / b1)) / b2


def _coast_span(a_eff: float, c: Coefficients, v_from: float, v_to: float) -> float:
    b1sq = a_eff / c.c_air
    return math.log((v_from ** 2 / b1sq + 1) / (v_to ** 2 / b1sq + 1)) / (2 * c.c_air)


def _brake_until(z0, lambda_s, c: Coefficients, w_u: float, v_f: float, h: float,
                 t_max: float):
    """March the braking arc until the speed hits ``v_f``; ``(duration, distance)``."""
    rhs = _braking_rhs(1.0, lambda_s, c, w_u)
    z = np.array(z0, dtype=float)
    t = 0.0
    if z[1] <= v_f:
        return 0.0, 0.0
    while t < t_max:
        k1 = rhs(t, z)
        k2 = rhs(t, z + 0.5 * h * k1)
        k3 = rhs(t, z + 0.5 * h * k2)
        k4 = rhs(t, z + h * k3)
        nxt = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if nxt[1] <= v_f:
            frac = (z[1] - v_f) / (z[1] - nxt[1])
            return t + frac * h, (z[0] + frac * (nxt[0] - z[0])) - z0[0]
        if nxt[2] < 0 or not np.all(np.isfinite(nxt)):
            return None
        z, t = nxt, t + h
    return None


def _plan_from_switch_speed(v2: float, scn: Scenario, c: Coefficients, two_phase: bool,
                            h: float = 0.01):
    """Times and reached distance of the extremal that starts braking at speed ``v2``.

    Along an extremal the Hamiltonian vanishes identically, which ties the
    speed at the first switch to ``v2`` (equal to it without engaged coasting).
    """
    if two_phase:
        v1, lam0 = v2, 0.0
    else:
        k = 2.0 * scn.w_u * c.a_eng * (c.c_air * v2 * v2 + c.a_alpha + c.a_eng) / scn.w_t
        if k >= 1.0:
            return None
        v1, lam0 = v2 / (1.0 - k), 2.0 * scn.w_u * c.a_eng
    if v1 > scn.v0:
        return None
    a1, a2 = c.a_alpha, c.a_alpha + c.a_eng
    t_s1 = _coast_time(a1, c, scn.v0, v1)
    t_s2 = t_s1 + (0.0 if two_phase else _coast_time(a2, c, v1, v2))
    s2 = _coast_span(a1, c, scn.v0, v1) + (0.0 if two_phase else _coast_span(a2, c, v1, v2))
    t_max = 20.0 * (v2 - scn.v_f) / c.a_alpha + 1.0
    out = _brake_until([s2, v2, lam0], -scn.w_t / v1, c, scn.w_u, scn.v_f, h, t_max)
    if out is None:
        return None
    dt3, ds3 = out
    return SwitchTimes(t_s1, t_s2, t_s2 + dt3), s2 + ds3


def bracket_guess(scn: Scenario, c: Coefficients, two_phase: bool = False,
                  samples: int = 40) -> SwitchTimes | None:
    """Scan the braking-onset speed for a sign change of the distance error, then bisect."""
    v_lo = scn.v_f * (1.0 + 1e-9)
    v_hi = scn.v0
    if not two_phase:
        # the first-switch speed grows with v2; stop where it would exceed v0
        lo, hi = scn.v_f, scn.v0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            k = 2 * scn.w_u * c.a_eng * (c.c_air * mid ** 2 + c.a_alpha + c.a_eng) / scn.w_t
            if k < 1 and mid / (1 - k) <= scn.v0:
                lo = mid
            else:
                hi = mid
        v_hi = lo
    if v_hi <= v_lo:
        return None

    def err(v2):
        plan = _plan_from_switch_speed(v2, scn, c, two_phase)
        return None if plan is None else plan[1] - scn.distance_to_target

    grid = np.linspace(v_lo, v_hi, samples)
    prev_v, prev_e = None, None
    for v2 in grid:
        e = err(v2)
        if e is None:
            prev_v = prev_e = None
            continue
        if prev_e is not None and prev_e * e <= 0:
            lo, hi, e_lo = prev_v, v2, prev_e
            for _ in range(50):
                mid = 0.5 * (lo + hi)
                e_mid = err(mid)
                if e_mid is None:
                    break
                if e_mid * e_lo <= 0:
                    hi = mid
                else:
                    lo, e_lo = mid, e_mid
            return _plan_from_switch_speed(0.5 * (lo + hi), scn, c, two_phase)[0]
        prev_v, prev_e = v2, e
    return None


def solve_indirect(scn: Scenario, newton: NewtonConfig = NewtonConfig(),
                   integ: IntegratorConfig = BRAKING_STEPS,
                   guess: SwitchTimes | None = None) -> IndirectSolution:
    """Solve the three-phase boundary value problem by single shooting.

    Without a caller guess the start point comes from a bracketing scan over
    the braking-onset speed, then the heuristic guess. When no
    three-phase extremal exists the plan degenerates: close to the coasting
    reach, disengaged then engaged coasting meet the target without braking;
    with ``a_eng = 0`` the two-phase coast-then-brake problem is solved.
    """
    c = scn.coefficients
    check_reachable(scn, c)
    scale = residual_scale(scn)

    def scaled(x):
        return shoot(SwitchTimes(*x), scn, c, integ) / scale

    if guess is None and _beyond_braking_limit(scn, c):
        sol = _solve_coast_only(scn, c, integ)
        if sol is not None:
            return sol
    if guess is not None:
        candidates = [guess]
    elif c.a_eng == 0.0:
        candidates = []
    else:
        candidates = [g for g in (bracket_guess(scn, c), default_guess(scn)) if g is not None]
    last_err: PlanningError | None = None
    for g in candidates:
        try:
            x = newton_solve(scaled, g.as_array(), newton)
        except PlanningError as exc:
            last_err = exc
            continue
        times = SwitchTimes(*map(float, x))
        if not times.ordered:
            raise InfeasibleOrdering(f"converged times violate ordering: {times}", times)
        return _assemble(times, scn, c, integ)
    if c.a_eng > 0.0:
        sol = _solve_coast_only(scn, c, integ)
        if sol is not None:
            return sol
    try:
        return _solve_two_phase(scn, c, newton, integ)
    except PlanningError:
        if last_err is not None:
            raise last_err
        raise


def _braking_cost_rhs(duration, lambda_s, c, w_u):
    base = _braking_rhs(duration, lambda_s, c, w_u)

    def rhs(tau, z):
        d = base(tau, z[:3])
        u = -z[2] / w_u
        return np.append(d, duration * 0.5 * w_u * u * u)
    return rhs


def _assemble(times: SwitchTimes, scn: Scenario, c: Coefficients, integ: IntegratorConfig,
              lambda_s: float | None = None, two_phase: bool = False) -> IndirectSolution:
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    if two_phase:
        q2 = None
        s2, v2 = analytic.coast_end(q1, times.t_s2)
        lam2 = 0.0
    else:
        _, q2 = coast_phases(times, scn, c)
        s2, v2 = analytic.coast_end(q2, times.t_s2)
        lambda_s = lambda_s_of_times(times, scn, c)
        lam2 = 2.0 * scn.w_u * c.a_eng
    duration = times.t_f - times.t_s2
    rhs = _braking_cost_rhs(duration, lambda_s, c, scn.w_u)
    tau, z = integrate(rhs, np.array([s2, v2, lam2, 0.0]), (0.0, 1.0), integ, dense=True)
    lam_tf = terminal_lambda_v(lambda_s, scn, c)
    cost = CostTerms(J_u=float(z[-1, 3]), J_t=scn.w_t * times.t_f)
    sol = IndirectSolution(
        scenario=scn, coefficients=c, times=times, lambda_s=lambda_s, lambda_v_tf=lam_tf,
        q1=q1, q2=q2, tau=tau, braking=z[:, :3], cost=cost, integ=integ,
        structure=COAST_BRAKE if two_phase else THREE_PHASE,
    )
    sol.residuals = optimality_residuals(sol)
    return sol


def costate_at(sol: IndirectSolution, t):
    """Speed costate on the coasting phases from the closed forms."""
    t = np.asarray(t, dtype=float)
    scn, c, times = sol.scenario, sol.coefficients, sol.times
    lam = np.empty_like(t)
    t_q1_end = times.t_s2 if sol.two_phase else times.t_s1
    in_q1 = t < t_q1_end
    if np.any(in_q1):
        lam[in_q1] = analytic.coast_costate(sol.q1, sol.lambda_s, t_q1_end, 0.0, t[in_q1])
    if sol.q2 is not None and np.any(~in_q1):
        if sol.structure == COAST_ONLY:
            anchor = (times.t_s1, 0.0)
        else:
            anchor = (times.t_s2, 2.0 * scn.w_u * c.a_eng)
        lam[~in_q1] = analytic.coast_costate(sol.q2, sol.lambda_s, *anchor, t[~in_q1])
    return lam if lam.ndim else float(lam)


def optimality_residuals(sol: IndirectSolution) -> dict:
    """Recompute every necessary condition at the solution."""
    scn, c, times = sol.scenario, sol.coefficients, sol.times
    w_u, w_t, ls = scn.w_u, scn.w_t, sol.lambda_s
    out = {}
    s_end, v_end, lam_end = sol.braking[-1]
    out["terminal_s"] = float(s_end - scn.distance_to_target)
    out["terminal_v"] = float(v_end - scn.v_f)
    out["terminal_lambda_v"] = float(lam_end - sol.lambda_v_tf)
    if sol.structure == COAST_ONLY:
        out["H_tf"] = hamiltonian(Mode.Q2_EngagedCoast, s_end, v_end, ls, lam_end, -c.a_eng,
                                  c, w_u, w_t)
    else:
        u_tf = optimal_brake_control(lam_end, w_u)
        out["H_tf"] = hamiltonian(Mode.Q3_Brake, s_end, v_end, ls, lam_end, u_tf, c, w_u, w_t)

    if sol.structure == COAST_ONLY:
        return _coast_only_residuals(sol, out)
    s2, v2, lam2 = sol.braking[0]
    u_s2 = optimal_brake_control(lam2, w_u)
    if sol.two_phase:
        lam_before = analytic.coast_costate(sol.q1, ls, times.t_s2, 0.0, times.t_s2)
        out["lambda_v_ts1"] = float(lam_before)
        h_minus = hamiltonian(Mode.Q1_DisengagedCoast, s2, v2, ls, lam_before, 0.0, c, w_u, w_t)
        out["H_jump_ts1"] = 0.0
    else:
        v1 = sol.q2.v_start
        s1 = sol.q2.s_start
        lam1_q2 = analytic.coast_costate(sol.q2, ls, times.t_s2, 2 * w_u * c.a_eng, times.t_s1)
        lam1_q1 = analytic.coast_costate(sol.q1, ls, times.t_s1, 0.0, times.t_s1)
        out["lambda_v_ts1"] = float(lam1_q2)
        h1_minus = hamiltonian(Mode.Q1_DisengagedCoast, s1, v1, ls, lam1_q1, 0.0, c, w_u, w_t)
        h1_plus = hamiltonian(Mode.Q2_EngagedCoast, s1, v1, ls, lam1_q2, -c.a_eng, c, w_u, w_t)
        out["H_jump_ts1"] = h1_plus - h1_minus
        lam_before = analytic.coast_costate(sol.q2, ls, times.t_s2, 2 * w_u * c.a_eng, times.t_s2)
        h_minus = hamiltonian(Mode.Q2_EngagedCoast, s2, v2, ls, lam_before, -c.a_eng, c, w_u, w_t)
        out["lambda_v_ts2"] = float(lam2 - 2.0 * w_u * c.a_eng)
        out["u_ts2_plus_2aeng"] = float(u_s2 + 2.0 * c.a_eng)
    h_plus = hamiltonian(Mode.Q3_Brake, s2, v2, ls, lam2, u_s2, c, w_u, w_t)
    out["H_jump_ts2"] = h_plus - h_minus
    u_brake = optimal_brake_control(sol.braking[:, 2], w_u)
    out["u_max"] = float(np.max(u_brake))
    out["u_min"] = float(np.min(u_brake))
    out["u_min_violation"] = float(max(0.0, scn.u_min - np.min(u_brake)))
    out["lambda_v_min_braking"] = float(np.min(sol.braking[1:, 2])) if len(sol.braking) > 1 else float(lam2)
    return out


def _solve_two_phase(scn: Scenario, c: Coefficients, newton: NewtonConfig,
                     integ: IntegratorConfig) -> IndirectSolution:
    """Disengaged coasting followed directly by braking (no engaged coasting).

    Unknowns are the single switch, the final time and the distance costate;
    the speed costate starts from zero at the switch.
    """
    q1 = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, scn.v0, c)
    scale = residual_scale(scn)

    def residual(x):
        t_s, t_f, lambda_s = x
        if not 0.0 <= t_s <= t_f:
            raise InfeasibleOrdering("two-phase times out of order")
        s2, v2 = analytic.coast_end(q1, t_s)
        rhs = _braking_rhs(t_f - t_s, lambda_s, c, scn.w_u)
        zf = integrate(rhs, np.array([s2, v2, 0.0]), (0.0, 1.0), integ)
        r = np.array([
            zf[0] - scn.distance_to_target,
            zf[1] - scn.v_f,
            zf[2] - terminal_lambda_v(lambda_s, scn, c),
        ])
        return r / scale

    g = bracket_guess(scn, c, two_phase=True)
    if g is None:
        raise DegenerateTimes("no coast-then-brake extremal brackets the target distance")
    v_s = analytic.coast_velocity(q1, g.t_s2)
    x = newton_solve(residual, [g.t_s2, g.t_f, -scn.w_t / v_s], newton)
    times = SwitchTimes(float(x[0]), float(x[0]), float(x[1]))
    if not times.ordered:
        raise InfeasibleOrdering(f"converged times violate ordering: {times}", times)
    return _assemble(times, scn, c, integ, lambda_s=float(x[2]), two_phase=True)


def _coast_only_residuals(sol: IndirectSolution, out: dict) -> dict:
    scn, c, times = sol.scenario, sol.coefficients, sol.times
    w_u, w_t, ls = scn.w_u, scn.w_t, sol.lambda_s
    s1, v1 = sol.q2.s_start, sol.q2.v_start
    lam1_q1 = analytic.coast_costate(sol.q1, ls, times.t_s1, 0.0, times.t_s1)
    out["lambda_v_ts1"] = float(lam1_q1)
    h1_minus = hamiltonian(Mode.Q1_DisengagedCoast, s1, v1, ls, lam1_q1, 0.0, c, w_u, w_t)
    h1_plus = hamiltonian(Mode.Q2_EngagedCoast, s1, v1, ls, 0.0, -c.a_eng, c, w_u, w_t)
    out["H_jump_ts1"] = h1_plus - h1_minus
    out["u_max"] = 0.0
    out["u_min"] = 0.0
    out["u_min_violation"] = 0.0
    return out


def _beyond_braking_limit(scn: Scenario, c: Coefficients) -> bool:
    """True when even a zero-length braking phase would overshoot the target.

    At the limit of the three-phase family braking starts at v_f, and H = 0
    fixes the first-switch speed; longer distances only fit coasting plans.
    """
    if c.a_eng <= 0.0:
        return False
    k = 2.0 * scn.w_u * c.a_eng * (c.c_air * scn.v_f ** 2 + c.a_alpha + c.a_eng) / scn.w_t
    if k >= 1.0:
        return False
    v1 = scn.v_f / (1.0 - k)
    if v1 > scn.v0:
        return False
    limit = (_coast_span(c.a_alpha, c, scn.v0, v1)
             + _coast_span(c.a_alpha + c.a_eng, c, v1, scn.v_f))
    return scn.distance_to_target >= limit


def _solve_coast_only(scn: Scenario, c: Coefficients, integ: IntegratorConfig
                      ) -> IndirectSolution | None:
    """Disengaged then engaged coasting landing exactly on the target, if possible.

    The switch speed follows from the distance alone (bisection on closed
    forms); the distance costate from ``lambda_v(t_s1) = 0`` with ``H = 0``.
    """
    a1, a2 = c.a_alpha, c.a_alpha + c.a_eng

    def reach(v1):
        return _coast_span(a1, c, scn.v0, v1) + _coast_span(a2, c, v1, scn.v_f)

    d = scn.distance_to_target
    lo, hi = scn.v_f, scn.v0
    if not reach(hi) <= d <= reach(lo):
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if reach(mid) > d:
            lo = mid
        else:
            hi = mid
    v1 = 0.5 * (lo + hi)
    t_s1 = _coast_time(a1, c, scn.v0, v1)
    t_f = t_s1 + _coast_time(a2, c, v1, scn.v_f)
    times = SwitchTimes(t_s1, t_f, t_f)
    q1, q2 = coast_phases(times, scn, c)
    lambda_s = -scn.w_t / v1
    s_f, v_f = analytic.coast_end(q2, t_f)
    lam_f = analytic.coast_costate(q2, lambda_s, t_s1, 0.0, t_f)
    sol = IndirectSolution(
        scenario=scn, coefficients=c, times=times, lambda_s=lambda_s, lambda_v_tf=lam_f,
        q1=q1, q2=q2, tau=np.zeros(1), braking=np.array([[s_f, v_f, lam_f]]),
        cost=CostTerms(J_u=0.0, J_t=scn.w_t * t_f), integ=integ, structure=COAST_ONLY,
    )
    sol.residuals = optimality_residuals(sol)
    return sol
