"""Randomized valid phase specs and a batched RK4 oracle for them.

Each case carries one coasting phase (with a costate anchor) and one braking
phase. All cases are integrated together: one vectorized RK4 run with 10^4
steps over a normalized time axis keeps 200 cases well inside a second.
"""

import math
from dataclasses import dataclass

import numpy as np

from ecobrake import analytic
from ecobrake.errors import PlanningError
from ecobrake.model import Coefficients, Mode


@dataclass
class Case:
    coast: analytic.CoastPhaseSpec
    t_coast: float  # coasting horizon, also the costate anchor
    lambda_s: float
    lambda_anchor: float
    brake: analytic.BrakePhaseSpec
    t_brake: float


def random_case(rng: np.random.Generator) -> Case | None:
    c = Coefficients(rng.uniform(0.5e-4, 3e-4), rng.uniform(0.1, 1.0), rng.uniform(0.0, 1.0))
    mode = Mode.Q1_DisengagedCoast if rng.random() < 0.5 else Mode.Q2_EngagedCoast
    v0 = rng.uniform(5.0, 60.0)
    coast = analytic.coast_phase(mode, rng.uniform(0, 5), rng.uniform(0, 100), v0, c)
    t_stop = math.atan(v0 / coast.b1) / -coast.b2
    t_coast = rng.uniform(0.05, 0.9) * min(t_stop, 30.0)

    u_n = rng.uniform(-8.0, 0.0)
    u_m = rng.choice([-1.0, 1.0]) * math.sqrt(4 * c.c_air * (c.a_alpha - u_n) + rng.uniform(1e-6, 0.05))
    law = analytic.BrakeLaw(u_m, u_n)
    vb = rng.uniform(5.0, 60.0)
    try:
        brake = analytic.brake_phase(law, rng.uniform(0, 20), rng.uniform(0, 500), vb, c)
        t_brake = analytic.brake_duration(brake, rng.uniform(0.3, 0.95) * vb)
    except PlanningError:
        return None
    if not 0.05 < t_brake < 30.0:
        return None
    return Case(coast, t_coast, rng.uniform(-0.1, 0.0), rng.uniform(0.0, 0.2), brake, t_brake)


def random_cases(n: int, seed: int) -> list[Case]:
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        case = random_case(rng)
        if case is not None:
            out.append(case)
    return out


def integrate_cases(cases, steps: int = 10_000):
    """RK4 reference values for every case.

    Returns dict of arrays: coast (s, v) at t_coast, coast costate at t_start
    (integrated backwards from the anchor), brake (s, v) at t_brake.
    """
    ca = np.array([k.coast.c_air for k in cases])
    ae = np.array([k.coast.a_eff for k in cases])
    tc = np.array([k.t_coast for k in cases])
    ls = np.array([k.lambda_s for k in cases])
    cb = np.array([k.brake.c_air for k in cases])
    ab = np.array([k.brake.a_alpha for k in cases])
    um = np.array([k.brake.law.u_m for k in cases])
    un = np.array([k.brake.law.u_n for k in cases])
    tb = np.array([k.t_brake for k in cases])

    # time normalized to tau in [0, 1]; rows: coast s, v, brake s, v
    def fwd(x):
        s, v, sb, vb = x
        return np.array([
            tc * v, tc * (-ca * v * v - ae),
            tb * vb, tb * (-cb * vb * vb - ab - um * vb + un),
        ])

    x0 = np.array([
        [k.coast.s_start for k in cases], [k.coast.v_start for k in cases],
        [k.brake.s_start for k in cases], [k.brake.v_start for k in cases],
    ])
    xf = _rk4(fwd, x0, steps)

    # costate backwards from the anchor: dlam/dt = -lambda_s + 2 c v lam
    def bwd(y):
        v, lam = y
        return -tc * np.array([-ca * v * v - ae, -ls + 2 * ca * v * lam])

    y0 = np.array([xf[1], [k.lambda_anchor for k in cases]])
    yb = _rk4(bwd, y0, steps)
    return {"coast_s": xf[0], "coast_v": xf[1], "costate0": yb[1],
            "brake_s": xf[2], "brake_v": xf[3]}


def _rk4(f, x, steps):
    h = 1.0 / steps
    for _ in range(steps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def closed_form_errors(cases, ref) -> dict:
    """Max absolute closed-form minus oracle error per quantity."""
    err = {"v": 0.0, "s": 0.0, "lambda_v": 0.0}
    for i, k in enumerate(cases):
        t1 = k.coast.t_start + k.t_coast
        err["v"] = max(err["v"], abs(analytic.coast_velocity(k.coast, t1) - ref["coast_v"][i]))
        err["s"] = max(err["s"], abs(analytic.coast_distance(k.coast, t1) - ref["coast_s"][i]))
        lam0 = analytic.coast_costate(k.coast, k.lambda_s, t1, k.lambda_anchor, k.coast.t_start)
        err["lambda_v"] = max(err["lambda_v"], abs(lam0 - ref["costate0"][i]))

        t2 = k.brake.t_start + k.t_brake
        vb = ref["brake_v"][i]
        err["v"] = max(err["v"], abs(analytic.brake_velocity(k.brake, t2) - vb))
        err["s"] = max(err["s"], abs(analytic.brake_distance(k.brake, t2) - ref["brake_s"][i]))
        err["s"] = max(err["s"], abs(analytic.brake_distance_of_velocity(k.brake, vb) - ref["brake_s"][i]))
        # duration to the oracle speed, mapped back through the speed slope
        dt = analytic.brake_duration(k.brake, vb) - k.t_brake
        accel = -k.brake.c_air * vb * vb - k.brake.a_alpha + k.brake.law.command(vb)
        err["v"] = max(err["v"], abs(dt * accel))
    return err
