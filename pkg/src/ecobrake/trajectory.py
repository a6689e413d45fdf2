"""Time-sampled trajectories, forward re-simulation and method comparison."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .direct import DirectSolution
from .indirect import IndirectSolution, _braking_rhs
from .model import Mode
from .numerics import integrate

CSV_HEADER = ("t_s", "mode", "s_m", "v_ms", "a_ms2", "u_ms2", "lambda_v")


@dataclass
class Trajectory:
    t: np.ndarray
    mode: np.ndarray  # "q1" / "q2" / "q3"
    s: np.ndarray
    v: np.ndarray
    a: np.ndarray
    u: np.ndarray
    lambda_v: np.ndarray | None = None  # only the indirect method has a costate

    def __len__(self):
        return self.t.size

    def write_csv(self, path, digits: int = 9) -> None:
        fmt = f"{{:.{digits}g}}"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for i in range(self.t.size):
                lam = "" if self.lambda_v is None else fmt.format(self.lambda_v[i])
                writer.writerow([
                    fmt.format(self.t[i]), self.mode[i], fmt.format(self.s[i]),
                    fmt.format(self.v[i]), fmt.format(self.a[i]), fmt.format(self.u[i]), lam,
                ])


def time_grid(t_f: float, dt: float) -> np.ndarray:
    """``0, dt, 2 dt, ...`` closed with ``t_f`` itself."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    n = int(math.floor(t_f / dt + 1e-9))
    t = dt * np.arange(n + 1)
    if t_f - t[-1] > 1e-9 * max(1.0, t_f):
        t = np.append(t, t_f)
    else:
        t[-1] = t_f
    return t


def _modes(t, t_s1, t_s2, t_f):
    # a phase of zero length gets no rows, including at its boundary
    q3 = (t >= t_s2) & (t_s2 < t_f)
    return np.where(t < t_s1, Mode.Q1_DisengagedCoast.label,
                    np.where(q3, Mode.Q3_Brake.label, Mode.Q2_EngagedCoast.label))


def sample_indirect(sol: IndirectSolution, t) -> Trajectory:
    """Coasting from the closed forms, braking by integrating between samples."""
    scn, c = sol.scenario, sol.coefficients
    t = np.asarray(t, dtype=float)
    t_s1, t_s2, t_f = sol.times.t_s1, sol.times.t_s2, sol.times.t_f
    if sol.two_phase:
        t_s1 = t_s2
    mode = _modes(t, t_s1, t_s2, t_f)
    s = np.empty_like(t)
    v = np.empty_like(t)
    u = np.zeros_like(t)
    lam = np.empty_like(t)
    m1 = mode == "q1"
    m2 = mode == "q2"
    m3 = mode == "q3"
    if m1.any():
        s[m1] = analytic.coast_distance(sol.q1, t[m1])
        v[m1] = analytic.coast_velocity(sol.q1, t[m1])
    if m2.any():
        s[m2] = analytic.coast_distance(sol.q2, t[m2])
        v[m2] = analytic.coast_velocity(sol.q2, t[m2])
        u[m2] = -c.a_eng
    lam[m1 | m2] = np.atleast_1d(_coast_costates(sol, t[m1 | m2]))
    if m3.any():
        duration = t_f - t_s2
        h_max = duration / sol.integ.steps if duration > 0 else 1.0
        rhs = _braking_rhs(1.0, sol.lambda_s, c, scn.w_u)
        z = sol.braking[0].copy()
        t_prev = t_s2
        for i in np.flatnonzero(m3):
            span = t[i] - t_prev
            if span > 0:
                z = integrate(rhs, z, (t_prev, t[i]), max(1, math.ceil(span / h_max - 1e-9)))
                t_prev = t[i]
            s[i], v[i], lam[i] = z
        u[m3] = -lam[m3] / scn.w_u
    a = -c.c_air * v * v - c.a_alpha + u
    return Trajectory(t, mode, s, v, a, u, lam)


def _coast_costates(sol: IndirectSolution, t):
    if t.size == 0:
        return t
    from .indirect import costate_at

    return costate_at(sol, t)


def sample_direct(sol: DirectSolution, t) -> Trajectory:
    c = sol.coefficients
    ph = sol.phases
    t = np.asarray(t, dtype=float)
    t_s1, t_s2, t_f = sol.times
    mode = _modes(t, t_s1, t_s2, t_f)
    s = np.empty_like(t)
    v = np.empty_like(t)
    u = np.zeros_like(t)
    for label, spec in (("q1", ph.q1), ("q2", ph.q2)):
        m = mode == label
        if m.any():
            s[m] = analytic.coast_distance(spec, t[m])
            v[m] = analytic.coast_velocity(spec, t[m])
    m2 = mode == "q2"
    u[m2] = -c.a_eng
    m3 = mode == "q3"
    if m3.any():
        s[m3] = analytic.brake_distance(ph.brake, t[m3])
        v[m3] = analytic.brake_velocity(ph.brake, t[m3])
        u[m3] = sol.law.command(v[m3])
    a = -c.c_air * v * v - c.a_alpha + u
    return Trajectory(t, mode, s, v, a, u, None)


def extract_trajectory(sol, dt: float = 0.01) -> Trajectory:
    if isinstance(sol, IndirectSolution):
        return sample_indirect(sol, time_grid(sol.times.t_f, dt))
    return sample_direct(sol, time_grid(sol.times[2], dt))


def _coast_rhs(c, a_extra):
    def rhs(_t, x):
        return np.array([x[1], -c.c_air * x[1] * x[1] - c.a_alpha - a_extra])
    return rhs


def resimulate(sol, dt: float = 1e-3) -> tuple[float, float]:
    """Integrate the plan from ``(0, v0)`` with plain RK4 and return ``(s, v)`` at t_f.

    Uses no closed form: coasting phases are integrated like any other, and
    the braking command comes from the costate ODE (indirect) or the feedback
    law (direct).
    """
    scn, c = sol.scenario, sol.coefficients
    if isinstance(sol, IndirectSolution):
        t_s1, t_s2, t_f = sol.times.t_s1, sol.times.t_s2, sol.times.t_f
        lam0 = 0.0 if sol.two_phase else 2.0 * scn.w_u * c.a_eng
    else:
        t_s1, t_s2, t_f = sol.times

    def steps(span):
        return max(1, math.ceil(span / dt))

    x = np.array([0.0, scn.v0])
    if t_s1 > 0:
        x = integrate(_coast_rhs(c, 0.0), x, (0.0, t_s1), steps(t_s1))
    if t_s2 > t_s1:
        x = integrate(_coast_rhs(c, c.a_eng), x, (t_s1, t_s2), steps(t_s2 - t_s1))
    if t_f > t_s2:
        if isinstance(sol, IndirectSolution):
            rhs = _braking_rhs(1.0, sol.lambda_s, c, scn.w_u)
            z = integrate(rhs, np.array([x[0], x[1], lam0]), (t_s2, t_f), steps(t_f - t_s2))
            x = z[:2]
        else:
            law = sol.law

            def rhs(_t, y):
                return np.array([y[1], -c.c_air * y[1] * y[1] - c.a_alpha + law.command(y[1])])
            x = integrate(rhs, x, (t_s2, t_f), steps(t_f - t_s2))
    return float(x[0]), float(x[1])


@dataclass
class Comparison:
    d_durations: tuple  # direct minus indirect
    d_cost: float
    max_dv: float


def compare(ind: IndirectSolution, drc: DirectSolution, dt: float = 0.01) -> Comparison:
    """Differences between the two plans on a shared time grid."""
    t_end = min(ind.times.t_f, drc.times[2])
    grid = time_grid(t_end, dt)
    v_i = sample_indirect(ind, grid).v
    v_d = sample_direct(drc, grid).v
    d_dur = tuple(b - a for a, b in zip(ind.durations, drc.durations))
    return Comparison(d_dur, drc.cost.J - ind.cost.J, float(np.max(np.abs(v_i - v_d))))
