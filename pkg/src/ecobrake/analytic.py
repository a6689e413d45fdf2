"""Closed-form phase solutions.

Coasting (both modes) has constant deceleration terms only, which makes the
speed ODE a Riccati equation with a tangent solution. Braking under the affine
feedback law ``u = -u_m * v + u_n`` is again Riccati, now with real roots, and
integrates to exponentials. The distance costate of the coasting phases is
obtained by variation of constants on the costate ODE.

All evaluators accept scalars or numpy arrays for the time / speed argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, DomainError, VelocityUnderflow
from .model import Coefficients, Mode

BRANCH_EPS = 1e-9


@dataclass(frozen=True)
class CoastPhaseSpec:
    mode: Mode
    t_start: float
    s_start: float
    v_start: float
    b1: float  # m/s
    b2: float  # 1/s
    c_air: float
    a_eff: float

    def __post_init__(self):
        if self.mode not in (Mode.Q1_DisengagedCoast, Mode.Q2_EngagedCoast):
            raise ValueError("coasting spec needs mode Q1 or Q2")
        if not self.v_start > 0:
            raise VelocityUnderflow(f"coasting phase starts at v = {self.v_start!r}")


def coast_phase(mode: Mode, t_start: float, s_start: float, v_start: float,
                c: Coefficients) -> CoastPhaseSpec:
    a_eff = c.a_eff(mode)
    return CoastPhaseSpec(
        mode=mode,
        t_start=float(t_start),
        s_start=float(s_start),
        v_start=float(v_start),
        b1=math.sqrt(a_eff / c.c_air),
        b2=-math.sqrt(a_eff * c.c_air),
        c_air=c.c_air,
        a_eff=a_eff,
    )


def _tan_argument(spec: CoastPhaseSpec, t):
    arg = spec.b2 * (np.asarray(t, dtype=float) - spec.t_start) + math.atan(spec.v_start / spec.b1)
    if np.ndim(arg) == 0:
        arg = float(arg)
        lo, hi = arg, arg
    elif arg.size == 0:
        return arg
    else:
        lo, hi = np.min(arg), np.max(arg)
    if lo <= 0.0:
        raise VelocityUnderflow(
            f"{spec.mode.name}: vehicle comes to rest before the requested time"
        )
    if hi >= math.pi / 2 - BRANCH_EPS:
        raise VelocityUnderflow(f"{spec.mode.name}: time lies outside the valid tangent branch")
    return arg


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def coast_velocity(spec: CoastPhaseSpec, t):
    return _scalar(spec.b1 * np.tan(_tan_argument(spec, t)))


def coast_distance(spec: CoastPhaseSpec, t):
    v = np.asarray(coast_velocity(spec, t))
    num = (spec.v_start / spec.b1) ** 2 + 1.0
    den = (v / spec.b1) ** 2 + 1.0
    return _scalar(spec.s_start + np.log(num / den) / (2.0 * spec.c_air))


def coast_end(spec: CoastPhaseSpec, t_end: float) -> tuple[float, float]:
    """State ``(s, v)`` at ``t_end``."""
    return coast_distance(spec, t_end), coast_velocity(spec, t_end)


def _coast_denominator(spec: CoastPhaseSpec, v):
    return spec.c_air * v * v + spec.a_eff


def coast_costate(spec: CoastPhaseSpec, lambda_s: float, t_anchor: float,
                  lambda_anchor: float, t):
    """Speed costate in a coasting phase, pinned to ``lambda_anchor`` at ``t_anchor``.

    The anchor is the phase's terminal switch: t_s2 for engaged coasting and
    t_s1 for disengaged coasting.
    """
    v = np.asarray(coast_velocity(spec, t))
    v_a = coast_velocity(spec, t_anchor)
    d = _coast_denominator(spec, v)
    d_a = _coast_denominator(spec, v_a)
    return _scalar(lambda_s * (v - v_a) / d + lambda_anchor * d_a / d)


@dataclass(frozen=True)
class BrakeLaw:
    """Affine speed feedback ``u = -u_m * v + u_n``."""

    u_m: float  # 1/s
    u_n: float  # m/s^2

    def command(self, v):
        return -self.u_m * v + self.u_n

    def discriminant(self, c: Coefficients) -> float:
        return self.u_m * self.u_m - 4.0 * c.c_air * (c.a_alpha - self.u_n)


@dataclass(frozen=True)
class BrakePhaseSpec:
    law: BrakeLaw
    t_start: float
    s_start: float
    v_start: float
    b1: float
    b2: float
    c_air: float
    a_alpha: float


def _plus_b1(x, b1, gap):
    """``x + b1`` given ``gap = x**2 - b1**2``, free of cancellation for ``x < 0``."""
    if np.ndim(x) == 0:
        x = float(x)
        return x + b1 if x >= 0.0 else float(gap) / (x - b1)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _scalar(np.where(x >= 0.0, x + b1, gap / (x - b1)))


def _minus_b1(x, b1, gap):
    """``x - b1`` given ``gap = x**2 - b1**2``, free of cancellation for ``x > 0``."""
    if np.ndim(x) == 0:
        x = float(x)
        return x - b1 if x <= 0.0 else float(gap) / (x + b1)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _scalar(np.where(x <= 0.0, x - b1, gap / (x + b1)))


def _lead_gap(law: BrakeLaw, c_air: float, a_alpha: float, v):
    # (2 c v + u_m)^2 - b1^2 = 4 c (c v^2 + u_m v + a_alpha - u_n)
    v = np.asarray(v, dtype=float)
    return 4.0 * c_air * (c_air * v * v + law.u_m * v + a_alpha - law.u_n)


def brake_phase(law: BrakeLaw, t_start: float, s_start: float, v_start: float,
                c: Coefficients) -> BrakePhaseSpec:
    disc = law.discriminant(c)
    if not disc > 0:
        raise DomainError(f"braking law has non-positive discriminant {disc:.3g}")
    b1 = math.sqrt(disc)
    lead = 2.0 * c.c_air * v_start + law.u_m
    gap = float(_lead_gap(law, c.c_air, c.a_alpha, v_start))
    den = float(_plus_b1(lead, b1, gap))
    if den == 0.0:
        raise DegenerateDenominator("braking phase starts on the lower equilibrium speed")
    b2 = float(_minus_b1(lead, b1, gap)) / den
    return BrakePhaseSpec(
        law=law,
        t_start=float(t_start),
        s_start=float(s_start),
        v_start=float(v_start),
        b1=b1,
        b2=b2,
        c_air=c.c_air,
        a_alpha=c.a_alpha,
    )


def _brake_exp(spec: BrakePhaseSpec, t):
    e = np.exp(-spec.b1 * (np.asarray(t, dtype=float) - spec.t_start))
    den = 1.0 - spec.b2 * e
    if np.any(den == 0.0):
        raise DegenerateDenominator("braking closed form denominator vanished")
    return e, den


def brake_velocity(spec: BrakePhaseSpec, t):
    u_m, b1, b2 = spec.law.u_m, spec.b1, spec.b2
    e, den = _brake_exp(spec, t)
    gap = _law_gap(spec)
    v = (_plus_b1(u_m, b1, gap) * b2 * e - _minus_b1(u_m, b1, gap)) / (2.0 * spec.c_air * den)
    return _scalar(v)


def brake_distance(spec: BrakePhaseSpec, t):
    u_m, b1, b2 = spec.law.u_m, spec.b1, spec.b2
    e, den = _brake_exp(spec, t)
    ratio = den / (1.0 - b2)
    if np.any(ratio <= 0.0):
        raise DomainError("braking distance log argument is not positive")
    tau = np.asarray(t, dtype=float) - spec.t_start
    s = spec.s_start - _minus_b1(u_m, b1, _law_gap(spec)) / (2.0 * spec.c_air) * tau + np.log(ratio) / spec.c_air
    return _scalar(s)


def _law_gap(spec: BrakePhaseSpec) -> float:
    # u_m^2 - b1^2
    return 4.0 * spec.c_air * (spec.a_alpha - spec.law.u_n)


def _lead_antiderivative(lead, gap, disc: float):
    """``A(L)`` with ``A' = -1 / (L^2 - disc)``, for leads of one sign and any sign of disc.

    For disc > 0 this is ``atanh(b1 / L) / b1``; it continues to
    ``atan(beta / L) / beta`` for disc = -beta^2, and both meet ``1 / L`` at disc = 0.
    """
    lead = np.asarray(lead, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        z = disc / (lead * lead)
        series = (1.0 + z * (1.0 / 3 + z * (1.0 / 5 + z * (1.0 / 7 + z / 9)))) / lead
        if disc > 0.0:
            b = math.sqrt(disc)
            near = np.arctanh(np.clip(b / lead, -0.5, 0.5)) / b
            # cancellation-free log((L - b) / (L + b)) near the equilibrium
            far = -0.5 * np.log(_minus_b1(lead, b, gap) / _plus_b1(lead, b, gap)) / b
            out = np.where(np.abs(z) < 1e-3, series, np.where(z < 0.25, near, far))
        elif disc < 0.0:
            beta = math.sqrt(-disc)
            out = np.where(np.abs(z) < 1e-3, series, np.arctan(beta / lead) / beta)
        else:
            out = 1.0 / lead
    return out


def brake_span(law: BrakeLaw, c_air: float, a_alpha: float, v_start: float, v_end):
    """Duration and distance of braking from ``v_start`` to ``v_end``: ``(dt, ds)``.

    Space-domain closed form. Unlike :func:`brake_phase` it accepts any sign of
    the discriminant (analytic continuation), which keeps the direct NLP smooth
    across the double-root boundary.
    """
    v_end = np.asarray(v_end, dtype=float)
    disc = law.u_m * law.u_m - 4.0 * c_air * (a_alpha - law.u_n)
    lead0 = 2.0 * c_air * v_start + law.u_m
    lead = 2.0 * c_air * v_end + law.u_m
    gap0 = _lead_gap(law, c_air, a_alpha, v_start)
    gap = _lead_gap(law, c_air, a_alpha, v_end)
    # gap = 4 c p(v) with dv/dt = -p(v); braking needs p > 0 at both ends
    if gap0 <= 0.0 or np.any(gap <= 0.0):
        raise DomainError("speed lies beyond an equilibrium of the braking law")
    same = lead * lead0 > 0.0
    if disc >= 0.0 and not np.all(same):
        raise DomainError("speed lies beyond an equilibrium of the braking law")
    diff = _lead_antiderivative(lead, gap, disc) - _lead_antiderivative(lead0, gap0, disc)
    if disc < 0.0 and not np.all(same):
        beta = math.sqrt(-disc)
        cont = (math.atan(lead0 / beta) - np.arctan(lead / beta)) / beta
        diff = np.where(same, diff, cont)
    dt = 2.0 * diff
    ds = np.log(gap0 / gap) / (2.0 * c_air) - law.u_m / c_air * diff
    return _scalar(dt), _scalar(ds)


def brake_distance_of_velocity(spec: BrakePhaseSpec, v):
    """Distance at which braking reaches speed ``v`` (space-domain closed form)."""
    _, ds = brake_span(spec.law, spec.c_air, spec.a_alpha, spec.v_start, v)
    return _scalar(spec.s_start + ds)


def brake_duration(spec: BrakePhaseSpec, v_end):
    """Time needed to brake from ``v_start`` down to ``v_end``."""
    return brake_span(spec.law, spec.c_air, spec.a_alpha, spec.v_start, v_end)[0]
