"""Small dense numerical kernels: RK4, damped Newton, augmented Lagrangian."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    Infeasible,
    NoConvergence,
    NonFiniteState,
    PlanningError,
    SingularJacobian,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntegratorConfig:
    steps: int = 2000

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


@dataclass(frozen=True)
class NewtonConfig:
    tol_residual: float = 1e-11
    max_iters: int = 50
    fd_step: float = 1e-6
    damping: float = 0.5

    def __post_init__(self):
        if not self.tol_residual > 0:
            raise ValueError("tol_residual must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not 0 < self.damping < 1:
            raise ValueError("damping must lie in (0, 1)")


@dataclass(frozen=True)
class NlpConfig:
    tol_kkt: float = 1e-5
    tol_constraint: float = 1e-7
    max_outer: int = 60
    penalty_growth: float = 10.0
    penalty_init: float = 100.0
    penalty_max: float = 1e8
    max_inner: int = 100
    fd_step: float = 1e-5
    active_tol: float = 1e-6

    def __post_init__(self):
        for name in ("tol_kkt", "tol_constraint", "max_outer", "penalty_init", "max_inner"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.penalty_growth > 1:
            raise ValueError("penalty_growth must be > 1")


def integrate(rhs: Callable, x0, t_span, cfg: IntegratorConfig | int = IntegratorConfig(),
              dense: bool = False):
    """Classical fixed-step RK4 for ``x' = rhs(t, x)``.

    Returns the state at ``t_span[1]``, or ``(t_grid, states)`` with
    ``dense=True`` (``states`` has one row per grid point).
    """
    steps = cfg if isinstance(cfg, int) else cfg.steps
    if steps < 1:
        raise ValueError("steps must be >= 1")
    t0, t1 = float(t_span[0]), float(t_span[1])
    if t1 < t0:
        raise ValueError("t_span must be ordered")
    h = (t1 - t0) / steps
    x = np.array(x0, dtype=float)
    if not np.all(np.isfinite(x)):
        raise NonFiniteState("initial state is not finite")
    ts = t0 + h * np.arange(steps + 1)
    ts[-1] = t1
    out = np.empty((steps + 1,) + x.shape) if dense else None
    if dense:
        out[0] = x

    def f(t, y):
        d = np.asarray(rhs(t, y), dtype=float)
        if not np.all(np.isfinite(d)):
            raise NonFiniteState(f"non-finite derivative at t = {t:.6g}")
        return d

    for k in range(steps):
        t = ts[k]
        k1 = f(t, x)
        k2 = f(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = f(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if dense:
            out[k + 1] = x
    if dense:
        return ts, out
    return x


def _safe_eval(fun, x):
    try:
        val = np.atleast_1d(np.asarray(fun(x), dtype=float))
    except (PlanningError, FloatingPointError, ValueError, ZeroDivisionError):
        return None
    if not np.all(np.isfinite(val)):
        return None
    return val


def fd_jacobian(fun, x, f0=None, rel_step=1e-6):
    """Central-difference Jacobian; falls back to one-sided steps off-domain."""
    x = np.asarray(x, dtype=float)
    if f0 is None:
        f0 = np.atleast_1d(np.asarray(fun(x), dtype=float))
    jac = np.empty((f0.size, x.size))
    for i in range(x.size):
        h = rel_step * max(abs(x[i]), 1.0)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fp = _safe_eval(fun, xp)
        fm = _safe_eval(fun, xm)
        if fp is not None and fm is not None:
            jac[:, i] = (fp - fm) / (2 * h)
        elif fp is not None:
            jac[:, i] = (fp - f0) / h
        elif fm is not None:
            jac[:, i] = (f0 - fm) / h
        else:
            raise SingularJacobian(f"residual undefined around coordinate {i}")
    return jac


def newton_solve(residual: Callable, x0, cfg: NewtonConfig = NewtonConfig()) -> np.ndarray:
    """Damped Newton iteration driving ``residual(x)`` to zero.

    Jacobians by central differences, backtracking on the residual 2-norm.
    Points where ``residual`` raises a planning error count as infinitely bad,
    so the line search backs away from them.
    """
    x = np.array(x0, dtype=float)
    r = _safe_eval(residual, x)
    if r is None:
        raise NoConvergence("residual undefined at the initial guess", best=x)
    best_x, best_norm = x.copy(), np.max(np.abs(r))
    for it in range(cfg.max_iters):
        norm_inf = np.max(np.abs(r))
        if norm_inf < cfg.tol_residual:
            return x
        jac = fd_jacobian(residual, x, r, cfg.fd_step)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(str(exc)) from exc
        if not np.all(np.isfinite(step)):
            raise SingularJacobian("Newton step is not finite")
        norm2 = np.linalg.norm(r)
        alpha = 1.0
        for _ in range(40):
            trial = x + alpha * step
            r_trial = _safe_eval(residual, trial)
            if r_trial is not None and np.linalg.norm(r_trial) < (1 - 1e-4 * alpha) * norm2:
                break
            alpha *= cfg.damping
        else:
            # no descent: accept only if it is at least defined and not worse
            if r_trial is None or np.linalg.norm(r_trial) >= norm2:
                break
        x, r = trial, r_trial
        log.debug("newton iter %d: |r|_inf=%.3e alpha=%.3g", it, np.max(np.abs(r)), alpha)
        if np.max(np.abs(r)) < best_norm:
            best_x, best_norm = x.copy(), np.max(np.abs(r))
    if np.max(np.abs(r)) < cfg.tol_residual:
        return x
    raise NoConvergence(
        f"Newton stalled with |residual|_inf = {best_norm:.3e} after {cfg.max_iters} iterations",
        best=best_x,
    )


@dataclass
class NlpResult:
    x: np.ndarray
    eq_multipliers: np.ndarray
    ineq_multipliers: np.ndarray
    cost: float
    eq_violation: float
    ineq_violation: float
    kkt_residual: float
    outer_iterations: int
    history: list = field(default_factory=list)


class _Stacked:
    """Evaluates ``[f, h..., g...]`` once per point; remembers the last point."""

    def __init__(self, cost, eq, ineq, m, p):
        self.cost, self.eq, self.ineq = cost, eq, ineq
        self.m, self.p = m, p
        self._key = None
        self._val = None

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key != self._key:
            f = float(self.cost(x))
            h = np.atleast_1d(np.asarray(self.eq(x), dtype=float)) if self.m else np.empty(0)
            g = np.atleast_1d(np.asarray(self.ineq(x), dtype=float)) if self.p else np.empty(0)
            self._val = np.concatenate(([f], h, g))
            self._key = key
        return self._val

    def split(self, vec):
        return vec[0], vec[1:1 + self.m], vec[1 + self.m:]


def _merit(parts, x, mu, nu, rho):
    vec = _safe_eval(parts, x)
    if vec is None:
        return np.inf
    f, h, g = parts.split(vec)
    shifted = np.maximum(0.0, nu - rho * g)
    return f - mu @ h + 0.5 * rho * (h @ h) + (shifted @ shifted - nu @ nu) / (2.0 * rho)


def _lagrangian_gradient(parts, x, mu_t, nu_t, rel_step):
    vec = parts(x)
    jac = fd_jacobian(parts, x, vec, rel_step)
    _, jh, jg = jac[0], jac[1:1 + parts.m], jac[1 + parts.m:]
    grad = jac[0] - jh.T @ mu_t - jg.T @ nu_t
    return grad, jh, jg


def _stationarity(parts, x, mu, nu, g, cfg: NlpConfig) -> float:
    """Smallest Lagrangian gradient over AL and least-squares multipliers."""
    grad, jh, jg = _lagrangian_gradient(parts, x, mu, nu, cfg.fd_step)
    best = float(np.max(np.abs(grad)))
    jf = grad + jh.T @ mu + jg.T @ nu
    active = (g <= cfg.active_tol) | (nu > 0)
    rows = np.vstack([jh, jg[active]])
    if rows.size:
        lam, *_ = np.linalg.lstsq(rows.T, jf, rcond=None)
        if np.all(lam[jh.shape[0]:] >= 0):
            best = min(best, float(np.max(np.abs(jf - rows.T @ lam))))
    else:
        best = min(best, float(np.max(np.abs(jf))))
    return best


def _al_inner(parts, x, mu, nu, rho, cfg: NlpConfig, gtol: float):
    """Newton on the augmented Lagrangian with structured curvature.

    The penalty part contributes ``rho * J^T J`` exactly; only the Lagrangian
    curvature is differenced, so large penalties do not amplify FD noise.
    """
    n = x.size
    fx = _merit(parts, x, mu, nu, rho)
    stalls = 0
    for _ in range(cfg.max_inner):
        f, h, g = parts.split(parts(x))
        mu_t = mu - rho * h
        nu_t = np.maximum(0.0, nu - rho * g)
        active = (nu - rho * g) > 0
        grad, jh, jg = _lagrangian_gradient(parts, x, mu_t, nu_t, cfg.fd_step)
        if np.max(np.abs(grad)) < gtol:
            break
        hess = np.empty((n, n))
        for i in range(n):
            d = 1e-4 * max(abs(x[i]), 1.0)
            xp = x.copy()
            xp[i] += d
            try:
                gp, _, _ = _lagrangian_gradient(parts, xp, mu_t, nu_t, cfg.fd_step)
            except PlanningError:
                xp[i] -= 2 * d
                gp, _, _ = _lagrangian_gradient(parts, xp, mu_t, nu_t, cfg.fd_step)
                d = -d
            hess[:, i] = (gp - grad) / d
        hess = 0.5 * (hess + hess.T)
        hess += rho * jh.T @ jh + rho * jg[active].T @ jg[active]
        scale = max(np.max(np.abs(np.diag(hess))), 1e-12)
        shift = 0.0
        p = None
        for _ in range(60):
            try:
                chol = np.linalg.cholesky(hess + shift * np.eye(n))
                p = -np.linalg.solve(chol.T, np.linalg.solve(chol, grad))
                break
            except np.linalg.LinAlgError:
                shift = max(4 * shift, 1e-10 * scale)
        if p is None or grad @ p >= 0:
            p = -grad
        slope = grad @ p
        # Newton decrement below the evaluation noise: nothing left to gain
        if -slope < 1e-13 * (1.0 + abs(fx)):
            break
        alpha = 1.0
        for _ in range(60):
            trial = x + alpha * p
            ft = _merit(parts, trial, mu, nu, rho)
            if ft <= fx + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
        else:
            break
        small = abs(fx - ft) <= 1e-15 * (1.0 + abs(fx))
        x, fx = trial, ft
        if small:
            stalls += 1
            if stalls >= 2:
                break
        else:
            stalls = 0
    return x


def nlp_solve(cost: Callable, eq: Callable, ineq: Callable, x0,
              cfg: NlpConfig = NlpConfig()) -> NlpResult:
    """Minimise ``cost`` subject to ``eq(x) = 0`` and ``ineq(x) >= 0``.

    Powell-Hestenes-Rockafellar augmented Lagrangian with a Newton inner
    solver; meant for a handful of variables. Raises instead of returning a
    point that misses the tolerances.
    """
    x = np.array(x0, dtype=float)
    m = np.atleast_1d(np.asarray(eq(x), dtype=float)).size
    p = np.atleast_1d(np.asarray(ineq(x), dtype=float)).size
    parts = _Stacked(cost, eq, ineq, m, p)
    if _safe_eval(parts, x) is None:
        raise NoConvergence("problem functions undefined at the initial guess", best=x)
    mu = np.zeros(m)
    nu = np.zeros(p)
    rho = cfg.penalty_init
    prev_viol = best_viol = np.inf
    stagnant = 0
    history = []
    for outer in range(1, cfg.max_outer + 1):
        x = _al_inner(parts, x, mu, nu, rho, cfg, gtol=0.1 * cfg.tol_kkt)
        f, h, g = parts.split(parts(x))
        mu = mu - rho * h
        nu = np.maximum(0.0, nu - rho * g)
        ev = float(np.max(np.abs(h))) if m else 0.0
        iv = float(max(0.0, -np.min(g))) if p else 0.0
        viol = max(ev, iv)
        kkt = _stationarity(parts, x, mu, nu, g, cfg)
        history.append((outer, f, viol, kkt, rho))
        log.debug("AL outer %d: cost=%.10g viol=%.2e kkt=%.2e rho=%.1e", outer, f, viol, kkt, rho)
        if viol < cfg.tol_constraint and kkt < cfg.tol_kkt:
            return NlpResult(x, mu, nu, f, ev, iv, kkt, outer, history)
        if viol > cfg.tol_constraint and viol > 0.25 * prev_viol:
            rho = min(rho * cfg.penalty_growth, cfg.penalty_max)
        prev_viol = viol
        if viol < 0.9 * best_viol:
            best_viol, stagnant = viol, 0
        else:
            stagnant += 1
        if stagnant >= 4 and rho >= cfg.penalty_max and viol > cfg.tol_constraint:
            raise Infeasible(f"constraint violation stagnated at {viol:.3e}")
    if prev_viol > max(1e3 * cfg.tol_constraint, 1e-4):
        raise Infeasible(f"constraint violation {prev_viol:.3e} after {cfg.max_outer} outer iterations")
    raise NoConvergence(
        f"augmented Lagrangian did not converge (violation {prev_viol:.3e})", best=x
    )
