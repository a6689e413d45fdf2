import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecobrake import analytic
from ecobrake.errors import Infeasible, NoConvergence, NonFiniteState, SingularJacobian
from ecobrake.model import Mode
from ecobrake.numerics import (
    IntegratorConfig,
    NewtonConfig,
    NlpConfig,
    integrate,
    newton_solve,
    nlp_solve,
)


def test_integrate_constant():
    x = integrate(lambda t, x: np.zeros(2), [1.5, -2.0], (0.0, 3.0), 7)
    assert np.array_equal(x, [1.5, -2.0])


def test_integrate_exponential():
    x = integrate(lambda t, x: x, [1.0], (0.0, 1.0), IntegratorConfig(10_000))
    assert abs(x[0] - math.e) < 1e-10


def test_rk4_order():
    errs = [abs(integrate(lambda t, x: x, [1.0], (0.0, 1.0), n)[0] - math.e) for n in (20, 40, 80)]
    for coarse, fine in zip(errs, errs[1:]):
        assert 14.0 < coarse / fine < 17.0


def test_integrate_dense_grid():
    t, xs = integrate(lambda t, x: np.array([1.0]), [0.0], (2.0, 3.0), 4, dense=True)
    assert np.allclose(t, [2.0, 2.25, 2.5, 2.75, 3.0])
    assert np.allclose(xs[:, 0], t - 2.0)


def test_integrate_matches_coasting_closed_form(coeffs):
    spec = analytic.coast_phase(Mode.Q1_DisengagedCoast, 0.0, 0.0, 40.0, coeffs)

    def rhs(_t, x):
        return np.array([x[1], -coeffs.c_air * x[1] ** 2 - coeffs.a_alpha])

    x = integrate(rhs, [0.0, 40.0], (0.0, 10.0), 2000)
    assert abs(x[1] - analytic.coast_velocity(spec, 10.0)) < 1e-6
    assert abs(x[0] - analytic.coast_distance(spec, 10.0)) < 1e-5


def test_integrate_non_finite():
    with pytest.raises(NonFiniteState):
        integrate(lambda t, x: x * np.inf, [1.0], (0.0, 1.0), 3)


def test_integrate_rejects_bad_span():
    with pytest.raises(ValueError):
        integrate(lambda t, x: x, [1.0], (1.0, 0.0), 3)
    with pytest.raises(ValueError):
        IntegratorConfig(0)


def test_newton_linear():
    assert newton_solve(lambda x: x - 3.0, [0.0])[0] == pytest.approx(3.0, abs=1e-11)


def test_newton_sqrt2():
    assert newton_solve(lambda x: x * x - 2.0, [1.0])[0] == pytest.approx(math.sqrt(2), abs=1e-11)


def test_newton_2d_known_root():
    root = np.array([1.5, -0.7])

    def residual(x):
        d = x - root
        return np.array([d[0] + d[0] * d[1] + 0.3 * d[1] ** 2, 2 * d[1] - d[0] ** 2 + d[0]])

    x = newton_solve(residual, [0.0, 0.0])
    assert np.max(np.abs(x - root)) < 1e-9


def test_newton_failures():
    with pytest.raises(NoConvergence) as info:
        newton_solve(lambda x: x * x + 1.0, [0.5], NewtonConfig(max_iters=5))
    assert info.value.best is not None
    with pytest.raises(SingularJacobian):
        newton_solve(lambda x: np.array([x[0] + x[1] - 1.0, 2 * x[0] + 2 * x[1]]), [0.0, 0.0])


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(1e-3, 1e3))
def test_newton_scaling_invariance(scale):
    x = newton_solve(lambda x: scale * (x ** 3 - 2.0 * x - 5.0), [2.0], NewtonConfig(tol_residual=1e-12 * scale))
    assert x[0] == pytest.approx(2.0945514815423265, abs=1e-9)


def test_nlp_active_bound():
    res = nlp_solve(lambda x: x[0] ** 2, lambda x: np.empty(0), lambda x: np.array([x[0] - 1.0]), [3.0])
    assert res.x[0] == pytest.approx(1.0, abs=1e-6)
    assert res.ineq_multipliers[0] == pytest.approx(2.0, abs=1e-4)


def test_nlp_equality_qp_projection_oracle():
    # minimize |x - p|^2 on a.x = b: x = p - a (a.p - b) / |a|^2
    p, a, b = np.array([2.0, 1.0]), np.array([1.0, 1.0]), 1.0
    expected = p - a * (a @ p - b) / (a @ a)
    res = nlp_solve(lambda x: (x - p) @ (x - p), lambda x: np.array([a @ x - b]), lambda x: np.empty(0),
                    [0.0, 0.0])
    assert np.allclose(res.x, expected, atol=1e-6)
    assert np.allclose(expected, [1.0, 0.0])


def test_nlp_reports_within_tolerance():
    cfg = NlpConfig()
    res = nlp_solve(lambda x: (x[0] - 3) ** 2 + (x[1] + 1) ** 2,
                    lambda x: np.array([x[0] - 2 * x[1] - 1]),
                    lambda x: np.array([2.0 - x[0], x[1] + 5.0]), [0.0, 0.0], cfg)
    assert res.eq_violation < cfg.tol_constraint
    assert res.ineq_violation < cfg.tol_constraint
    assert res.kkt_residual < cfg.tol_kkt
    assert np.allclose(res.x, [2.0, 0.5], atol=1e-6)


def test_nlp_infeasible_raises():
    with pytest.raises(Infeasible):
        nlp_solve(lambda x: x[0] ** 2, lambda x: np.empty(0),
                  lambda x: np.array([x[0] - 2.0, 1.0 - x[0]]), [0.0])


def test_nlp_undefined_start():
    def cost(x):
        if x[0] < 0:
            raise NonFiniteState("off domain")
        return x[0]

    with pytest.raises(NoConvergence):
        nlp_solve(cost, lambda x: np.empty(0), lambda x: np.empty(0), [-1.0])


def test_config_validation():
    with pytest.raises(ValueError):
        NewtonConfig(tol_residual=0.0)
    with pytest.raises(ValueError):
        NlpConfig(penalty_growth=1.0)
