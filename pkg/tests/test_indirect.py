import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecobrake import analytic
from ecobrake.errors import (
    DegenerateTimes,
    Infeasible,
    InfeasibleOrdering,
    NegativeDiscriminant,
    PlanningError,
)
from ecobrake.indirect import (
    COAST_BRAKE,
    COAST_ONLY,
    THREE_PHASE,
    SwitchTimes,
    bracket_guess,
    coasting_reach,
    costate_at,
    default_guess,
    hamiltonian,
    lambda_s_of_times,
    optimal_brake_control,
    shoot,
    solve_indirect,
    terminal_lambda_v,
)
from ecobrake.model import CASE_STUDY_VEHICLE, Mode, case_study_scenario
from oracles import coast_field, rk4


def test_hamiltonian_costate_free(coeffs):
    for mode in (Mode.Q1_DisengagedCoast, Mode.Q2_EngagedCoast):
        assert hamiltonian(mode, 0.0, 30.0, 0.0, 0.0, 0.0, coeffs, 0.1, 1.0) == 1.0


def test_optimal_control(scn, coeffs):
    assert optimal_brake_control(0.0, 0.1) == 0.0
    assert optimal_brake_control(2 * scn.w_u * coeffs.a_eng, scn.w_u) == pytest.approx(-0.8)


def test_terminal_lambda_collapses(coeffs):
    scn = case_study_scenario(w_t=1e-300)
    assert terminal_lambda_v(0.0, scn, coeffs) == pytest.approx(0.0, abs=1e-12)


def test_terminal_lambda_zeroes_hamiltonian(scn, coeffs):
    for lam_s in (-0.03, -0.01, 0.0, 0.02):
        lam = terminal_lambda_v(lam_s, scn, coeffs)
        u = optimal_brake_control(lam, scn.w_u)
        h = hamiltonian(Mode.Q3_Brake, 0.0, scn.v_f, lam_s, lam, u, coeffs, scn.w_u, scn.w_t)
        assert abs(h) < 1e-10


def test_terminal_lambda_negative_discriminant(scn, coeffs):
    with pytest.raises(NegativeDiscriminant):
        terminal_lambda_v(-1.0, scn, coeffs)


def test_lambda_s_vanishes_without_engine_drag():
    scn = case_study_scenario(vehicle=dataclasses.replace(CASE_STUDY_VEHICLE, engine_drag_decel=0.0))
    assert lambda_s_of_times(SwitchTimes(5.0, 8.0, 12.0), scn, scn.coefficients) == 0.0


def test_lambda_s_from_rk4_coasting(scn, coeffs, ind):
    times = ind.times
    y1 = rk4(coast_field(coeffs.c_air, coeffs.a_alpha), [0.0, scn.v0], 0.0, times.t_s1)
    y2 = rk4(coast_field(coeffs.c_air, coeffs.a_alpha + coeffs.a_eng), y1, times.t_s1, times.t_s2)
    v1, v2 = y1[1], y2[1]
    d2 = coeffs.c_air * v2 ** 2 + coeffs.a_alpha + coeffs.a_eng
    oracle = -2 * scn.w_u * coeffs.a_eng * d2 / (v1 - v2)
    assert oracle == pytest.approx(-0.027, abs=1e-3)
    assert abs(ind.lambda_s - oracle) < 1e-9


@settings(max_examples=30, deadline=None)
@given(t_s1=st.floats(0.0, 15.0), dq2=st.floats(0.1, 10.0))
def test_lambda_s_negative(scn, coeffs, t_s1, dq2):
    lam = lambda_s_of_times(SwitchTimes(t_s1, t_s1 + dq2, t_s1 + dq2 + 1.0), scn, coeffs)
    assert lam < 0


def test_lambda_s_degenerate(scn, coeffs):
    with pytest.raises(DegenerateTimes):
        lambda_s_of_times(SwitchTimes(5.0, 5.0, 9.0), scn, coeffs)


def test_shoot_at_and_off_optimum(scn, coeffs, ind):
    assert np.max(np.abs(shoot(ind.times, scn, coeffs))) < 1e-6
    t = ind.times
    off = shoot(SwitchTimes(t.t_s1, t.t_s2, t.t_f + 0.1), scn, coeffs)
    assert np.max(np.abs(off)) > 1e-3


def test_shoot_rejects_unordered(scn, coeffs):
    with pytest.raises(InfeasibleOrdering):
        shoot(SwitchTimes(6.0, 5.0, 9.0), scn, coeffs)


def test_default_guess(scn):
    g = default_guess(scn)
    assert g.t_f == pytest.approx(500 / ((scn.v0 + scn.v_f) / 2))
    assert (g.t_s1, g.t_s2) == pytest.approx((0.6 * g.t_f, 0.85 * g.t_f))


def test_case_study_durations(ind):
    assert ind.structure == THREE_PHASE
    assert ind.durations == pytest.approx((7.98, 2.86, 2.95), abs=0.05)
    assert ind.cost.J == pytest.approx(14.016, abs=0.01)
    assert ind.cost.J == pytest.approx(ind.cost.J_u + ind.cost.J_t)


def test_case_study_costates(scn, ind):
    assert ind.lambda_s < 0
    assert ind.lambda_v_tf == pytest.approx(0.166, abs=0.002)
    assert optimal_brake_control(ind.lambda_v_tf, scn.w_u) == pytest.approx(-1.66, abs=0.02)


def test_cross_check_terminal_control_with_direct_law(scn, ind, drc):
    u_ind = optimal_brake_control(ind.lambda_v_tf, scn.w_u)
    assert abs(u_ind - drc.law.command(scn.v_f)) < 0.05


def test_optimality_residuals(scn, coeffs, ind):
    r = ind.residuals
    for key in ("lambda_v_ts1", "H_tf", "H_jump_ts1", "H_jump_ts2", "terminal_s", "terminal_v",
                "terminal_lambda_v"):
        assert abs(r[key]) < 1e-6, key
    assert abs(r["u_ts2_plus_2aeng"]) < 1e-9
    # the anchor is imposed as the initial value, bit for bit
    assert ind.braking[0, 2] == 2.0 * scn.w_u * coeffs.a_eng
    assert np.all(ind.braking[1:, 2] > 0)
    assert r["u_min_violation"] == 0.0


def test_costate_continuity(ind):
    t = ind.times
    eps = 1e-9
    lam = costate_at(ind, np.array([t.t_s1 - eps, t.t_s1 + eps]))
    assert abs(lam[0] - lam[1]) < 1e-6
    assert costate_at(ind, 0.0) == pytest.approx(
        analytic.coast_costate(ind.q1, ind.lambda_s, t.t_s1, 0.0, 0.0))


def test_weight_homogeneity(ind):
    scaled = solve_indirect(case_study_scenario(w_u=0.3, w_t=3.0))
    assert np.max(np.abs(scaled.times.as_array() - ind.times.as_array())) < 1e-6
    assert scaled.cost.J == pytest.approx(3 * ind.cost.J, rel=1e-9)


def test_bracket_guess_is_close(scn, coeffs, ind):
    g = bracket_guess(scn, coeffs)
    assert np.max(np.abs(g.as_array() - ind.times.as_array())) < 0.05


def test_explicit_guess(scn):
    sol = solve_indirect(scn, guess=default_guess(scn))
    assert sol.durations == pytest.approx((7.98, 2.86, 2.95), abs=0.05)


def test_near_coasting_reach_is_coast_only(scn, coeffs):
    reach = coasting_reach(scn, coeffs)
    sol = solve_indirect(case_study_scenario(distance_to_target=0.999 * reach))
    assert sol.structure == COAST_ONLY
    assert sol.durations[2] == 0.0
    assert sol.cost.J_u == 0.0
    r = sol.residuals
    for key in ("terminal_s", "terminal_v", "H_tf", "lambda_v_ts1", "H_jump_ts1"):
        assert abs(r[key]) < 1e-6, key


def test_structure_is_continuous_in_distance(scn, coeffs):
    # J and t_f vary continuously through the three-phase to coast-only transition
    reach = coasting_reach(scn, coeffs)
    ds = np.linspace(0.90, 0.99, 10) * reach
    sols = [solve_indirect(case_study_scenario(distance_to_target=d)) for d in ds]
    assert {s.structure for s in sols} == {THREE_PHASE, COAST_ONLY}
    t_f = np.array([s.times.t_f for s in sols])
    assert np.all(np.diff(t_f) > 0)
    assert np.max(np.abs(np.diff(t_f, 2))) < 0.1


def test_without_engine_drag_is_two_phase():
    scn = case_study_scenario(vehicle=dataclasses.replace(CASE_STUDY_VEHICLE, engine_drag_decel=0.0))
    sol = solve_indirect(scn)
    assert sol.structure == COAST_BRAKE
    assert sol.durations[1] == 0.0
    for key in ("terminal_s", "terminal_v", "terminal_lambda_v", "H_tf", "lambda_v_ts1", "H_jump_ts2"):
        assert abs(sol.residuals[key]) < 1e-6, key


def test_beyond_reach_is_infeasible(scn, coeffs):
    with pytest.raises(Infeasible):
        solve_indirect(case_study_scenario(distance_to_target=coasting_reach(scn, coeffs) + 1.0))


@pytest.mark.parametrize("distance", [1e-3, 0.5 * 2.4e-3, 10.0, 1000.0])
def test_tiny_speed_drop_never_returns_nan(distance):
    scn = case_study_scenario(v_f=(150 / 3.6) * (1 - 1e-6), distance_to_target=distance)
    try:
        sol = solve_indirect(scn)
    except PlanningError:
        return
    assert sol.times.ordered
    assert np.all(np.isfinite(sol.times.as_array()))
    assert math.isfinite(sol.cost.J)
