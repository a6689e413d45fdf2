"""Command line front end: ``plan --scenario FILE --method indirect|direct|both``.

Exit codes: 0 success, 1 scenario/config error, 2 solver failure,
3 verification failure (only with ``--verify``).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import config
from .direct import DOMAIN_ROW, INEQ_NAMES, DirectSolution, solve_direct
from .errors import PlanningError, ScenarioError
from .indirect import BRAKING_STEPS, IndirectSolution, solve_indirect
from .trajectory import Comparison, Trajectory, compare, extract_trajectory, resimulate

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3

# verification limits
OPTIMALITY_TOL = 1e-6
ANCHOR_TOL = 1e-9
RESIM_S_TOL = 0.1  # m
RESIM_V_TOL = 0.01  # m/s
RESIM_DT = 1e-3  # s
TERMINAL_TOL = 1e-6
SATURATION_TOL = 1e-9


def _fmt(x) -> str:
    return f"{x:.9g}"


@dataclass
class Check:
    name: str
    value: float
    limit: float
    ok: bool

    def line(self) -> str:
        verdict = "pass" if self.ok else "FAIL"
        return f"{self.name} = {_fmt(self.value)}  (limit {_fmt(self.limit)}) {verdict}"


@dataclass
class MethodRun:
    method: str
    solution: IndirectSolution | DirectSolution
    trajectory: Trajectory
    resim: tuple[float, float]
    wall_clock: float
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)


def _abs_check(name, value, limit) -> Check:
    return Check(name, float(value), limit, abs(value) < limit)


def _resim_checks(run: MethodRun) -> list[Check]:
    scn = run.solution.scenario
    s, v = run.resim
    return [
        _abs_check("resim_s_error_m", s - scn.distance_to_target, RESIM_S_TOL),
        _abs_check("resim_v_error_ms", v - scn.v_f, RESIM_V_TOL),
    ]


def indirect_checks(sol: IndirectSolution) -> list[Check]:
    r = sol.residuals
    checks = []
    for key in ("terminal_s", "terminal_v", "terminal_lambda_v"):
        checks.append(_abs_check(key, r[key], TERMINAL_TOL))
    for key in ("lambda_v_ts1", "H_tf", "H_jump_ts1", "H_jump_ts2", "lambda_v_ts2"):
        if key in r:
            checks.append(_abs_check(key, r[key], OPTIMALITY_TOL))
    if "u_ts2_plus_2aeng" in r:
        checks.append(_abs_check("u_ts2_plus_2aeng", r["u_ts2_plus_2aeng"], ANCHOR_TOL))
    if "lambda_v_min_braking" in r:
        lam = r["lambda_v_min_braking"]
        checks.append(Check("lambda_v_min_braking", lam, 0.0, lam > 0.0 or sol.two_phase))
    checks.append(Check("u_min_violation", r["u_min_violation"], 0.0, r["u_min_violation"] <= 0.0))
    return checks


def direct_checks(sol: DirectSolution) -> list[Check]:
    r = sol.residuals
    tol_c = TERMINAL_TOL
    checks = [_abs_check("g_f", r["g_f"], tol_c)]
    for key in INEQ_NAMES + (DOMAIN_ROW,):
        checks.append(Check(key, r[key], -tol_c, r[key] >= -tol_c))
    checks.append(Check("saturation_violation", r["saturation_violation"], SATURATION_TOL,
                        r["saturation_violation"] <= SATURATION_TOL))
    checks.append(Check("saturation_interior_excess", r["saturation_interior_excess"],
                        SATURATION_TOL, r["saturation_interior_excess"] <= SATURATION_TOL))
    return checks


def _solve(method: str, sf: config.ScenarioFile, dt: float) -> MethodRun:
    t0 = time.perf_counter()
    if method == "indirect":
        sol = solve_indirect(sf.scenario, sf.solver.newton, sf.solver.integ or BRAKING_STEPS,
                             sf.solver.indirect_guess)
    else:
        sol = solve_direct(sf.scenario, sf.solver.nlp, sf.solver.direct_guess)
    wall = time.perf_counter() - t0
    traj = extract_trajectory(sol, dt)
    run = MethodRun(method, sol, traj, resimulate(sol, RESIM_DT), wall)
    run.checks = (indirect_checks(sol) if method == "indirect" else direct_checks(sol))
    run.checks += _resim_checks(run)
    return run


def _section(title: str, items) -> list[str]:
    out = [f"[{title}]"]
    for key, value in items:
        out.append(f"{key} = {value if isinstance(value, str) else _fmt(value)}")
    out.append("")
    return out


def _method_lines(run: MethodRun) -> list[str]:
    sol = run.solution
    t_s1, t_s2, t_f = (sol.times.t_s1, sol.times.t_s2, sol.times.t_f) if run.method == "indirect" \
        else sol.times
    d1, d2, d3 = sol.durations
    items = [("method", run.method)]
    if run.method == "indirect":
        items.append(("structure", sol.structure))
    items += [("t_s1_s", t_s1), ("t_s2_s", t_s2), ("t_f_s", t_f),
              ("dt_q1_s", d1), ("dt_q2_s", d2), ("dt_q3_s", d3)]
    if run.method == "indirect":
        items += [("lambda_s", sol.lambda_s), ("lambda_v_tf", sol.lambda_v_tf)]
    else:
        th = sol.theta
        items += [("theta_dt_q1_s", th.dt_q1), ("theta_dt_q2_s", th.dt_q2),
                  ("theta_u_m_per_s", th.u_m), ("theta_u_n_ms2", th.u_n)]
    items += [("J_u", sol.cost.J_u), ("J_t", sol.cost.J_t), ("J", sol.cost.J)]
    lines = _section(run.method, items)
    lines += _section(f"{run.method}.residuals", sorted(sol.residuals.items()))
    if run.method == "direct":
        audit = sol.saturation
        lines += _section("direct.saturation", [
            ("u_max_ms2", audit.u_max), ("u_min_ms2", audit.u_min),
            ("u_ts2_ms2", audit.u_endpoints[0]), ("u_tf_ms2", audit.u_endpoints[1]),
            ("bound_violation_ms2", audit.bound_violation),
            ("interior_excess_ms2", audit.interior_excess),
        ])
    lines += _section(f"{run.method}.resimulation", [
        ("dt_s", RESIM_DT), ("s_end_m", run.resim[0]), ("v_end_ms", run.resim[1]),
    ])
    lines.append(f"[{run.method}.checks]")
    lines += [c.line() for c in run.checks]
    lines.append("")
    return lines


def render_report(sf: config.ScenarioFile, runs: list[MethodRun],
                  comparison: Comparison | None) -> str:
    scn = sf.scenario
    c = scn.coefficients
    lines = ["# eco-braking plan report", ""]
    lines += _section("scenario", [
        ("file", sf.path), ("v0_ms", scn.v0), ("vf_ms", scn.v_f),
        ("distance_m", scn.distance_to_target), ("w_u", scn.w_u), ("w_t", scn.w_t),
        ("c_air_per_m", c.c_air), ("a_alpha_ms2", c.a_alpha), ("a_eng_ms2", c.a_eng),
        ("u_min_ms2", scn.u_min),
    ])
    for run in runs:
        lines += _method_lines(run)
    if comparison is not None:
        d1, d2, d3 = comparison.d_durations
        lines += _section("comparison", [
            ("d_dt_q1_s", d1), ("d_dt_q2_s", d2), ("d_dt_q3_s", d3),
            ("d_J", comparison.d_cost), ("max_abs_dv_ms", comparison.max_dv),
        ])
    # the only non-deterministic section, kept last
    lines += _section("timing", [(f"{r.method}_wall_clock_s", r.wall_clock) for r in runs])
    return "\n".join(lines)


def _traj_path(base: Path, method: str, both: bool) -> Path:
    return base.with_name(f"{base.stem}.{method}{base.suffix}") if both else base


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plan",
        description="Energy-efficient coast/engine-drag/brake speed plans to a target speed at a target distance.",
    )
    p.add_argument("--scenario", required=True,
                   help="scenario YAML file, or 'case-study' for the bundled highway case")
    p.add_argument("--method", choices=("indirect", "direct", "both"), default="both")
    p.add_argument("--out-traj", type=Path, help="trajectory CSV (per-method suffix with 'both')")
    p.add_argument("--out-report", type=Path, help="write the report here instead of stdout")
    p.add_argument("--dt", type=float, default=0.01, help="trajectory sample step in s")
    p.add_argument("--verify", action="store_true",
                   help="exit 3 if any optimality residual or re-simulation check fails")
    p.add_argument("--quiet", action="store_true", help="print nothing on success")
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    err = sys.stderr
    if not args.dt > 0:
        print("error: --dt must be positive", file=err)
        return EXIT_CONFIG
    try:
        path = config.BUNDLED if args.scenario == "case-study" else args.scenario
        sf = config.load_scenario(path)
    except ScenarioError as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG

    methods = ["indirect", "direct"] if args.method == "both" else [args.method]
    runs = []
    for method in methods:
        try:
            runs.append(_solve(method, sf, args.dt))
        except PlanningError as exc:
            print(f"{method} solver failed: {type(exc).__name__}: {exc}", file=err)
            return EXIT_SOLVER

    comparison = compare(runs[0].solution, runs[1].solution, args.dt) if len(runs) == 2 else None
    report = render_report(sf, runs, comparison)
    if args.out_traj is not None:
        for r in runs:
            r.trajectory.write_csv(_traj_path(args.out_traj, r.method, len(runs) == 2))
    if args.out_report is not None:
        args.out_report.write_text(report)
    elif not args.quiet:
        print(report)

    failed = [f"{r.method}:{c.name}" for r in runs for c in r.checks if not c.ok]
    if args.verify and failed:
        print("verification failed: " + ", ".join(failed), file=err)
        return EXIT_VERIFY
    if not args.quiet and args.out_report is not None:
        for r in runs:
            print(f"{r.method}: J = {_fmt(r.solution.cost.J)}, durations = "
                  + ", ".join(_fmt(d) for d in r.solution.durations) + " s")
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
