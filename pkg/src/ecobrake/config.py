"""Scenario files: YAML with explicit units in every key.

Every value is validated on load and errors name the file, the line and the
offending field. The model invariants are re-checked by constructing the
dataclasses; their messages are mapped back onto file keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .direct import Theta
from .errors import NonPositiveResistance, ScenarioError
from .indirect import SwitchTimes
from .model import Environment, Scenario, VehicleParams, derive_coefficients
from .numerics import IntegratorConfig, NewtonConfig, NlpConfig

VEHICLE_KEYS = {
    "mass_kg": "mass",
    "frontal_area_m2": "frontal_area",
    "drag_coeff": "drag_coeff",
    "rolling_coeff": "rolling_coeff",
    "engine_drag_decel_ms2": "engine_drag_decel",
    "u_min_ms2": "u_min",
}
ENVIRONMENT_KEYS = {
    "slope_deg": "slope_angle",
    "gravity_ms2": "gravity",
    "air_density_kgm3": "air_density",
}
BOUNDARY_KEYS = ("v0_kmh", "v0_ms", "distance_m", "vf_kmh", "vf_ms")
WEIGHT_KEYS = ("w_u", "w_t")
SOLVER_KEYS = {
    "newton_tol_residual": ("newton", "tol_residual", float),
    "newton_max_iters": ("newton", "max_iters", int),
    "newton_fd_step": ("newton", "fd_step", float),
    "integrator_steps": ("integ", "steps", int),
    "nlp_tol_kkt": ("nlp", "tol_kkt", float),
    "nlp_tol_constraint": ("nlp", "tol_constraint", float),
    "nlp_max_outer": ("nlp", "max_outer", int),
    "nlp_penalty_growth": ("nlp", "penalty_growth", float),
}
GUESS_KEYS = {
    "indirect_guess_s": ("t_s1", "t_s2", "t_f"),
    "direct_guess": ("dt_q1", "dt_q2", "u_m", "u_n"),
}
REQUIRED_BLOCKS = ("vehicle", "environment", "boundary", "weights")

BUNDLED = Path(__file__).with_name("data") / "case_study.yaml"


@dataclass
class SolverSettings:
    newton: NewtonConfig = field(default_factory=NewtonConfig)
    integ: IntegratorConfig | None = None  # None: the solver default
    nlp: NlpConfig = field(default_factory=NlpConfig)
    indirect_guess: SwitchTimes | None = None
    direct_guess: Theta | None = None


@dataclass
class ScenarioFile:
    path: str
    scenario: Scenario
    solver: SolverSettings


class _Lines:
    """Line numbers (1-based) of every key, from the composed YAML tree."""

    def __init__(self, node, path: str):
        self.path = path
        self.lines: dict[tuple, int] = {}
        self._walk(node, ())

    def _walk(self, node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key_node, value_node in node.value:
                key = prefix + (str(key_node.value),)
                self.lines[key] = key_node.start_mark.line + 1
                self._walk(value_node, key)

    def error(self, key: tuple, message: str) -> ScenarioError:
        line = self.lines.get(key)
        while line is None and len(key) > 1:
            key = key[:-1]
            line = self.lines.get(key)
        where = f"{self.path}:{line}" if line else self.path
        return ScenarioError(f"{where}: {message}")


def _number(lines: _Lines, key: tuple, value, kind=float):
    # PyYAML reads "1e-6" (no dot) as a string, so accept numeric strings
    if isinstance(value, bool):
        raise lines.error(key, f"{'.'.join(key)} must be a number (got {value!r})")
    try:
        out = kind(value) if kind is float or isinstance(value, int) else kind(str(value))
    except (TypeError, ValueError):
        raise lines.error(key, f"{'.'.join(key)} must be a number (got {value!r})") from None
    if not math.isfinite(out):
        raise lines.error(key, f"{'.'.join(key)} must be finite (got {value!r})")
    return out


def _block(lines: _Lines, data: dict, name: str, allowed) -> dict:
    block = data.get(name)
    if block is None:
        raise lines.error((name,), f"missing block '{name}'")
    if not isinstance(block, dict):
        raise lines.error((name,), f"block '{name}' must be a mapping")
    unknown = sorted(set(block) - set(allowed))
    if unknown:
        raise lines.error((name, unknown[0]), f"{name}: unknown key '{unknown[0]}'")
    return block


def _require(lines: _Lines, block: dict, name: str, keys) -> dict:
    out = {}
    for key in keys:
        if key not in block:
            raise lines.error((name,), f"{name}: missing key '{key}'")
        out[key] = _number(lines, (name, key), block[key])
    return out


def _speed(lines: _Lines, block: dict, stem: str) -> float:
    kmh, ms = f"{stem}_kmh", f"{stem}_ms"
    given = [k for k in (kmh, ms) if k in block]
    if len(given) != 1:
        raise lines.error(("boundary",),
                          f"boundary: give exactly one of '{kmh}' or '{ms}' (got {len(given)})")
    value = _number(lines, ("boundary", given[0]), block[given[0]])
    return value / 3.6 if given[0] == kmh else value


def _model_error(lines: _Lines, exc: ScenarioError, block: str, keys: dict) -> ScenarioError:
    """Re-anchor a model invariant message ("vehicle.mass must ...") to its file key."""
    text = str(exc)
    for file_key, attr in keys.items():
        if text.startswith(f"{block}.{attr} "):
            return lines.error((block, file_key), f"{block}.{file_key}{text[len(block) + 1 + len(attr):]}")
    return lines.error((block,), text)


def parse_scenario(text: str, path: str = "<scenario>") -> ScenarioFile:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{path}:{mark.line + 1}" if mark is not None else path
        raise ScenarioError(f"{where}: not valid YAML ({getattr(exc, 'problem', exc)})") from None
    lines = _Lines(node, path)
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected a mapping of blocks at the top level")
    unknown = sorted(set(data) - set(REQUIRED_BLOCKS) - {"solver"})
    if unknown:
        raise lines.error((unknown[0],), f"unknown block '{unknown[0]}'")

    vb = _block(lines, data, "vehicle", VEHICLE_KEYS)
    vals = _require(lines, vb, "vehicle", VEHICLE_KEYS)
    try:
        vehicle = VehicleParams(**{VEHICLE_KEYS[k]: v for k, v in vals.items()})
    except ScenarioError as exc:
        raise _model_error(lines, exc, "vehicle", VEHICLE_KEYS) from None

    eb = _block(lines, data, "environment", ENVIRONMENT_KEYS)
    vals = _require(lines, eb, "environment", ENVIRONMENT_KEYS)
    try:
        env = Environment.from_degrees(vals["slope_deg"], vals["gravity_ms2"],
                                       vals["air_density_kgm3"])
    except ScenarioError as exc:
        raise _model_error(lines, exc, "environment", ENVIRONMENT_KEYS) from None
    try:
        derive_coefficients(vehicle, env)
    except NonPositiveResistance as exc:
        raise lines.error(("environment",), f"environment: {exc}") from None

    bb = _block(lines, data, "boundary", BOUNDARY_KEYS)
    v0 = _speed(lines, bb, "v0")
    v_f = _speed(lines, bb, "vf")
    distance = _require(lines, bb, "boundary", ("distance_m",))["distance_m"]

    wb = _block(lines, data, "weights", WEIGHT_KEYS)
    weights = _require(lines, wb, "weights", WEIGHT_KEYS)

    try:
        scenario = Scenario(v0=v0, distance_to_target=distance, v_f=v_f, w_u=weights["w_u"],
                            w_t=weights["w_t"], vehicle=vehicle, env=env)
    except ScenarioError as exc:
        block = str(exc).split(":")[0].split(".")[0]
        keys = {"distance_m": "distance"} if block == "boundary" else {k: k for k in WEIGHT_KEYS}
        raise _model_error(lines, exc, block, keys) from None
    return ScenarioFile(path, scenario, _solver(lines, data.get("solver")))


def _solver(lines: _Lines, block) -> SolverSettings:
    settings = SolverSettings()
    if block is None:
        return settings
    if not isinstance(block, dict):
        raise lines.error(("solver",), "block 'solver' must be a mapping")
    unknown = sorted(set(block) - set(SOLVER_KEYS) - set(GUESS_KEYS))
    if unknown:
        raise lines.error(("solver", unknown[0]), f"solver: unknown key '{unknown[0]}'")
    groups = {"newton": {}, "integ": {}, "nlp": {}}
    for key, (group, attr, kind) in SOLVER_KEYS.items():
        if key in block:
            value = _number(lines, ("solver", key), block[key], kind)
            if value <= 0:
                raise lines.error(("solver", key), f"solver.{key} must be > 0 (got {value!r})")
            groups[group][attr] = value
    if groups["nlp"].get("penalty_growth", 2.0) <= 1.0:
        raise lines.error(("solver", "nlp_penalty_growth"), "solver.nlp_penalty_growth must be > 1")
    settings.newton = NewtonConfig(**groups["newton"])
    settings.nlp = NlpConfig(**groups["nlp"])
    if groups["integ"]:
        settings.integ = IntegratorConfig(**groups["integ"])
    for key, names in GUESS_KEYS.items():
        if key not in block:
            continue
        guess = block[key]
        if not isinstance(guess, dict) or set(guess) != set(names):
            raise lines.error(("solver", key), f"solver.{key} needs exactly the keys {', '.join(names)}")
        vals = [_number(lines, ("solver", key, n), guess[n]) for n in names]
        if key == "indirect_guess_s":
            settings.indirect_guess = SwitchTimes(*vals)
        else:
            settings.direct_guess = Theta(*vals)
    return settings


def load_scenario(path) -> ScenarioFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario ({exc.strerror})") from None
    return parse_scenario(text, str(path))
