"""Scenario files.

A scenario is an INI file read with :mod:`configparser`. Numeric values may be
written as plain arithmetic over ``pi`` (``pi/60 * -1.2``); vectors are comma
separated and multi-row values (inertia, direction pool) put one row per line.
"""

from __future__ import annotations

import ast
import configparser
import math
import operator
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

import numpy as np

from attfilt.estimator import GainConfig, GainError
from attfilt.measurement import DEFAULT_POOL, NoiseConfig
from attfilt.so3 import expv
from attfilt.truth import DynamicsConfig

BUNDLED = ("paper_sec4",)


class ScenarioError(ValueError):
    """Invalid scenario; ``field`` names the offending ``section.key``."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class Scenario:
    name: str
    duration: float
    gains: GainConfig
    noise: NoiseConfig
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    attitude: tuple = (0.0, 0.0, 0.0)  # rotation vector of R0, rad
    angular_velocity: tuple = (0.0, 0.0, 0.0)
    attitude_error: tuple = (0.0, 0.0, 0.0)  # rotation vector of Q0, rad
    omega_error: tuple = (0.0, 0.0, 0.0)
    pool: tuple = tuple(tuple(row) for row in DEFAULT_POOL.tolist())
    k_min: int = 2
    k_max: int = 9

    def __post_init__(self):
        ticks = self.duration / self.gains.h
        if not self.duration > 0.0:
            raise ScenarioError("must be positive", "run.duration")
        if abs(ticks - round(ticks)) > 1e-9 * max(1.0, ticks):
            raise ScenarioError(
                f"duration {self.duration} is not a whole number of steps of {self.gains.h}",
                "run.duration",
            )
        if not 1 <= len(self.pool) <= 9:
            raise ScenarioError("need between 1 and 9 directions", "directions.pool")
        if not 2 <= self.k_min <= self.k_max <= len(self.pool):
            raise ScenarioError(
                f"need 2 <= k_min <= k_max <= {len(self.pool)}", "directions.k_min"
            )

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.gains.h))

    @property
    def R0(self) -> np.ndarray:
        return expv(self.attitude)

    @property
    def Q0(self) -> np.ndarray:
        return expv(self.attitude_error)

    @property
    def Rhat0(self) -> np.ndarray:
        """Initial estimate with ``Q0 = R0 Rhat0^T``."""
        return self.Q0.T @ self.R0


_OPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
    ast.USub: operator.neg,
    ast.UAdd: operator.pos,
}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _OPS:
        return _OPS[type(node.op)](_eval(node.operand))
    raise ValueError(f"unsupported expression element {ast.dump(node)}")


def parse_number(text: str) -> float:
    """Evaluate arithmetic over numbers and ``pi``."""
    return _eval(ast.parse(text.strip(), mode="eval"))


class _Reader:
    def __init__(self, parser: configparser.ConfigParser):
        self.parser = parser

    def raw(self, section: str, key: str, default=None) -> str:
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        if default is None:
            raise ScenarioError("missing required field", f"{section}.{key}")
        return default

    def number(self, section, key, default=None) -> float:
        text = self.raw(section, key, None if default is None else repr(default))
        try:
            return parse_number(text)
        except (ValueError, SyntaxError, ZeroDivisionError) as exc:
            raise ScenarioError(f"cannot parse {text!r} ({exc})", f"{section}.{key}") from None

    def integer(self, section, key, default=None) -> int:
        value = self.number(section, key, default)
        if value != int(value):
            raise ScenarioError(f"expected an integer, got {value}", f"{section}.{key}")
        return int(value)

    def rows(self, section, key, width: int, default=None) -> list:
        text = self.raw(section, key, default)
        rows = []
        for line in text.strip().splitlines():
            if not line.strip():
                continue
            try:
                row = [parse_number(item) for item in line.split(",") if item.strip()]
            except (ValueError, SyntaxError, ZeroDivisionError) as exc:
                raise ScenarioError(f"cannot parse {line!r} ({exc})", f"{section}.{key}") from None
            if len(row) != width:
                raise ScenarioError(f"expected {width} values per row, got {len(row)}", f"{section}.{key}")
            rows.append(tuple(row))
        if not rows:
            raise ScenarioError("empty value", f"{section}.{key}")
        return rows

    def vector(self, section, key, default=None, scale_key=None) -> tuple:
        rows = self.rows(section, key, 3, default)
        if len(rows) != 1:
            raise ScenarioError("expected a single 3-vector", f"{section}.{key}")
        scale = self.number(section, scale_key, 1.0) if scale_key else 1.0
        return tuple(scale * x for x in rows[0])


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"cannot parse scenario file ({exc})") from None
    r = _Reader(parser)
    h = r.number("run", "step")
    try:
        gains = GainConfig(
            m=r.number("gains", "m"),
            l=r.number("gains", "l"),
            k_p=r.number("gains", "k_p"),
            h=h,
            n=r.integer("run", "rate_ratio"),
            d=r.vector("gains", "d"),
        )
    except GainError as exc:
        raise ScenarioError(str(exc), "gains") from None
    try:
        noise = NoiseConfig(
            direction_bound=r.number("noise", "direction_bound_deg"),
            gyro_bound=r.number("noise", "gyro_bound_deg_s"),
            seed=r.integer("run", "seed", 0),
        )
        inertia = r.rows("dynamics", "inertia", 3)
        dynamics = DynamicsConfig(
            inertia=np.array(inertia),
            torque_amplitudes=r.vector("dynamics", "torque_amplitudes"),
            torque_frequencies=r.vector("dynamics", "torque_frequencies"),
            torque_phases=r.vector("dynamics", "torque_phases", "0, 0, 0"),
        )
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from None
    return Scenario(
        name=parser.get("run", "name", fallback=name),
        duration=r.number("run", "duration"),
        gains=gains,
        noise=noise,
        dynamics=dynamics,
        attitude=r.vector("initial", "attitude", scale_key="attitude_scale"),
        angular_velocity=r.vector("initial", "angular_velocity", scale_key="angular_velocity_scale"),
        attitude_error=r.vector("estimate", "attitude_error", scale_key="attitude_error_scale"),
        omega_error=r.vector("estimate", "omega_error", scale_key="omega_error_scale"),
        pool=tuple(r.rows("directions", "pool", 3)),
        k_min=r.integer("directions", "k_min", 2),
        k_max=r.integer("directions", "k_max", 9),
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    """Load a scenario file, or a bundled scenario by name (``paper_sec4``)."""
    if str(path) in BUNDLED:
        text = resources.files("attfilt.harness").joinpath("data", f"{path}.ini").read_text()
        return parse_scenario(text, str(path))
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path} ({exc.strerror})") from None
    return parse_scenario(text, path.stem)


def _fmt(values) -> str:
    return ", ".join(repr(float(v)) for v in values)


def dump_scenario(s: Scenario) -> str:
    """Serialise with every value resolved to a float literal."""
    g, dyn = s.gains, s.dynamics
    pool = "".join(f"\n    {_fmt(row)}" for row in s.pool)
    inertia = "".join(f"\n    {_fmt(row)}" for row in dyn.inertia)
    return f"""[run]
name = {s.name}
duration = {s.duration!r}
step = {g.h!r}
rate_ratio = {g.n}
seed = {s.noise.seed}

[gains]
m = {g.m!r}
l = {g.l!r}
k_p = {g.k_p!r}
d = {_fmt(g.d)}

[noise]
direction_bound_deg = {s.noise.direction_bound!r}
gyro_bound_deg_s = {s.noise.gyro_bound!r}

[dynamics]
inertia ={inertia}
torque_amplitudes = {_fmt(dyn.torque_amplitudes)}
torque_frequencies = {_fmt(dyn.torque_frequencies)}
torque_phases = {_fmt(dyn.torque_phases)}

[initial]
attitude = {_fmt(s.attitude)}
angular_velocity = {_fmt(s.angular_velocity)}

[estimate]
attitude_error = {_fmt(s.attitude_error)}
omega_error = {_fmt(s.omega_error)}

[directions]
k_min = {s.k_min}
k_max = {s.k_max}
pool ={pool}
"""
