"""Run configuration: the group, the structure, tolerances and the portrait grid.

Loaded from a JSON document. Omitted fields take defaults and the effective
configuration is echoed in every command output.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .errors import ConfigError
from .group import GroupSpec, Structure, make_group_spec, make_structure
from .maxwell import EPS_LINE
from .ode import Tolerances
from .pendulum import CAP_FACTOR


@dataclass(frozen=True)
class ToleranceConfig:
    abs: float = 1e-10
    rel: float = 1e-10
    event: float = 1e-12
    line: float = EPS_LINE
    cap_factor: float = CAP_FACTOR
    max_norm: float = 1e8

    def integrator(self) -> Tolerances:
        return Tolerances(atol=self.abs, rtol=self.rel, event=self.event, max_norm=self.max_norm)


@dataclass(frozen=True)
class GridConfig:
    phi_min: float = -math.pi
    phi_max: float = math.pi
    phi_n: int = 41
    r_min: float = -3.0
    r_max: float = 3.0
    r_n: int = 31


@dataclass(frozen=True)
class Config:
    theta: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 0.0), (0.0, -2.0))
    eta: tuple[float, float] = (1.0, 1.0)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    grid: GridConfig = field(default_factory=GridConfig)

    def group(self) -> GroupSpec:
        return make_group_spec(self.theta)

    def structure(self, spec: Optional[GroupSpec] = None) -> Structure:
        return make_structure(spec if spec is not None else self.group(), self.eta)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["theta"] = [list(row) for row in self.theta]
        d["eta"] = list(self.eta)
        return d


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {json.dumps(value)}")
    x = float(value)
    if not math.isfinite(x):
        raise ConfigError(f"{where}: must be finite")
    return x


def _section(cls, data: Any, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: expected an object")
    known = {f.name: f for f in fields(cls)}
    kwargs = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"{where}.{key}: unknown field")
        if known[key].type in ("int", int):
            if isinstance(value, bool) or not isinstance(value, int) or value < 0:
                raise ConfigError(f"{where}.{key}: expected a nonnegative integer, got {json.dumps(value)}")
            kwargs[key] = value
        else:
            kwargs[key] = _number(value, f"{where}.{key}")
    return cls(**kwargs)


def config_from_dict(data: Any) -> Config:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be an object")
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key == "theta":
            if not (isinstance(value, list) and len(value) == 2 and all(isinstance(r, list) and len(r) == 2 for r in value)):
                raise ConfigError("theta: expected a 2x2 array [[a, b], [c, d]]")
            kwargs["theta"] = tuple(tuple(_number(x, f"theta[{i}][{j}]") for j, x in enumerate(row)) for i, row in enumerate(value))
        elif key == "eta":
            if not (isinstance(value, list) and len(value) == 2):
                raise ConfigError("eta: expected a 2-vector [e1, e2]")
            kwargs["eta"] = tuple(_number(x, f"eta[{i}]") for i, x in enumerate(value))
        elif key == "tolerances":
            kwargs["tolerances"] = _section(ToleranceConfig, value, "tolerances")
        elif key == "grid":
            kwargs["grid"] = _section(GridConfig, value, "grid")
        else:
            raise ConfigError(f"{key}: unknown field")
    cfg = Config(**kwargs)
    t = cfg.tolerances
    for name in ("abs", "rel", "event", "line", "cap_factor", "max_norm"):
        if not getattr(t, name) > 0:
            raise ConfigError(f"tolerances.{name}: must be positive")
    return cfg


def load_config(path: Optional[str | Path]) -> Config:
    """Read a JSON config; None gives the defaults. Errors carry line/field information."""
    if path is None:
        return Config()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)
