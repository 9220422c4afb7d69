"""Run configuration: one JSON document describing a full calculation."""

from dataclasses import dataclass, field, fields, asdict
import hashlib
import json
import math

import numpy as np

from .errors import ConfigError, SchemaError
from .model1d import BasisSpec, PotentialParams
from .stabgraph import ETA_RANGE


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    step: float

    def values(self):
        n = int(round((self.stop - self.start) / self.step))
        return np.round(self.start + self.step * np.arange(n + 1), 12)


@dataclass
class RunConfig:
    potential: PotentialParams = field(default_factory=PotentialParams)
    basis: BasisSpec = field(default_factory=lambda: BasisSpec(parity="even"))
    eta_grid: GridSpec = GridSpec(-1.0, 1.0, 0.01)
    window_center: float = 1.5388
    window_half_width: float = 0.15
    crossing_span: tuple = (-1.0, 1.0)
    refine_spacing: float = 1e-3
    refine_rounds: int = 3
    E0: float = 0.0
    theta_grid: GridSpec = GridSpec(0.005, 0.6, 0.005)
    delta_eta: tuple = (0.0,)
    extrapolation_window: tuple = None
    extrapolation_degree: int = 2
    benchmark_theta_grid: GridSpec = GridSpec(0.0, 0.4, 0.02)
    benchmark_guess: float = None
    compare_benchmark: bool = False

    def as_dict(self):
        d = asdict(self)
        d["potential"] = self.potential.as_dict()
        d["basis"] = self.basis.as_dict()
        for k in ("crossing_span", "delta_eta", "extrapolation_window"):
            if d[k] is not None:
                d[k] = list(d[k])
        return d

    def digest(self):
        """sha256 of the canonical JSON form; identifies a configuration."""
        text = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def metadata(self):
        return {"config_hash": self.digest(), "x0": self.potential.x0}


def _number(d, key, path, positive=False, nonneg=False):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{path}{key}: expected a finite number, got {v!r}")
    if positive and v <= 0:
        raise ConfigError(f"{path}{key}: must be positive")
    if nonneg and v < 0:
        raise ConfigError(f"{path}{key}: must be non-negative")
    return float(v)


def _grid(d, path):
    if not isinstance(d, dict) or set(d) != {"start", "stop", "step"}:
        raise ConfigError(f"{path}: expected an object with start, stop and step")
    g = GridSpec(_number(d, "start", path + "."), _number(d, "stop", path + "."),
                 _number(d, "step", path + ".", positive=True))
    if g.stop < g.start:
        raise ConfigError(f"{path}: stop lies below start")
    return g


def _pair(v, path):
    if (not isinstance(v, list) or len(v) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v)
            or v[1] < v[0]):
        raise ConfigError(f"{path}: expected [low, high]")
    return (float(v[0]), float(v[1]))


def _build(cls, d, path):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object")
    names = {f.name for f in fields(cls)}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


def from_dict(d):
    """Validated RunConfig; raises ConfigError naming the offending field."""
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}")
    kw = {}
    if "potential" in d:
        kw["potential"] = _build(PotentialParams, d["potential"], "potential")
    if "basis" in d:
        kw["basis"] = _build(BasisSpec, d["basis"], "basis")
    for key in ("eta_grid", "theta_grid", "benchmark_theta_grid"):
        if key in d:
            kw[key] = _grid(d[key], key)
    for key in ("window_center", "E0", "refine_spacing", "window_half_width"):
        if key in d:
            kw[key] = _number(d, key, "", positive=key in ("refine_spacing", "window_half_width"))
    if "refine_rounds" in d:
        v = d["refine_rounds"]
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise ConfigError("refine_rounds: expected a non-negative integer")
        kw["refine_rounds"] = v
    if "crossing_span" in d:
        kw["crossing_span"] = _pair(d["crossing_span"], "crossing_span")
    if "delta_eta" in d:
        v = d["delta_eta"]
        if not isinstance(v, list) or not v or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
            raise ConfigError("delta_eta: expected a non-empty list of numbers")
        kw["delta_eta"] = tuple(float(x) for x in v)
    if d.get("extrapolation_window") is not None:
        kw["extrapolation_window"] = _pair(d["extrapolation_window"], "extrapolation_window")
    if "extrapolation_degree" in d:
        v = d["extrapolation_degree"]
        if v not in (1, 2, 3) or isinstance(v, bool):
            raise ConfigError("extrapolation_degree: must be 1, 2 or 3")
        kw["extrapolation_degree"] = v
    if d.get("benchmark_guess") is not None:
        kw["benchmark_guess"] = _number(d, "benchmark_guess", "")
    if "compare_benchmark" in d:
        if not isinstance(d["compare_benchmark"], bool):
            raise ConfigError("compare_benchmark: expected true or false")
        kw["compare_benchmark"] = d["compare_benchmark"]
    cfg = RunConfig(**kw)
    _check(cfg)
    return cfg


def _check(cfg):
    g = cfg.eta_grid
    if g.start < ETA_RANGE[0] or g.stop > ETA_RANGE[1]:
        raise ConfigError(f"eta_grid: must lie within {list(ETA_RANGE)}")
    t = cfg.theta_grid
    if t.start <= 0 or t.stop >= math.pi / 4:
        raise ConfigError("theta_grid: must lie inside (0, pi/4)")
    b = cfg.benchmark_theta_grid
    if b.start < 0 or b.stop >= math.pi / 4:
        raise ConfigError("benchmark_theta_grid: must lie inside [0, pi/4)")
    if cfg.extrapolation_window is not None:
        lo, hi = cfg.extrapolation_window
        if lo < t.start or hi > t.stop:
            raise ConfigError("extrapolation_window: must lie inside theta_grid")


def load(path):
    """Read and validate a JSON configuration file.

    Syntax errors surface as SchemaError carrying the line number.
    """
    with open(path) as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(exc.msg, line=exc.lineno) from None
    return from_dict(d)
