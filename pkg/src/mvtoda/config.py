"""Run configuration: JSON files, presets and flag overrides.

A config file is a JSON object.  Every key is optional; flags given on the
command line win over the file, which wins over the defaults below::

    {
      "preset": "hermite2",
      "weight": {"type": "hermite_A", "N": 2, "a_params": [1.0],
                 "deformation": "casimir", "deformation_scale": 1.0, "t": 0.0},
      "nmax": 12,
      "quad_points": null,
      "t_grid": {"t0": 0.0, "t1": 0.5, "steps": 200},
      "fd_h": 1e-4,
      "tolerances": {"pearson": 1e-9},
      "out": "family.json"
    }

``weight.type`` is ``"hermite_A"`` (the Hermite-type family, parameters
``a_params``) or ``"custom_moments"``: a matrix polynomial base weight given
by ``base_coeffs`` (list of ``N x N`` coefficient matrices) whose moments
against ``exp(-x^2)`` (or Lebesgue measure on a finite ``support``) define the
inner product.  ``deformation`` is ``"casimir"``, ``"x"``, ``"x2"`` or a list
of ``N x N`` coefficient matrices ``[Lambda_0, Lambda_1, ...]``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import ConfigError, MvtodaError
from .hermite import HermiteParams, hermite_weight
from .polynomial import MatrixPolynomial
from .presets import PRESETS, symbol
from .weight import WeightSpec

DEFAULT_TOLERANCES = {
    "orthogonality": 1e-9,
    "recurrence": 1e-9,
    "pearson": 1e-9,
    "leading_band": 1e-10,
    "toda_fd": 5e-6,
    "hdot_fd": 5e-7,
    "hdot_two_sided": 1e-9,
    "kdot_fd": 5e-6,
    "pdot_fd": 5e-6,
    "compose": 1e-9,
    "lax_fd": 5e-6,
    "lax_algebra": 1e-12,
    "hermite_oracle": 1e-8,
    "conjugation_weight": 1e-11,
    "conjugation_poly": 1e-9,
    "evolve_endpoint": 1e-7,
}

WEIGHT_TYPES = ("hermite_A", "custom_moments")

PRESET_WEIGHTS = {
    "hermite2": {"type": "hermite_A", "N": 2, "a_params": [1.0], "deformation": "casimir"},
    "hermiteN": {"type": "hermite_A", "N": 3, "a_params": [1.0, 1.0], "deformation": "casimir"},
    "scalar": {"type": "hermite_A", "N": 1, "a_params": [], "deformation": "x"},
    "scalar-x2": {"type": "hermite_A", "N": 1, "a_params": [], "deformation": "x2"},
}


@dataclass
class RunConfig:
    preset: Optional[str] = "hermite2"
    weight: dict = field(default_factory=lambda: dict(PRESET_WEIGHTS["hermite2"]))
    nmax: int = 12
    quad_points: Optional[int] = None
    t0: float = 0.0
    t1: float = 0.5
    steps: int = 200
    fd_h: float = 1e-4
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    out: Optional[str] = None
    header: bool = True

    @property
    def t(self) -> float:
        return float(self.weight.get("t", self.t0))

    def tol(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("header")
        return d


def _num(value, name, kind=float):
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(name, f"expected a number, got {value!r}") from None
    if kind is float and not math.isfinite(out):
        raise ConfigError(name, "must be finite")
    return out


def _matrices(value, name, size=None) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError(name, "expected a list of square matrices") from None
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] == 0:
        raise ConfigError(name, f"expected a list of square matrices, got shape {arr.shape}")
    if size is not None and arr.shape[1] != size:
        raise ConfigError(name, f"matrices must be {size}x{size}")
    return arr


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.preset is not None and cfg.preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {cfg.preset!r}; expected one of {list(PRESETS)}")
    if not isinstance(cfg.weight, dict):
        raise ConfigError("weight", "must be an object")
    kind = cfg.weight.get("type", "hermite_A")
    if kind not in WEIGHT_TYPES:
        raise ConfigError("weight.type", f"unknown weight type {kind!r}; expected one of {list(WEIGHT_TYPES)}")
    cfg.nmax = _num(cfg.nmax, "nmax", int)
    if cfg.nmax < 1:
        raise ConfigError("nmax", "must be >= 1")
    if cfg.quad_points is not None:
        cfg.quad_points = _num(cfg.quad_points, "quad_points", int)
        if cfg.quad_points < 1:
            raise ConfigError("quad_points", "must be >= 1")
    cfg.t0 = _num(cfg.t0, "t_grid.t0")
    cfg.t1 = _num(cfg.t1, "t_grid.t1")
    cfg.steps = _num(cfg.steps, "t_grid.steps", int)
    cfg.fd_h = _num(cfg.fd_h, "fd_h")
    if cfg.fd_h <= 0:
        raise ConfigError("fd_h", "must be > 0")
    for key, val in cfg.tolerances.items():
        if key not in DEFAULT_TOLERANCES:
            raise ConfigError(f"tolerances.{key}", "unknown tolerance name")
        if _num(val, f"tolerances.{key}") <= 0:
            raise ConfigError(f"tolerances.{key}", "must be > 0")
    if "t" in cfg.weight:
        _num(cfg.weight["t"], "weight.t")
    bandwidth = symbol_for(cfg).degree
    if cfg.nmax < bandwidth:
        raise ConfigError("nmax", f"must be >= the bandwidth {bandwidth}")
    return cfg


def _hermite_params(wd: dict) -> HermiteParams:
    n = _num(wd.get("N", len(wd.get("a_params", [])) + 1), "weight.N", int)
    a = wd.get("a_params", [1.0] * (n - 1))
    if not isinstance(a, (list, tuple)):
        raise ConfigError("weight.a_params", "must be a list")
    if len(a) != n - 1:
        raise ConfigError("weight.a_params", f"needs N-1 = {n - 1} entries, got {len(a)}")
    return HermiteParams(tuple(_num(v, "weight.a_params") for v in a))


def hermite_params_for(cfg: RunConfig) -> Optional[HermiteParams]:
    if cfg.weight.get("type", "hermite_A") != "hermite_A":
        return None
    return _hermite_params(cfg.weight)


def _size(cfg: RunConfig) -> int:
    wd = cfg.weight
    if wd.get("type", "hermite_A") == "hermite_A":
        return _hermite_params(wd).N
    return _matrices(wd.get("base_coeffs"), "weight.base_coeffs").shape[1]


def symbol_for(cfg: RunConfig) -> MatrixPolynomial:
    wd = cfg.weight
    d = wd.get("deformation", "casimir")
    size = _size(cfg)
    scale = _num(wd.get("deformation_scale", 1.0), "weight.deformation_scale")
    if isinstance(d, str):
        p = hermite_params_for(cfg)
        if d == "casimir" and p is None:
            raise ConfigError("weight.deformation", "casimir needs a hermite_A weight")
        try:
            lam = symbol(d, size, p)
        except MvtodaError as exc:
            raise ConfigError("weight.deformation", str(exc)) from None
    else:
        lam = MatrixPolynomial(_matrices(d, "weight.deformation", size))
    return lam if scale == 1.0 else scale * lam


def weight_for(cfg: RunConfig) -> WeightSpec:
    """Weight described by the config, deformed by :func:`symbol_for`."""
    wd = cfg.weight
    kind = wd.get("type", "hermite_A")
    lam = symbol_for(cfg)
    if kind == "hermite_A":
        return hermite_weight(_hermite_params(wd), lam)
    if kind == "custom_moments":
        coeffs = _matrices(wd.get("base_coeffs"), "weight.base_coeffs")
        base_poly = MatrixPolynomial(coeffs)
        support = wd.get("support")
        if support is None:
            return WeightSpec(coeffs.shape[1], base_poly, lam, base_degree=base_poly.degree,
                              description="custom polynomial weight times exp(-x^2)")
        if not (isinstance(support, (list, tuple)) and len(support) == 2):
            raise ConfigError("weight.support", "expected [a, b]")
        a, b = (_num(v, "weight.support") for v in support)
        return WeightSpec(coeffs.shape[1], base_poly, lam, support=(a, b), gaussian=False,
                          base_degree=base_poly.degree, description=f"custom polynomial weight on [{a}, {b}]")
    raise ConfigError("weight.type", f"unknown weight type {kind!r}; expected 'hermite_A' or 'custom_moments'")


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Defaults, then the preset's weight, then the file, then ``overrides`` (flags)."""
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config", "top level must be an object")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    known = {"preset", "weight", "nmax", "quad_points", "t_grid", "fd_h", "tolerances", "out"}
    for key in raw:
        if key not in known:
            raise ConfigError(key, "unknown field")

    cfg = RunConfig()
    preset = overrides.get("preset", raw.get("preset", None if "weight" in raw else "hermite2"))
    if preset is not None and preset not in PRESET_WEIGHTS:
        raise ConfigError("preset", f"unknown preset {preset!r}; expected one of {list(PRESETS)}")
    cfg.preset = preset
    weight = dict(PRESET_WEIGHTS[preset]) if preset else {}
    if "weight" in raw:
        if not isinstance(raw["weight"], dict):
            raise ConfigError("weight", "must be an object")
        weight.update(raw["weight"])
    for key in ("a_params", "deformation", "deformation_scale", "t"):
        if key in overrides:
            weight[key] = overrides[key]
    if "a_params" in overrides and weight.get("type", "hermite_A") == "hermite_A":
        weight["N"] = len(overrides["a_params"]) + 1
    cfg.weight = weight
    grid = raw.get("t_grid", {})
    if not isinstance(grid, dict):
        raise ConfigError("t_grid", "must be an object")
    for key in ("t0", "t1", "steps"):
        if key in grid:
            setattr(cfg, key, grid[key])
    for key in ("nmax", "quad_points", "fd_h", "out"):
        if key in raw:
            setattr(cfg, key, raw[key])
    if "tolerances" in raw:
        if not isinstance(raw["tolerances"], dict):
            raise ConfigError("tolerances", "must be an object")
        cfg.tolerances = {**DEFAULT_TOLERANCES, **raw["tolerances"]}
    for key in ("nmax", "quad_points", "t0", "t1", "steps", "fd_h", "out", "header"):
        if key in overrides:
            setattr(cfg, key, overrides[key])
    return validate(cfg)


def with_weight(cfg: RunConfig, **changes) -> RunConfig:
    return replace(cfg, weight={**cfg.weight, **changes})
