"""Experiment configuration files (YAML) and their validation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from .errors import ConfigError, ModelError
from .manifold import GradientDensity

EXPERIMENT_IDS = (
    "curvature-scan",
    "conformal-involution",
    "constant-classifier",
    "cartan-hadamard",
    "conjugate-radius",
    "riccati-trace",
    "index-form",
    "synge",
    "mean-curvature",
    "diameter",
    "index-ode",
    "pinching-window",
    "killing",
)

_FIELDS = ("model", "model_params", "f", "experiment", "dt", "t_max", "samples", "seed", "tolerance",
           "killing_field", "options", "out_dir", "name")


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    experiment: str
    model_params: dict = field(default_factory=dict)
    f: Optional[object] = None  # None keeps the model's density; 0 removes it; a string is an expression
    dt: Optional[float] = None
    t_max: Optional[float] = None
    samples: Optional[int] = None
    seed: int = 0
    tolerance: Optional[float] = None
    killing_field: Optional[object] = None
    options: dict = field(default_factory=dict)
    out_dir: Optional[str] = None
    name: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.model, str) or not self.model:
            raise ConfigError("model must be a non-empty string", "bad_model")
        if self.experiment not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; expected one of {list(EXPERIMENT_IDS)}",
                              "unknown_experiment")
        for key in ("dt", "t_max", "tolerance"):
            val = getattr(self, key)
            if val is not None and not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ConfigError(f"{key} must be a positive number, got {val!r}", "bad_number")
        if self.samples is not None and not (isinstance(self.samples, int) and self.samples > 0):
            raise ConfigError(f"samples must be a positive integer, got {self.samples!r}", "bad_number")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}", "bad_number")
        if not isinstance(self.model_params, dict) or not isinstance(self.options, dict):
            raise ConfigError("model_params and options must be mappings", "bad_mapping")
        for key, val in self.options.items():
            if "tol" in key and not (isinstance(val, (int, float)) and val > 0):
                raise ConfigError(f"option {key} must be a positive tolerance, got {val!r}", "bad_number")

    @property
    def label(self) -> str:
        return self.name or f"{self.experiment}-{self.model}"

    def with_overrides(self, **kw) -> "ExperimentConfig":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def as_dict(self) -> dict:
        return asdict(self)


def config_from_mapping(data) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("a config must be a mapping", "bad_mapping")
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise ConfigError(f"unknown fields {unknown}", "unknown_field")
    for key in ("model", "experiment"):
        if key not in data:
            raise ConfigError(f"missing field {key!r}", "missing_field")
    data = dict(data)
    data["model"] = str(data["model"])
    for key in ("model_params", "options"):
        if data.get(key) is None:
            data.pop(key, None)
    return ExperimentConfig(**data)


def _load_yaml(path):
    try:
        with open(path) as fh:
            return yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"no such file: {path}", "missing_file") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}", "bad_yaml") from exc


def load_config(path) -> ExperimentConfig:
    return config_from_mapping(_load_yaml(path))


def load_manifest(path):
    """Configs listed by a manifest: ``configs`` entries are file paths (relative to it) or inline mappings."""
    data = _load_yaml(path)
    if data is None:
        return []
    if not isinstance(data, dict) or not isinstance(data.get("configs", []), list):
        raise ConfigError("a manifest is a mapping with a 'configs' list", "bad_manifest")
    base = Path(path).parent
    out = []
    for entry in data.get("configs") or []:
        if isinstance(entry, str):
            out.append(load_config(base / entry))
        else:
            out.append(config_from_mapping(entry))
    return out


def density_from_expression(expr, dim) -> Optional[GradientDensity]:
    """GradientDensity from an expression in x1..xn (aliases x, y, z and r, th, ph); 0 means none."""
    import sympy

    if isinstance(expr, (int, float)) and expr == 0:
        return None
    xs = sympy.symbols(f"x1:{dim + 1}", real=True)
    names = {f"x{i + 1}": s for i, s in enumerate(xs)}
    for alias in (("x", "y", "z"), ("r", "th", "ph")):
        names.update(dict(zip(alias, xs)))
    try:
        e = sympy.sympify(str(expr), locals=names)
    except (sympy.SympifyError, TypeError) as exc:
        raise ConfigError(f"cannot parse f = {expr!r}", "bad_expression") from exc
    if e.free_symbols - set(xs):
        raise ConfigError(f"f = {expr!r} has unknown symbols", "bad_expression")
    if e == 0:
        return None
    grad = [sympy.diff(e, x) for x in xs]
    hess = [[sympy.diff(e, a, b) for b in xs] for a in xs]
    f = sympy.lambdify(xs, e, "numpy")
    fg = sympy.lambdify(xs, grad, "numpy")
    fh = sympy.lambdify(xs, hess, "numpy")
    return GradientDensity(
        lambda p: float(f(*p)),
        lambda p: np.array(fg(*p), dtype=float),
        lambda p: np.array(fh(*p), dtype=float),
    )


def build_manifold(cfg: ExperimentConfig):
    from . import models

    try:
        M = models.build_model(cfg.model, **cfg.model_params)
    except ModelError:
        raise
    except Exception as exc:  # noqa: BLE001 - any construction failure is a model error
        raise ModelError(f"cannot build {cfg.model!r}: {exc}", "bad_model") from exc
    if cfg.f is None:
        return M
    density = density_from_expression(cfg.f, M.dim)
    M = models.with_density(M, density, name=M.name if density is None else f"{M.name}+f", u_range=(1.0, 1.0))
    if density is not None:
        M = models.with_density(M, density, name=M.name, u_range=models.dense_u_range(M))
    return M
