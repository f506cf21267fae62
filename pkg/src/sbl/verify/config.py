"""Run configuration: defaults, then a ``key = value`` file, then ``SBL_*`` env vars, then flags."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

from sbl.catalog import METRIC_PARAMS, METRICS

SUITES_3D = ("structure", "hodge", "rho", "ricci", "fiber", "lagrangian", "surface")
SUITES_2D = ("2d",)
SUITES = SUITES_3D + SUITES_2D

TOLERANCES_DUAL = {
    "structure": 1e-7,
    "scalar": 1e-8,
    "hodge": 1e-6,
    "laplacian": 1e-5,
    "rho": 1e-5,
    "ricci": 1e-6,
    "fiber": 1e-6,
    "fiber_rel": 1e-8,
    "lagrangian": 1e-6,
    "surface": 1e-5,
    "functional_rel": 1e-6,
}
# pure finite differences: one nested stencil per derivative order
TOLERANCES_FD = dict(TOLERANCES_DUAL, structure=1e-4, hodge=1e-4, laplacian=1e-2, rho=1e-3, ricci=1e-3, lagrangian=1e-4)


class ConfigError(ValueError):
    pass


def default_tolerances(backend: str) -> dict:
    return dict(TOLERANCES_FD if backend == "fd" else TOLERANCES_DUAL)


@dataclass(frozen=True)
class RunConfig:
    metric: str = "sphere3"
    c: float | None = None
    eps: float | None = None
    s: float = 1.0
    samples: int = 30
    seed: int = 0
    backend: str = "dual"
    suites: tuple = ()
    tol_overrides: dict = field(default_factory=dict)
    # surface / lagrangian selection
    surface: str | None = None
    a: float = 1.0
    t0: float | None = None
    branch: str = "-"

    def __post_init__(self):
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}; known: {', '.join(sorted(METRICS))}")
        if self.backend not in ("dual", "fd"):
            raise ConfigError(f"backend must be dual or fd, got {self.backend!r}")
        if self.s <= 0:
            raise ConfigError("s must be positive")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        if self.branch not in ("+", "-"):
            raise ConfigError("branch must be + or -")
        bad = set(self.tol_overrides) - set(TOLERANCES_DUAL)
        if bad:
            raise ConfigError(f"unknown tolerance names {sorted(bad)}; known: {sorted(TOLERANCES_DUAL)}")
        for name in self.suites:
            if name not in SUITES:
                raise ConfigError(f"unknown suite {name!r}; known: {', '.join(SUITES)}")
        allowed = SUITES_2D if self.dim == 2 else SUITES_3D
        wrong = [x for x in self.suites if x not in allowed]
        if wrong:
            raise ConfigError(f"suite(s) {', '.join(wrong)} need a {5 - self.dim}-dimensional base, metric {self.metric!r} is {self.dim}-dimensional")

    @property
    def metric_params(self) -> dict:
        keys = METRIC_PARAMS.get(self.metric, ())
        return {k: getattr(self, k) for k in keys if getattr(self, k) is not None}

    @property
    def dim(self) -> int:
        return METRICS[self.metric](**self.metric_params).dim

    @property
    def selected_suites(self) -> tuple:
        if self.suites:
            return tuple(self.suites)
        return SUITES_2D if self.dim == 2 else SUITES_3D

    @property
    def tolerances(self) -> dict:
        out = default_tolerances(self.backend)
        out.update(self.tol_overrides)
        return out

    def echo(self) -> dict:
        return {
            "metric": self.metric,
            "params": self.metric_params,
            "s": self.s,
            "dim": self.dim,
            "samples": self.samples,
            "seed": self.seed,
            "backend": self.backend,
            "suites": list(self.selected_suites),
            "tolerances": self.tolerances,
        }


_FLOATS = {"c", "eps", "s", "a", "t0"}
_INTS = {"samples", "seed"}
_STRS = {"metric", "backend", "surface", "branch"}


def parse_tol(text: str, into: dict) -> dict:
    """``1e-6`` sets the structure tolerance; ``name=value[,name=value]`` sets named ones."""
    text = text.strip()
    if "=" not in text:
        into["structure"] = float(text)
        return into
    for item in text.split(","):
        k, _, v = item.partition("=")
        into[k.strip()] = float(v)
    return into


def _coerce(values: dict) -> dict:
    out: dict = {}
    tol = dict(values.pop("tol_overrides", {}))
    for k, v in values.items():
        if v is None:
            continue
        try:
            if k in _FLOATS:
                out[k] = float(v)
            elif k in _INTS:
                out[k] = int(v)
            elif k in _STRS:
                out[k] = str(v)
            elif k == "suites":
                out[k] = tuple(x.strip() for x in v.split(",") if x.strip()) if isinstance(v, str) else tuple(v)
            elif k == "tol":
                parse_tol(str(v), tol)
            elif k.startswith("tol."):
                tol[k[4:]] = float(v)
            else:
                raise ConfigError(f"unknown config key {k!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {k!r}: {v!r}") from None
    out["tol_overrides"] = tol
    return out


def read_config_file(path: str) -> dict:
    """Line-oriented ``key = value``; ``#`` starts a comment."""
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    for num, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        k, _, v = line.partition("=")
        values[k.strip()] = v.strip()
    return values


def env_values(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out = {}
    for k, v in environ.items():
        if k.startswith("SBL_"):
            key = k[4:].lower()
            if key.startswith("tol_") and key != "tol_overrides":
                key = "tol." + key[4:]
            out[key] = v
    return out


def build_config(flags: dict, config_file: str | None = None, environ=None) -> RunConfig:
    """Merge sources; later ones win: file, env, flags (``None`` flags are ignored)."""
    merged: dict = {}
    tol: dict = {}
    for layer in (read_config_file(config_file) if config_file else {}, env_values(environ), flags):
        layer = _coerce(dict(layer))
        tol.update(layer.pop("tol_overrides"))
        merged.update(layer)
    merged["tol_overrides"] = tol
    known = {f.name for f in dataclasses.fields(RunConfig)}
    return RunConfig(**{k: v for k, v in merged.items() if k in known})
