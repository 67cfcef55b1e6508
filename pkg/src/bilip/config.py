"""Run configurations: one frozen dataclass per subcommand, strict about keys."""

from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, fields, replace
from typing import Any

from .action import GOLDEN
from .errors import ConfigError


def _positive(cfg, *names):
    for n in names:
        v = getattr(cfg, n)
        if not v > 0:
            raise ConfigError(f"{n} must be positive, got {v!r}")


def _at_least(cfg, name, lo):
    v = getattr(cfg, name)
    if v < lo:
        raise ConfigError(f"{name} must be at least {lo}, got {v!r}")


def _choice(cfg, name, options):
    v = getattr(cfg, name)
    if v not in options:
        raise ConfigError(f"{name} must be one of {sorted(options)}, got {v!r}")


class _Base:
    def validate(self):
        pass

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict | None):
        d = dict(d or {})
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown {cls.command} config keys: {', '.join(unknown)}")
        coerced = {}
        for f in fields(cls):
            if f.name in d:
                coerced[f.name] = _coerce(f, d[f.name])
        cfg = cls(**coerced)
        cfg.validate()
        return cfg

    def with_overrides(self, pairs: list[str]):
        upd = {}
        known = {f.name: f for f in fields(self)}
        for p in pairs:
            if "=" not in p:
                raise ConfigError(f"override {p!r} is not key=value")
            k, v = p.split("=", 1)
            k = k.strip()
            if k not in known:
                raise ConfigError(f"unknown {self.command} config key: {k}")
            upd[k] = _coerce(known[k], _parse_value(v))
        cfg = replace(self, **upd)
        cfg.validate()
        return cfg


def _parse_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _coerce(f, value):
    default = f.default if f.default is not MISSING else None
    kind = type(default)
    try:
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise TypeError
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind is str:
            if not isinstance(value, str):
                raise TypeError
            return value
    except (TypeError, ValueError):
        raise ConfigError(f"{f.name} expects {kind.__name__}, got {value!r}") from None
    return value


@dataclass(frozen=True)
class TheoremCConfig(_Base):
    command = "theorem-c"
    family: str = "lorentzian"
    width: float = 128.0
    n_max: int = 64
    delta: float = 1.0 / 3.0
    eps0: float = 1.0
    eps_rate: float = 0.5
    n_probe: int = 48
    window_lo: int = -4
    window_hi: int = 4
    gap_threshold: float = 0.5
    tail_tol: float = 0.05
    limit_tol: float = 2e-2
    sum_tol: float = 1e-12
    conj_tol: float = 1e-10
    mesh: int = 10_000

    def validate(self):
        _choice(self, "family", {"lorentzian", "power"})
        _positive(self, "width", "eps0", "eps_rate", "gap_threshold", "tail_tol", "limit_tol",
                  "sum_tol", "conj_tol")
        _at_least(self, "n_max", 8)
        _at_least(self, "mesh", 2)
        if self.n_max % 2:
            raise ConfigError("n_max must be even")
        if not 0 <= self.delta < 1:
            raise ConfigError("delta must lie in [0, 1)")
        if self.eps_rate > 1:
            raise ConfigError("eps_rate must not exceed 1")
        if self.window_lo > self.window_hi:
            raise ConfigError("empty shift window")
        if self.n_probe % 2:
            raise ConfigError("n_probe must be even")


@dataclass(frozen=True)
class ExtendConfig(_Base):
    command = "extend"
    mode: str = "interval"
    # interval driver
    eps: float = -10.0
    c: float = 0.5
    # seed and truncation
    slope: float = 2.0
    n_max: int = 30
    tile_floor: float = 1e-13
    score_tile: int = 3
    score_floor: float = 0.5
    # circle action
    action: str = "schottky"
    multiplier: float = 4.0
    half_width: float = 0.11
    radius: int = 8
    gap_radius: int = 8
    stabilizer_radius: int = 6
    # audits
    mesh: int = 1 << 14
    commute_mesh: int = 10_000
    interval_commute_tol: float = 1e-9
    circle_commute_tol: float = 1e-8
    consistency_tol: float = 1e-9
    rel_tol: float = 1e-6
    fault_threshold: float = 1e-3

    def validate(self):
        _choice(self, "mode", {"interval", "circle"})
        _choice(self, "action", {"schottky", "golden"})
        _positive(self, "slope", "tile_floor", "score_floor", "multiplier", "half_width",
                  "interval_commute_tol", "circle_commute_tol", "consistency_tol", "rel_tol",
                  "fault_threshold")
        for n, lo in (("n_max", 1), ("radius", 1), ("gap_radius", 1), ("stabilizer_radius", 1),
                      ("mesh", 16), ("commute_mesh", 16), ("score_tile", 0)):
            _at_least(self, n, lo)
        if self.eps == 0:
            raise ConfigError("eps must be nonzero")


@dataclass(frozen=True)
class GHConfig(_Base):
    command = "gh"
    mode: str = "coboundary"
    alpha: float = GOLDEN
    amplitude: float = 0.1
    drift: float = 0.3
    x0: float = 0.0
    orbit_length: int = 10_000
    bins: int = 256
    radius: int = 10
    slope_threshold: float = 1e-3
    sup_bound: float = 0.2
    recovery_tol: float = 1e-3
    residual_tol: float = 5e-3
    spread_tol: float = 0.05
    max_empty: float = 0.05
    # derivative-cocycle fixture: psi is the hyperbolic Moebius map with these data
    psi_attracting: float = 0.3
    psi_repelling: float = 0.7
    psi_multiplier: float = 1.2
    deriv_mesh: int = 1 << 12
    deriv_radius: int = 6
    derivative_tol: float = 1e-6

    def validate(self):
        _choice(self, "mode", {"coboundary", "drift", "derivative"})
        _positive(self, "slope_threshold", "sup_bound", "recovery_tol", "residual_tol", "spread_tol",
                  "max_empty", "psi_multiplier", "derivative_tol")
        for n, lo in (("orbit_length", 16), ("bins", 4), ("radius", 2), ("deriv_mesh", 16),
                      ("deriv_radius", 2)):
            _at_least(self, n, lo)


@dataclass(frozen=True)
class SelftestConfig(_Base):
    command = "selftest"
    seed: int = 20240617
    relation_cases: int = 100
    skew_cases: int = 200
    inverse_cases: int = 200
    relation_tol: float = 1e-10
    skew_tol: float = 1e-10
    shift_tol: float = 1e-12
    inverse_tol: float = 1e-11
    variation_tol: float = 1e-5
    tiling_tol: float = 1e-12

    def validate(self):
        _positive(self, "relation_tol", "skew_tol", "shift_tol", "inverse_tol", "variation_tol",
                  "tiling_tol")
        for n in ("relation_cases", "skew_cases", "inverse_cases"):
            _at_least(self, n, 1)


CONFIGS = {c.command: c for c in (TheoremCConfig, ExtendConfig, GHConfig, SelftestConfig)}


def load_config(command: str, path: str | None, overrides: list[str] | None = None):
    cls = CONFIGS[command]
    data = {}
    if path:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"malformed JSON in {path}: {e}") from None
        except OSError as e:
            raise ConfigError(f"cannot read {path}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
    return cls.from_dict(data).with_overrides(list(overrides or []))


def defaults_markdown() -> str:
    """Reference page of every option and its default."""
    lines = ["# Configuration defaults", ""]
    for name, cls in CONFIGS.items():
        lines += [f"## {name}", "", "| key | default |", "|---|---|"]
        for k, v in cls().to_dict().items():
            lines.append(f"| `{k}` | `{v!r}` |")
        lines.append("")
    return "\n".join(lines)
