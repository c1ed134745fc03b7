"""Plain-text experiment configuration: one ``key = value`` per line."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .errors import ConfigError
from .model import AtomDistribution
from .rng import MAX_SEED

__all__ = ["ExperimentConfig", "parse_config", "parse_assignments", "load_config", "config_hash"]


def _int(text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise ConfigError(f"expected an integer, got {text!r}") from None


def _float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"expected a finite number, got {text!r}")
    return value


def _list(conv):
    def parse(text: str):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ConfigError("empty list")
        return tuple(conv(t) for t in items)
    return parse


def _optional_float(text: str):
    return None if text.strip().lower() == "none" else _float(text)


def _intervals(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            lo, hi = item.split(":")
        except ValueError:
            raise ConfigError(f"interval must look like lo:hi, got {item!r}") from None
        out.append((_float(lo), _float(hi)))
    if not out:
        raise ConfigError("empty interval list")
    return tuple(out)


def _atoms(text: str) -> str:
    return AtomDistribution.parse(text).kind.value


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_PARSERS = {
    "n": _int,
    "n_list": _list(_int),
    "a": _float,
    "atoms": _atoms,
    "trials": _int,
    "seed": _int,
    "truncation_exponent": _optional_float,
    "intervals": _intervals,
    "n_intervals": _int,
    "width": _float,
    "width_factor": _float,
    "margin": _float,
    "delta": _float,
    "x": _float,
    "eta": _float,
    "eta_list": _list(_float),
    "eta_floor": _float,
    "eps_list": _list(_float),
    "grid_lo": _float,
    "grid_hi": _float,
    "grid_points": _int,
    "bins": _int,
    "h": _float,
    "dump_matrix": _bool,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """User settings; ``None`` means "use the experiment's default".

    Only ``seed`` (0) and ``truncation_exponent`` (5.0; ``None`` disables
    truncation) have global defaults. Ranges are validated on construction.
    """

    n: int | None = None
    n_list: tuple[int, ...] | None = None
    a: float | None = None
    atoms: str | None = None
    trials: int | None = None
    seed: int = 0
    truncation_exponent: float | None = 5.0
    intervals: tuple[tuple[float, float], ...] | None = None
    n_intervals: int | None = None
    width: float | None = None
    width_factor: float | None = None
    margin: float | None = None
    delta: float | None = None
    x: float | None = None
    eta: float | None = None
    eta_list: tuple[float, ...] | None = None
    eta_floor: float | None = None
    eps_list: tuple[float, ...] | None = None
    grid_lo: float | None = None
    grid_hi: float | None = None
    grid_points: int | None = None
    bins: int | None = None
    h: float | None = None
    dump_matrix: bool | None = None

    def __post_init__(self):
        for n in ([self.n] if self.n is not None else []) + list(self.n_list or ()):
            if n < 2 or n % 2:
                raise ConfigError(f"matrix size must be even and >= 2, got {n}")
        if self.a is not None and self.a < 0:
            raise ConfigError(f"a must be >= 0, got {self.a}")
        if self.trials is not None and self.trials < 0:
            raise ConfigError(f"trials must be >= 0, got {self.trials}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        for key in ("width", "width_factor", "delta", "eta", "eta_floor", "h"):
            value = getattr(self, key)
            if value is not None and not value > 0:
                raise ConfigError(f"{key} must be positive, got {value}")
        for key in ("eta_list",):
            if any(v <= 0 for v in getattr(self, key) or ()):
                raise ConfigError(f"{key} entries must be positive")
        if any(v < 0 for v in self.eps_list or ()):
            raise ConfigError("eps_list entries must be >= 0")
        if self.margin is not None and self.margin < 0:
            raise ConfigError(f"margin must be >= 0, got {self.margin}")
        if any(hi <= lo for lo, hi in self.intervals or ()):
            raise ConfigError("intervals must have lo < hi")
        for key in ("n_intervals", "grid_points", "bins"):
            value = getattr(self, key)
            if value is not None and value < 1:
                raise ConfigError(f"{key} must be >= 1, got {value}")

    def with_values(self, **values) -> "ExperimentConfig":
        return replace(self, **values)


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value)
        except ConfigError as exc:
            raise ConfigError(f"line {lineno} ({key}): {exc}") from None
    return replace(base or ExperimentConfig(), **values)


def parse_assignments(items) -> dict:
    """Parse ``key=value`` strings from the command line."""
    return {k: v for k, v in (_split_assignment(i) for i in items)}


def _split_assignment(item: str):
    if "=" not in item:
        raise ConfigError(f"expected key=value, got {item!r}")
    key, value = (p.strip() for p in item.split("=", 1))
    if key not in _PARSERS:
        raise ConfigError(f"unknown key {key!r}")
    return key, _PARSERS[key](value)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def _canonical(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return "[" + ",".join(_canonical(v) for v in value) + "]"
    return str(value)


def config_hash(experiment: str, settings: dict) -> str:
    """SHA-256 over the experiment name and its fully resolved settings."""
    lines = [f"experiment={experiment}"]
    lines += [f"{k}={_canonical(settings[k])}" for k in sorted(settings)]
    return hashlib.sha256("\n".join(lines).encode()).hexdigest()


KNOWN_KEYS = tuple(f.name for f in fields(ExperimentConfig))
