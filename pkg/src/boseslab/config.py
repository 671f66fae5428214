"""Line-based ``key = value`` configuration files.

'#' starts a comment, physical keys are mandatory, unknown and duplicate
keys are rejected with their line number.  :func:`render_config` is the
exact inverse of :func:`parse_config`, which the run manifests rely on.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

from .scenario import SCENARIO_DEFAULTS, Scenario, build_scenario

__all__ = ["Config", "ConfigParseError", "parse_config", "render_config"]


class ConfigParseError(ValueError):
    """Malformed configuration text; carries the offending line number."""

    def __init__(self, line_no: int | None, message: str):
        self.line_no = line_no
        where = f"line {line_no}: " if line_no is not None else ""
        super().__init__(where + message)


@dataclass
class Config:
    """Fully resolved run configuration.

    Physical and numerical keys mirror :class:`~boseslab.scenario.Scenario`;
    the oracle keys steer the Monte Carlo validators; ``spectrum_depths``
    optionally overrides the depths at which spectrum tables are written
    (defaults to the near face, one third, and the far face).
    """

    b: float
    alpha: float
    e_i: float = 1.0
    e_max: float = SCENARIO_DEFAULTS["e_max"]
    n_e: int = int(SCENARIO_DEFAULTS["n_e"])
    n_z: int = int(SCENARIO_DEFAULTS["n_z"])
    damping: float = SCENARIO_DEFAULTS["damping"]
    tol: float = SCENARIO_DEFAULTS["tol"]
    max_iter: int = int(SCENARIO_DEFAULTS["max_iter"])
    seed: int = 20260810
    n_walkers: int = 1_000_000
    n_samples: int = 10_000_000
    spectrum_depths: tuple[float, ...] | None = None

    def scenario(self) -> Scenario:
        return build_scenario(
            {
                "b": self.b,
                "alpha": self.alpha,
                "e_i": self.e_i,
                "e_max": self.e_max,
                "n_e": self.n_e,
                "n_z": self.n_z,
                "damping": self.damping,
                "tol": self.tol,
                "max_iter": self.max_iter,
            }
        )


_MANDATORY = ("b", "alpha")
_INT_KEYS = {"n_e", "n_z", "max_iter", "seed", "n_walkers", "n_samples"}
_FLOAT_KEYS = {"b", "alpha", "e_i", "e_max", "damping", "tol"}
_LIST_KEYS = {"spectrum_depths"}
_KNOWN_KEYS = tuple(f.name for f in fields(Config))


def _parse_value(key: str, raw: str, line_no: int):
    try:
        if key in _INT_KEYS:
            as_float = float(raw)
            if as_float != int(as_float):
                raise ValueError
            return int(as_float)
        if key in _FLOAT_KEYS:
            return float(raw)
        if key in _LIST_KEYS:
            return tuple(float(part) for part in raw.split(",") if part.strip())
    except ValueError:
        raise ConfigParseError(line_no, f"cannot parse value {raw!r} for key '{key}'") from None
    raise ConfigParseError(line_no, f"unknown key '{key}'")


def parse_config(text: str) -> Config:
    """Parse a configuration document into a :class:`Config` with defaults."""
    seen: dict[str, int] = {}
    values: dict[str, object] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigParseError(line_no, f"expected 'key = value', got {line.strip()!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigParseError(line_no, f"unknown key '{key}'")
        if key in seen:
            raise ConfigParseError(
                line_no, f"duplicate key '{key}' (first set on line {seen[key]})"
            )
        if not raw:
            raise ConfigParseError(line_no, f"empty value for key '{key}'")
        seen[key] = line_no
        values[key] = _parse_value(key, raw, line_no)
    for key in _MANDATORY:
        if key not in values:
            raise ConfigParseError(None, f"required key '{key}' is missing")
    return Config(**values)  # type: ignore[arg-type]


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(format(v, ".17g") for v in value)
    if isinstance(value, int):
        return str(value)
    return format(value, ".17g")


def render_config(config: Config) -> str:
    """Serialize a config so that parse_config(render_config(c)) == c."""
    lines = []
    for f in fields(Config):
        value = getattr(config, f.name)
        if value is None:
            continue
        lines.append(f"{f.name} = {_format_value(value)}")
    return "\n".join(lines) + "\n"
