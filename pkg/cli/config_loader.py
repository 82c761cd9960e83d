"""
cli/config_loader.py
────────────────────
Reads the flat run-configuration format into a validated RunConfig.

  # comment
  mu = 0.83
  grid.n = 1001
  time.dt = auto

One key = value per line; blank lines and '#' comments are skipped. All ten
model rates are required, the dotted run settings fall back to RunConfig
defaults. Unknown, duplicate or malformed entries raise ConfigParseError;
rates that parse but are not strictly positive raise InvalidParams.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Mapping, Optional, Union

from pydantic import ValidationError

from model_core.derived import load_params
from schemas.params_schema import (
    PARAM_KEYS,
    GridSettings,
    InitialConditionSettings,
    OutputSettings,
    RunConfig,
    TimeSettings,
)

OUT_ENV_VAR = "EPIWAVE_OUT"

FLOAT_KEYS = PARAM_KEYS + (
    "grid.length", "time.t_end", "time.snapshot_every", "ic.split_at", "ic.seed",
)
INT_KEYS = ("grid.n",)
KNOWN_KEYS = FLOAT_KEYS + INT_KEYS + ("time.dt", "out.dir")


def _convert(key: str, raw: str, line_no: int) -> object:
    try:
        if key in INT_KEYS:
            return int(raw)
        if key == "time.dt":
            return "auto" if raw == "auto" else float(raw)
        if key == "out.dir":
            if not raw:
                raise ValueError("empty path")
            return raw
        return float(raw)
    except ValueError:
        raise ConfigParseError(f"line {line_no}: bad value for '{key}': {raw!r}", key=key)


def parse_config_text(text: str) -> dict[str, object]:
    """Typed values keyed by config key. No defaults are filled in."""
    values: dict[str, object] = {}
    for line_no, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigParseError(f"line {line_no}: expected 'key = value', got {line.strip()!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigParseError(f"line {line_no}: unknown key '{key}'", key=key)
        if key in values:
            raise ConfigParseError(f"line {line_no}: duplicate key '{key}'", key=key)
        values[key] = _convert(key, raw, line_no)

    missing = [key for key in PARAM_KEYS if key not in values]
    if missing:
        raise ConfigParseError(f"missing required key '{missing[0]}'", key=missing[0])
    return values


def _section(values: Mapping[str, object], prefix: str) -> dict[str, object]:
    return {
        key.split(".", 1)[1]: value
        for key, value in values.items()
        if key.startswith(prefix + ".")
    }


def build_run_config(values: Mapping[str, object]) -> RunConfig:
    params = load_params({key: values[key] for key in PARAM_KEYS})
    try:
        return RunConfig(
            params=params,
            grid=GridSettings(**_section(values, "grid")),
            time=TimeSettings(**_section(values, "time")),
            ic=InitialConditionSettings(**_section(values, "ic")),
            out=OutputSettings(**_section(values, "out")),
        )
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(part) for part in first["loc"]) or "config"
        raise ConfigParseError(f"invalid setting {where}: {first['msg']}", key=where) from e


def load_run_config(
    path: Union[str, Path],
    env: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Parses a config file. A non-empty EPIWAVE_OUT in `env` (default:
    os.environ) replaces out.dir.
    """
    env = os.environ if env is None else env
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigParseError(f"cannot read config {path}: {e}") from e

    values = parse_config_text(text)
    override = env.get(OUT_ENV_VAR)
    if override:
        values["out.dir"] = override
    return build_run_config(values)


class ConfigParseError(ValueError):
    """Raised for unreadable, malformed or incomplete config files."""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.key = key
