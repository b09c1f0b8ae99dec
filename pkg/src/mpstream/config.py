"""TOML session/sweep configuration.

Example::

    [session]
    num_info = 100000
    seed = 1
    align_slow_path = true

    [[paths]]
    rate = 4.0
    erasure = 0.01
    prop_delay = 0.02
    interval = 10          # or code_rate = 0.9; omit both for an info-only path

    [[paths]]
    rate = 3.0
    erasure = 0.01
    prop_delay = 0.05

    [sweep]
    interval = [5, 10, 20]
    erasure = [0.001, 0.01]   # a scalar applies to every path, a list gives one per path
    replicates = 10           # seeds seed .. seed + replicates - 1
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .policy import CodingPolicy, PathSpec, check_policy, interval_from_rate
from .sim import SimConfig

SESSION_KEYS = {
    "num_info": int,
    "seed": int,
    "align_slow_path": bool,
    "feedback_period": float,
    "adaptive_redundancy": bool,
    "payload_len": int,
    "coeff_order": int,
    "exclude_tail": bool,
}
PATH_KEYS = {"rate", "erasure", "prop_delay", "interval", "code_rate"}
SWEEP_AXES = {
    "interval",
    "erasure",
    "num_info",
    "feedback_period",
    "align_slow_path",
    "adaptive_redundancy",
}
SWEEP_KEYS = SWEEP_AXES | {"replicates", "workers"}


class ConfigError(ValueError):
    pass


@dataclass
class LoadedConfig:
    base: SimConfig
    grid: dict[str, list[Any]] | None
    """``None`` when the file has no ``[sweep]`` table (a single run of ``base``)."""
    replicates: int = 1
    workers: int = 1

    def with_seed(self, seed: int) -> LoadedConfig:
        return replace(self, base=replace(self.base, seed=seed))

    def full_grid(self) -> dict[str, list[Any]]:
        seeds = [self.base.seed + j for j in range(self.replicates)]
        if self.grid is None:
            return {"seed": seeds}
        if any(len(v) == 0 for v in self.grid.values()):
            return {}
        return {**self.grid, "seed": seeds}


def _number(where: str, value: Any, kind: type) -> Any:
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{where}: expected true/false, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _parse_path(i: int, table: Any) -> tuple[PathSpec, int | None]:
    where = f"paths[{i}]"
    if not isinstance(table, dict):
        raise ConfigError(f"{where}: expected a table")
    unknown = set(table) - PATH_KEYS
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    if "rate" not in table:
        raise ConfigError(f"{where}.rate: missing")
    try:
        spec = PathSpec(
            rate=_number(f"{where}.rate", table["rate"], float),
            erasure=_number(f"{where}.erasure", table.get("erasure", 0.0), float),
            prop_delay=_number(f"{where}.prop_delay", table.get("prop_delay", 0.0), float),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None
    if "interval" in table and "code_rate" in table:
        raise ConfigError(f"{where}: give interval or code_rate, not both")
    interval = None
    if "interval" in table:
        interval = _number(f"{where}.interval", table["interval"], int)
        if interval < 1:
            raise ConfigError(f"{where}.interval: must be >= 1, got {interval}")
    elif "code_rate" in table:
        c = _number(f"{where}.code_rate", table["code_rate"], float)
        if not 0 <= c <= 1:
            raise ConfigError(f"{where}.code_rate: must be in [0, 1], got {c}")
        interval = interval_from_rate(c)
    return spec, interval


def parse_config(doc: dict[str, Any]) -> LoadedConfig:
    unknown = set(doc) - {"session", "paths", "sweep"}
    if unknown:
        raise ConfigError(f"unknown top-level tables {sorted(unknown)}")
    session = doc.get("session", {})
    if not isinstance(session, dict):
        raise ConfigError("session: expected a table")
    bad = set(session) - set(SESSION_KEYS)
    if bad:
        raise ConfigError(f"session: unknown keys {sorted(bad)}")
    if "num_info" not in session:
        raise ConfigError("session.num_info: missing")
    kwargs = {k: _number(f"session.{k}", v, SESSION_KEYS[k]) for k, v in session.items()}

    raw_paths = doc.get("paths")
    if not isinstance(raw_paths, list) or not raw_paths:
        raise ConfigError("paths: at least one [[paths]] table is required")
    parsed = [_parse_path(i, t) for i, t in enumerate(raw_paths)]
    paths = tuple(p for p, _ in parsed)
    policy = CodingPolicy(tuple(l for _, l in parsed))

    try:
        base = SimConfig(paths=paths, policy=policy, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"session: {exc}") from None
    problems = check_policy(policy, paths)
    if problems:
        raise ConfigError("inadmissible coding policy: " + "; ".join(problems))

    grid = None
    replicates, workers = 1, 1
    if "sweep" in doc:
        sweep = doc["sweep"]
        if not isinstance(sweep, dict):
            raise ConfigError("sweep: expected a table")
        bad = set(sweep) - SWEEP_KEYS
        if bad:
            raise ConfigError(f"sweep: unknown keys {sorted(bad)} (axes: {sorted(SWEEP_AXES)})")
        replicates = _number("sweep.replicates", sweep.get("replicates", 1), int)
        workers = _number("sweep.workers", sweep.get("workers", 1), int)
        if replicates < 0 or workers < 1:
            raise ConfigError("sweep: replicates must be >= 0 and workers >= 1")
        grid = {}
        for key in sweep:
            if key in SWEEP_AXES:
                values = sweep[key]
                if not isinstance(values, list):
                    raise ConfigError(f"sweep.{key}: expected a list of values")
                grid[key] = values
    return LoadedConfig(base, grid, replicates, workers)


def load_config(path: str | Path) -> LoadedConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    try:
        return parse_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
