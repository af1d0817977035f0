"""INI-style run configuration: flat sections of `key = value` lines.

Unknown sections or keys are rejected; every field has a documented default.
Relative paths are resolved against the config file's directory. The output
directory resolves as config value > HEATCALL_OUT environment variable >
"out".
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .market import DEFAULT_RATE, TRADING_DAYS_PER_YEAR

OUTPUT_DIR_ENV = "HEATCALL_OUT"

_SCHEMA: dict[str, set[str]] = {
    "market": {"rate", "basis"},
    "data": {"series", "sidecar", "eval_start", "eval_end"},
    "model": {"seed", "hidden"},
    "training": {
        "epochs", "lr", "lambda_data", "collocation_count", "domain_margin",
        "beta1", "beta2", "epsilon", "collocation_grid",
    },
    "output": {"directory", "record_every", "arv_denominator"},
    "synth": {"spot0", "strike", "sigma", "days", "noise", "seed", "code", "start", "drift"},
    "oracle": {"x_min", "x_max", "tau_max", "nodes", "steps", "rate", "sigma", "ic"},
}


@dataclass(frozen=True)
class RunConfig:
    # [market]
    rate: float = DEFAULT_RATE
    basis: int = TRADING_DAYS_PER_YEAR
    # [data]
    series: Path | None = None
    sidecar: Path | None = None
    eval_start: str | None = None
    eval_end: str | None = None
    # [model]
    seed: int = 42
    hidden: tuple[int, ...] = (32, 32)
    # [training]
    epochs: int = 30000
    lr: float = 1e-3
    lambda_data: float = 1.0
    collocation_count: int = 1024
    domain_margin: float = 1.0
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    collocation_grid: bool = False
    # [output]
    directory: Path = field(default_factory=lambda: Path("out"))
    record_every: int = 100
    arv_denominator: str = "predicted"
    # [synth]
    synth_spot0: float = 100.0
    synth_strike: float = 70.0
    synth_sigma: float = 0.25
    synth_days: int = 61
    synth_noise: float = 0.0
    synth_seed: int = 7
    synth_code: str = "SYNTA100"
    synth_start: str = "2023-01-02"
    synth_drift: float = 0.05
    # [oracle]
    oracle_x_min: float = -1.5
    oracle_x_max: float = 1.5
    oracle_tau_max: float = 0.02
    oracle_nodes: int = 201
    oracle_steps: int = 200
    oracle_rate: float = 0.05
    oracle_sigma: float = 0.2
    oracle_ic: str = "payoff"


class ConfigError(ValueError):
    """Config file failed schema or path validation."""


def _parse_bool(raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def load_config(path: str | Path, require_paths: tuple[str, ...] = ()) -> RunConfig:
    """Load and validate a config file.

    require_paths names the [data] keys ("series", "sidecar") whose files must
    already exist for the command being run.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding="utf-8"), source=str(path))
    except configparser.Error as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")

    base = path.parent

    def get(section, key, default=None):
        if parser.has_option(section, key):
            return parser.get(section, key).strip()
        return default

    def get_float(section, key, default):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None

    def get_int(section, key, default):
        raw = get(section, key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from None

    def get_path(section, key):
        raw = get(section, key)
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else base / p

    hidden_raw = get("model", "hidden")
    if hidden_raw is None:
        hidden = (32, 32)
    else:
        try:
            hidden = tuple(int(part) for part in hidden_raw.split(",") if part.strip())
        except ValueError:
            raise ConfigError(f"[model] hidden: expected comma-separated widths, got {hidden_raw!r}") from None
        if not hidden or any(width < 1 for width in hidden):
            raise ConfigError(f"[model] hidden: widths must be positive, got {hidden_raw!r}")

    grid_raw = get("training", "collocation_grid")
    arv_denominator = get("output", "arv_denominator", "predicted")
    if arv_denominator not in ("predicted", "actual"):
        raise ConfigError("[output] arv_denominator must be 'predicted' or 'actual'")
    oracle_ic = get("oracle", "ic", "payoff")
    if oracle_ic not in ("payoff", "zero"):
        raise ConfigError("[oracle] ic must be 'payoff' or 'zero'")

    directory_raw = get("output", "directory")
    if directory_raw is not None:
        directory = Path(directory_raw)
        directory = directory if directory.is_absolute() else base / directory
    elif os.environ.get(OUTPUT_DIR_ENV):
        directory = Path(os.environ[OUTPUT_DIR_ENV])
    else:
        directory = Path("out")

    cfg = RunConfig(
        rate=get_float("market", "rate", DEFAULT_RATE),
        basis=get_int("market", "basis", TRADING_DAYS_PER_YEAR),
        series=get_path("data", "series"),
        sidecar=get_path("data", "sidecar"),
        eval_start=get("data", "eval_start"),
        eval_end=get("data", "eval_end"),
        seed=get_int("model", "seed", 42),
        hidden=hidden,
        epochs=get_int("training", "epochs", 30000),
        lr=get_float("training", "lr", 1e-3),
        lambda_data=get_float("training", "lambda_data", 1.0),
        collocation_count=get_int("training", "collocation_count", 1024),
        domain_margin=get_float("training", "domain_margin", 1.0),
        beta1=get_float("training", "beta1", 0.9),
        beta2=get_float("training", "beta2", 0.999),
        epsilon=get_float("training", "epsilon", 1e-8),
        collocation_grid=_parse_bool(grid_raw) if grid_raw is not None else False,
        directory=directory,
        record_every=get_int("output", "record_every", 100),
        arv_denominator=arv_denominator,
        synth_spot0=get_float("synth", "spot0", 100.0),
        synth_strike=get_float("synth", "strike", 70.0),
        synth_sigma=get_float("synth", "sigma", 0.25),
        synth_days=get_int("synth", "days", 61),
        synth_noise=get_float("synth", "noise", 0.0),
        synth_seed=get_int("synth", "seed", 7),
        synth_code=get("synth", "code", "SYNTA100"),
        synth_start=get("synth", "start", "2023-01-02"),
        synth_drift=get_float("synth", "drift", 0.05),
        oracle_x_min=get_float("oracle", "x_min", -1.5),
        oracle_x_max=get_float("oracle", "x_max", 1.5),
        oracle_tau_max=get_float("oracle", "tau_max", 0.02),
        oracle_nodes=get_int("oracle", "nodes", 201),
        oracle_steps=get_int("oracle", "steps", 200),
        oracle_rate=get_float("oracle", "rate", 0.05),
        oracle_sigma=get_float("oracle", "sigma", 0.2),
        oracle_ic=oracle_ic,
    )

    for key in require_paths:
        value = getattr(cfg, key)
        if value is None:
            raise ConfigError(f"[data] {key} is required for this command")
        if not Path(value).is_file():
            raise ConfigError(f"[data] {key}: file not found: {value}")
    return cfg
