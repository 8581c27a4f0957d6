"""Run configuration: a flat ``key = value`` file with section headers.

Example::

    [run]
    grounding = trapdoor
    horizon = 10
    episodes = 1
    seed = 7
    out = runs/trapdoor

    [agent]
    kind = q
    gamma = 0.9
    epsilon = 0.1

    [check]
    tmax = 10

Every key can also be given on the command line, and the command line
wins.  There is no default seed.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields
from fractions import Fraction
from pathlib import Path

from .agents import AGENT_KINDS
from .core import CapitalError
from .realizable import DEFAULT_NODE_CAP


class ConfigError(CapitalError):
    pass


@dataclass
class RunConfig:
    grounding: str | None = None
    agent: str = "random"
    gamma: Fraction | None = None
    alpha: float = 0.1
    epsilon: Fraction = Fraction(1, 10)
    depth: int = 1
    q_init: float = 0.0
    rules: str | None = None
    horizon: int | None = None
    episodes: int = 1
    seed: int | None = None
    cent: Fraction | None = None
    out: str = "out"
    partitioning: str = "single"
    tmax: int = 10
    cap: int = DEFAULT_NODE_CAP
    n_mc: int = 10**4
    figures: bool = True

    def validate(self, need_horizon: bool = True, need_seed: bool = True) -> RunConfig:
        if self.grounding is None:
            raise ConfigError("no grounding given (builtin name or file path)")
        if need_seed and self.seed is None:
            raise ConfigError("a seed is required; there is no clock-based default")
        if self.seed is not None and self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.agent not in AGENT_KINDS:
            raise ConfigError(f"unknown agent {self.agent!r}; expected one of {', '.join(AGENT_KINDS)}")
        if self.agent == "rules" and not self.rules:
            raise ConfigError("agent 'rules' needs a rule table file")
        if self.gamma is not None and not 0 <= self.gamma <= 1:
            raise ConfigError("gamma must lie in [0, 1]")
        if need_horizon and self.horizon is None:
            if self.gamma == 1:
                raise ConfigError("gamma = 1 requires a finite horizon")
            raise ConfigError("a finite horizon is required")
        if self.horizon is not None and self.horizon < 0:
            raise ConfigError("horizon must be non-negative")
        if not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon must lie in [0, 1]")
        if not 0 < self.alpha <= 1:
            raise ConfigError("alpha must lie in (0, 1]")
        if self.episodes < 1:
            raise ConfigError("episodes must be at least 1")
        if self.cent is not None and self.cent <= 0:
            raise ConfigError("cent must be positive")
        if self.partitioning not in ("single", "singleton"):
            raise ConfigError("partitioning must be 'single' or 'singleton'")
        if self.tmax < 0 or self.cap < 1:
            raise ConfigError("tmax must be >= 0 and cap >= 1")
        if self.n_mc < 1000:
            raise ConfigError("n_mc must be at least 1000")
        return self


def _horizon(text: str) -> int | None:
    return None if text.strip().lower() in ("inf", "infinity", "none", "") else int(text)


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


PARSERS = {
    "grounding": str,
    "agent": str,
    "gamma": Fraction,
    "alpha": float,
    "epsilon": Fraction,
    "depth": int,
    "q_init": float,
    "rules": str,
    "horizon": _horizon,
    "episodes": int,
    "seed": int,
    "cent": Fraction,
    "out": str,
    "partitioning": str,
    "tmax": int,
    "cap": int,
    "n_mc": int,
    "figures": _bool,
}

# keys accepted in the file under other names
ALIASES = {"kind": "agent", "t_max": "tmax", "mc_samples": "n_mc"}


def parse_value(key: str, text: str):
    try:
        return PARSERS[key](text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None


def read_config_text(text: str, source: str = "<config>") -> dict:
    """Keys and parsed values from a config file; section names are only grouping."""
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=",), comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            name = ALIASES.get(key, key)
            if name not in PARSERS:
                raise ConfigError(f"{source}: unknown key {key!r} in [{section}]")
            values[name] = parse_value(name, raw)
    return values


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return read_config_text(path.read_text(), str(path))


def build_config(file_values: dict, overrides: dict) -> RunConfig:
    """File values, then command-line values that were actually given."""
    merged = {**file_values, **overrides}
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in merged.items() if k in known})
