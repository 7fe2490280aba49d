"""Run configuration: sectioned key-value text with JSON-style values.

Format, one `key = value` per line under `[section]` headers:

    [graph]
    type = complete
    n = 50

    [scenario]
    indices = [23, 24, 25, 26, 27]
    states = 0

Values are parsed as JSON where possible (numbers, arrays), otherwise
kept as bare strings. Full-line comments start with `#`; inline
comments are not supported. Errors carry the offending line number.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .covariance import NoiseParams, PlatoonParams
from .errors import ConfigError
from .graph import (WeightedGraph, build_complete, build_custom, build_path,
                    build_pcycle)
from .risk import FailureScenario
from .simulate import SimConfig

_SECTIONS = ("graph", "platoon", "noise", "query", "scenario", "sim",
             "experiment")
_HEADER_RE = re.compile(r"^\[([a-z_]+)\]$")
_KEY_RE = re.compile(r"^[a-z][a-z0-9_]*$")


@dataclass
class RawConfig:
    """Parsed sections: section -> key -> (value, line number)."""

    sections: dict = field(default_factory=dict)
    path: str = "<config>"

    def has(self, section: str, key: str) -> bool:
        return key in self.sections.get(section, {})

    def get(self, section: str, key: str, default=None):
        entry = self.sections.get(section, {}).get(key)
        return default if entry is None else entry[0]

    def line_of(self, section: str, key: str):
        entry = self.sections.get(section, {}).get(key)
        return None if entry is None else entry[1]

    def require(self, section: str, key: str):
        if section not in self.sections:
            raise ConfigError(f"missing [{section}] section (need key {key!r})")
        if key not in self.sections[section]:
            raise ConfigError(f"missing key {key!r} in [{section}]")
        return self.sections[section][key][0]


def parse_config(text: str, path: str = "<config>") -> RawConfig:
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        header = _HEADER_RE.match(line)
        if header:
            name = header.group(1)
            if name not in _SECTIONS:
                raise ConfigError(
                    f"unknown section [{name}]; expected one of "
                    f"{', '.join(_SECTIONS)}", lineno)
            current = sections.setdefault(name, {})
            continue
        if current is None:
            raise ConfigError("key outside any [section]", lineno)
        if "=" not in line:
            raise ConfigError(f"expected `key = value`, got {line!r}", lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"invalid key name {key!r}", lineno)
        if key in current:
            raise ConfigError(f"duplicate key {key!r}", lineno)
        if not value:
            raise ConfigError(f"empty value for key {key!r}", lineno)
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value  # bare string, e.g. graph type names
        current[key] = (parsed, lineno)
    return RawConfig(sections, path)


def load_config(path: str) -> RawConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read(), path)


def _as_int(cfg: RawConfig, section: str, key: str, value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"key {key!r} in [{section}] must be an integer, "
                          f"got {value!r}", cfg.line_of(section, key))
    return value


def _as_number(cfg: RawConfig, section: str, key: str, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} in [{section}] must be a number, "
                          f"got {value!r}", cfg.line_of(section, key))
    if not math.isfinite(value):
        raise ConfigError(f"key {key!r} in [{section}] must be finite",
                          cfg.line_of(section, key))
    return float(value)


def build_graph(cfg: RawConfig) -> WeightedGraph:
    kind = cfg.require("graph", "type")
    n = _as_int(cfg, "graph", "n", cfg.require("graph", "n"))
    if kind == "complete":
        return build_complete(n)
    if kind == "path":
        return build_path(n)
    if kind == "pcycle":
        p = _as_int(cfg, "graph", "p", cfg.require("graph", "p"))
        return build_pcycle(n, p)
    if kind == "custom":
        edges = cfg.require("graph", "edges")
        if not isinstance(edges, list):
            raise ConfigError("key 'edges' must be a JSON array of "
                              "[i, j] or [i, j, weight] triples",
                              cfg.line_of("graph", "edges"))
        triples = []
        for e in edges:
            if not isinstance(e, list) or len(e) not in (2, 3):
                raise ConfigError(f"bad edge entry {e!r}",
                                  cfg.line_of("graph", "edges"))
            i, j = e[0], e[1]
            w = float(e[2]) if len(e) == 3 else 1.0
            triples.append((i, j, w))
        return build_custom(n, triples)
    raise ConfigError(f"unknown graph type {kind!r}; expected complete, "
                      f"path, pcycle, or custom", cfg.line_of("graph", "type"))


def build_platoon(cfg: RawConfig) -> PlatoonParams:
    n = _as_int(cfg, "graph", "n", cfg.require("graph", "n"))
    d = _as_number(cfg, "platoon", "d", cfg.require("platoon", "d"))
    return PlatoonParams(n, d)


def build_noise(cfg: RawConfig) -> NoiseParams:
    return NoiseParams(
        g=_as_number(cfg, "noise", "g", cfg.require("noise", "g")),
        tau=_as_number(cfg, "noise", "tau", cfg.require("noise", "tau")),
        beta=_as_number(cfg, "noise", "beta", cfg.require("noise", "beta")))


def build_query(cfg: RawConfig) -> tuple:
    eps = _as_number(cfg, "query", "epsilon", cfg.require("query", "epsilon"))
    c = _as_number(cfg, "query", "c", cfg.require("query", "c"))
    return eps, c


def build_scenario(cfg: RawConfig) -> FailureScenario:
    """Scenario from [scenario]; missing section means no failures.
    A scalar `states` value is broadcast to every failed pair."""
    if "scenario" not in cfg.sections or not cfg.has("scenario", "indices"):
        return FailureScenario((), ())
    indices = cfg.get("scenario", "indices")
    if isinstance(indices, int):
        indices = [indices]
    if not isinstance(indices, list) or \
            not all(isinstance(i, int) and not isinstance(i, bool)
                    for i in indices):
        raise ConfigError("key 'indices' must be an integer or an array "
                          "of integers", cfg.line_of("scenario", "indices"))
    states = cfg.get("scenario", "states")
    if states is None:
        raise ConfigError("scenario with indices needs a 'states' value",
                          cfg.line_of("scenario", "indices"))
    states = scenario_state_values(cfg, len(indices))
    return FailureScenario(tuple(indices), tuple(states))


def scenario_state_values(cfg: RawConfig, m: int) -> list:
    """States broadcast to m entries; scalars repeat, arrays must match."""
    states = cfg.require("scenario", "states")
    line = cfg.line_of("scenario", "states")
    if isinstance(states, bool):
        raise ConfigError("key 'states' must be numeric", line)
    if isinstance(states, (int, float)):
        return [float(states)] * m
    if isinstance(states, list) and len(states) == 1 and \
            isinstance(states[0], (int, float)):
        return [float(states[0])] * m
    if isinstance(states, list) and \
            all(isinstance(s, (int, float)) and not isinstance(s, bool)
                for s in states):
        if len(states) != m:
            raise ConfigError(f"'states' has {len(states)} entries but the "
                              f"scenario has {m} failed pairs", line)
        return [float(s) for s in states]
    raise ConfigError("key 'states' must be a number or an array of numbers",
                      line)


def build_sim(cfg: RawConfig, seed_override=None) -> SimConfig:
    sec = cfg.sections.get("sim", {})
    kwargs = {}
    if "dt" in sec:
        kwargs["dt"] = _as_number(cfg, "sim", "dt", sec["dt"][0])
    if "burn_in" in sec:
        kwargs["burn_in"] = _as_number(cfg, "sim", "burn_in", sec["burn_in"][0])
    if "sample_interval" in sec:
        kwargs["sample_interval"] = _as_number(
            cfg, "sim", "sample_interval", sec["sample_interval"][0])
    if "samples_per_trial" in sec:
        kwargs["samples_per_trial"] = _as_int(
            cfg, "sim", "samples_per_trial", sec["samples_per_trial"][0])
    if "trials" in sec:
        kwargs["trials"] = _as_int(cfg, "sim", "trials", sec["trials"][0])
    if seed_override is not None:
        kwargs["seed"] = int(seed_override)
    elif "seed" in sec:
        kwargs["seed"] = _as_int(cfg, "sim", "seed", sec["seed"][0])
    return SimConfig(**kwargs)


def resolve_seed(cfg: RawConfig, seed_override=None) -> int:
    """Seed for seeded experiments: --seed flag wins, then [sim] seed,
    then 0."""
    if seed_override is not None:
        return int(seed_override)
    if cfg.has("sim", "seed"):
        return _as_int(cfg, "sim", "seed", cfg.get("sim", "seed"))
    return 0


def experiment_option(cfg: RawConfig, key: str, default: int) -> int:
    if not cfg.has("experiment", key):
        return default
    value = _as_int(cfg, "experiment", key, cfg.get("experiment", key))
    if value < 1:
        raise ConfigError(f"key {key!r} in [experiment] must be >= 1",
                          cfg.line_of("experiment", key))
    return value
