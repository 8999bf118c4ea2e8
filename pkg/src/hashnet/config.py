"""Run configuration: a YAML (or JSON) mapping plus environment overrides.

Any key can be overridden from the environment as ``HASHNET_<SECTION>__<KEY>``,
e.g. ``HASHNET_ANALYSIS__THRESHOLD=0.8``; values are parsed as YAML scalars.
"""

from __future__ import annotations

import copy
import hashlib
import json
import os
from pathlib import Path

import yaml

ENV_PREFIX = "HASHNET_"

DEFAULTS = {
    "data": {
        "events": "corpus/events.jsonl",
        "anchors": "corpus/anchors.jsonl",
        "locations": "corpus/locations.txt",
        "window": None,  # {start, end}; None infers whole days from the events
        "schema": None,
    },
    "analysis": {},  # see pipeline.Settings
    "compare": {"low_threshold": 0.5},
    "output": "results",
    "synth": {"scenario": "default", "seed": None, "out": "corpus", "overrides": {}},
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def env_overrides(environ=None) -> dict:
    environ = os.environ if environ is None else environ
    out: dict = {}
    for name in sorted(environ):
        if not name.startswith(ENV_PREFIX):
            continue
        path = [p.lower() for p in name[len(ENV_PREFIX):].split("__") if p]
        if not path:
            continue
        node = out
        for p in path[:-1]:
            node = node.setdefault(p, {})
        node[path[-1]] = yaml.safe_load(environ[name])
    return out


def load_config(path=None, environ=None) -> dict:
    """Defaults, then the file, then the environment.  Relative data paths
    are resolved against the config file's directory."""
    cfg = copy.deepcopy(DEFAULTS)
    base = Path.cwd()
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file {path} not found")
        try:
            loaded = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"{path}: unknown sections {sorted(unknown)}")
        cfg = _merge(cfg, loaded)
        base = path.resolve().parent
    cfg = _merge(cfg, env_overrides(environ))
    cfg["_base"] = str(base)
    return cfg


def resolve(cfg: dict, value) -> Path | None:
    if value is None:
        return None
    p = Path(value)
    return p if p.is_absolute() else Path(cfg.get("_base", ".")) / p


def config_hash(cfg: dict) -> str:
    """sha256 of the canonical JSON form, ignoring where the file lives."""
    clean = {k: v for k, v in cfg.items() if not k.startswith("_")}
    text = json.dumps(clean, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def dump_config(cfg: dict, path) -> None:
    clean = {k: v for k, v in cfg.items() if not k.startswith("_")}
    Path(path).write_text(yaml.safe_dump(clean, sort_keys=True), encoding="utf-8")
