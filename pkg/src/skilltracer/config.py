"""Service configuration: JSON file plus environment overrides.

Precedence is defaults < config file < environment.  Every file key has an
environment twin with the ``SKILLTRACER_`` prefix (nested decay keys are
flattened, e.g. ``SKILLTRACER_DECAY_T_HALF``), so deployments can run from
environment alone.  Decay parameters and the default inference order act as
fallbacks for graph documents that omit them; the correlation cap bounds
the n_c any uploaded graph may declare.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .errors import SkillTracerError
from .fusion import MAX_CORRELATION_ORDER
from .smoothing import DecayParams

ENV_PREFIX = "SKILLTRACER_"


class ConfigError(SkillTracerError):
    """A config file or environment override is malformed."""


@dataclass(frozen=True)
class ServiceConfig:
    store_root: str = "./skilltracer-data"
    host: str = "127.0.0.1"
    port: int = 8040
    fsync: bool = False
    snapshot_every: int = 1
    inference_order: int = 10
    correlation_cap: int = MAX_CORRELATION_ORDER
    decay: DecayParams = field(default_factory=DecayParams)

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port {self.port} outside [1, 65535]")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be at least 1")
        if self.inference_order < 1:
            raise ConfigError("inference_order must be at least 1")
        if not 1 <= self.correlation_cap <= MAX_CORRELATION_ORDER:
            raise ConfigError(
                f"correlation_cap {self.correlation_cap} outside "
                f"[1, {MAX_CORRELATION_ORDER}]"
            )

    def to_dict(self) -> dict:
        return {
            "store_root": self.store_root,
            "host": self.host,
            "port": self.port,
            "fsync": self.fsync,
            "snapshot_every": self.snapshot_every,
            "inference_order": self.inference_order,
            "correlation_cap": self.correlation_cap,
            "decay": self.decay.to_dict(),
        }


def _parse_bool(text: str, key: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key}: {text!r} is not a boolean")


# key -> (path into the config dict, parser applied to environment strings)
_FIELDS = {
    "STORE_ROOT": (("store_root",), str),
    "HOST": (("host",), str),
    "PORT": (("port",), int),
    "FSYNC": (("fsync",), _parse_bool),
    "SNAPSHOT_EVERY": (("snapshot_every",), int),
    "INFERENCE_ORDER": (("inference_order",), int),
    "CORRELATION_CAP": (("correlation_cap",), int),
    "DECAY_T_HALF": (("decay", "t_half"), float),
    "DECAY_T_E0": (("decay", "t_e0"), float),
    "DECAY_N_HALF": (("decay", "n_half"), int),
    "DECAY_N_S_MAX": (("decay", "n_s_max"), int),
}


def load_config(path: Optional[str] = None,
                env: Optional[Mapping[str, str]] = None) -> ServiceConfig:
    """Build a ServiceConfig from an optional JSON file and the environment."""
    doc: dict = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as err:
            raise ConfigError(f"cannot read config file {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise ConfigError(f"config file {path} is not valid JSON: {err}") from err
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")

    merged = {
        "store_root": ServiceConfig.store_root,
        "host": ServiceConfig.host,
        "port": ServiceConfig.port,
        "fsync": ServiceConfig.fsync,
        "snapshot_every": ServiceConfig.snapshot_every,
        "inference_order": ServiceConfig.inference_order,
        "correlation_cap": ServiceConfig.correlation_cap,
        "decay": DecayParams().to_dict(),
    }
    known = set(merged)
    for key, value in doc.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        if key == "decay":
            if not isinstance(value, dict):
                raise ConfigError("decay must be an object")
            unknown = set(value) - set(merged["decay"])
            if unknown:
                raise ConfigError(f"unknown decay keys {sorted(unknown)}")
            merged["decay"].update(value)
        else:
            merged[key] = value

    if env is None:
        env = os.environ
    for suffix, (path_keys, parse) in _FIELDS.items():
        raw = env.get(ENV_PREFIX + suffix)
        if raw is None:
            continue
        try:
            value = parse(raw) if parse is not _parse_bool else parse(raw, suffix)
        except ValueError as err:
            raise ConfigError(f"{ENV_PREFIX}{suffix}: {err}") from err
        target = merged
        for key in path_keys[:-1]:
            target = target[key]
        target[path_keys[-1]] = value

    try:
        decay = DecayParams.from_dict(merged.pop("decay"))
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid decay parameters: {err}") from err
    try:
        return ServiceConfig(decay=decay, **merged)
    except TypeError as err:
        raise ConfigError(str(err)) from err


def apply_graph_defaults(doc: dict, config: ServiceConfig) -> dict:
    """Fill decay/inference defaults from the config into a graph document."""
    out = dict(doc)
    if "decay" not in out:
        out["decay"] = config.decay.to_dict()
    if "inference_order" not in out:
        out["inference_order"] = config.inference_order
    return out
