"""Config files: JSON documents with one section per config dataclass.

Recognized sections are ``scenario``, ``radio``, ``music`` and ``train``;
keys inside a section must exactly match the dataclass field names. Unknown
sections or keys are errors, missing ones fall back to defaults.
"""

from __future__ import annotations

import dataclasses
import json

from .exceptions import ConfigError
from .music import MusicConfig
from .predictor import TrainConfig
from .scenario import ScenarioConfig
from .signal_model import RadioConfig

SECTION_TYPES = {
    "scenario": ScenarioConfig,
    "radio": RadioConfig,
    "music": MusicConfig,
    "train": TrainConfig,
}


def _build_section(name: str, cls, values: dict):
    fields = {f.name for f in dataclasses.fields(cls)}
    unknown = set(values) - fields
    if unknown:
        raise ConfigError(
            f"unknown keys in section {name!r}: {sorted(unknown)}; valid keys: {sorted(fields)}"
        )
    coerced = {k: tuple(v) if isinstance(v, list) else v for k, v in values.items()}
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid section {name!r}: {exc}") from exc


def load_config(path: str) -> dict:
    """Parse a config file into a dict of config objects (defaults filled in)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} must hold a JSON object of config sections")
    unknown = set(raw) - set(SECTION_TYPES)
    if unknown:
        raise ConfigError(
            f"unknown config sections {sorted(unknown)}; valid sections: {sorted(SECTION_TYPES)}"
        )
    out = {}
    for name, cls in SECTION_TYPES.items():
        values = raw.get(name, {})
        if not isinstance(values, dict):
            raise ConfigError(f"section {name!r} must be a JSON object")
        out[name] = _build_section(name, cls, values)
    return out


def default_config() -> dict:
    return {name: cls() for name, cls in SECTION_TYPES.items()}
