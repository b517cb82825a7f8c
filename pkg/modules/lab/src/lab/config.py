"""Loading a RunConfig from TOML, the environment and ``section.key=value`` overrides."""

from __future__ import annotations

import logging
import os
import tomllib
import types
from collections.abc import Mapping, Sequence
from dataclasses import fields
from pathlib import Path
from typing import Any, Union, get_args, get_origin, get_type_hints

from .data_models import RunConfig
from .errors import ConfigError

logger = logging.getLogger(__name__)

SEED_ENV = "PARSREC_SEED"
SECTIONS = ("synth", "model", "train", "eval", "analysis")
# sections whose own seed follows the run seed unless set explicitly
SEEDED_SECTIONS = ("synth", "train", "eval")
TOP_LEVEL = ("seed", "out")


def _coerce(key: str, value: Any, hint: Any) -> Any:
    origin = get_origin(hint)
    if origin in (Union, types.UnionType):
        options = [a for a in get_args(hint) if a is not type(None)]
        return _coerce(key, value, options[0])
    if origin is tuple:
        if not isinstance(value, list | tuple):
            raise ConfigError(f"{key}: expected a list, got {value!r}")
        inner = get_args(hint)[0]
        return tuple(_coerce(key, v, inner) for v in value)
    if hint is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, int | float):
            raise ConfigError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            raise ConfigError(f"{key}: expected a string, got {value!r}")
        return value
    raise ConfigError(f"{key}: unsupported field type {hint}")


def _section_values(section: str, raw: dict[str, Any], cls: type) -> dict[str, Any]:
    hints = get_type_hints(cls)
    names = {f.name for f in fields(cls)}
    if section == "model":
        names.discard("n_items")  # taken from the dataset
    values = {}
    for key, value in raw.items():
        if key not in names:
            raise ConfigError(f"Unknown config key: {section}.{key}")
        values[key] = _coerce(f"{section}.{key}", value, hints[key])
    return values


def parse_override(text: str) -> tuple[str, Any]:
    """``section.key=value`` or ``seed=value``; the value is read as a TOML value.

    Bare words that are not valid TOML are taken as strings.
    """
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override must look like section.key=value, got {text!r}")
    try:
        parsed = tomllib.loads(f"v = {value.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()
    return key, parsed


def _apply(tree: dict[str, dict[str, Any]], top: dict[str, Any], key: str, value: Any) -> None:
    if key in TOP_LEVEL:
        top[key] = value
        return
    section, _, name = key.partition(".")
    if section not in SECTIONS or not name:
        raise ConfigError(f"Unknown config key: {key}")
    tree[section][name] = value


def load_config(
    path: str | Path | None = None,
    overrides: Sequence[str] = (),
    environ: Mapping[str, str] | None = None,
) -> RunConfig:
    """Resolve a RunConfig; every value is type-checked and every section validated."""
    environ = os.environ if environ is None else environ
    tree: dict[str, dict[str, Any]] = {s: {} for s in SECTIONS}
    top: dict[str, Any] = {}

    if path is not None:
        try:
            raw = tomllib.loads(Path(path).read_text())
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
        for key, value in raw.items():
            if key in SECTIONS:
                if not isinstance(value, dict):
                    raise ConfigError(f"{key}: expected a [{key}] table")
                tree[key].update(value)
            elif key in TOP_LEVEL:
                top[key] = value
            else:
                raise ConfigError(f"Unknown config key: {key}")

    if SEED_ENV in environ:
        try:
            top["seed"] = int(environ[SEED_ENV])
        except ValueError as e:
            raise ConfigError(f"{SEED_ENV}: expected an integer, got {environ[SEED_ENV]!r}") from e
    for text in overrides:
        _apply(tree, top, *parse_override(text))

    seed = _coerce("seed", top.get("seed", 0), int)
    out = _coerce("out", top.get("out", "runs/desk"), str)
    for section in SEEDED_SECTIONS:
        tree[section].setdefault("seed", seed)

    defaults = RunConfig()
    built: dict[str, Any] = {}
    for section in SECTIONS:
        cls = type(getattr(defaults, section))
        values = _section_values(section, tree[section], cls)
        if section == "model":
            values["n_items"] = built["synth"].n_items
        built[section] = cls(**values)
        try:
            if section == "analysis":
                built[section].validate(n_categories=built["synth"].n_categories)
            else:
                built[section].validate()
        except ValueError as e:
            raise ConfigError(f"[{section}] {e}") from e

    config = RunConfig(**built, seed=seed, out=out)
    logger.debug("Resolved config: seed %d, out %s", seed, out)
    return config
