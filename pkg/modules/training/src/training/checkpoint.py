"""Checkpoint files: a text header followed by raw little-endian tensors.

Header lines, one record per line::

    parsrec-checkpoint 2
    config <field> <value>      (every ModelConfig field)
    n_users <int>
    epoch <int>
    best_metric <float>
    step <optimizer> <int>
    tensor <name> <f4|i8> <dim,dim,...> <byte offset>
    end

The tensor block starts right after ``end\\n``; offsets are relative to it.
Parameters and Adam moments are float32; optimizer row-step counters are int64.
"""

from __future__ import annotations

import logging
import math
from dataclasses import fields
from pathlib import Path

import numpy as np
from numerics import Tensor
from parsrec import ModelConfig, ModelConfigError, ParsRecModel

from .data_models import Checkpoint
from .errors import CheckpointError

logger = logging.getLogger(__name__)

MAGIC = "parsrec-checkpoint"
FORMAT_VERSION = 2
_DTYPES = {"f4": np.dtype("<f4"), "i8": np.dtype("<i8")}
_END = b"end\n"
_OPT_PREFIX = "opt."
_RECORDS = {"config", "n_users", "epoch", "best_metric", "step", "tensor"}


def _format_value(value: object) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _dtype_code(array: np.ndarray) -> str:
    return "i8" if np.issubdtype(array.dtype, np.integer) else "f4"


def _parse_config(values: dict[str, str]) -> ModelConfig:
    kwargs: dict[str, object] = {}
    for f in fields(ModelConfig):
        if f.name not in values:
            raise CheckpointError(f"checkpoint header lacks config field {f.name!r}")
        raw = values.pop(f.name)
        try:
            if f.type == "bool":
                if raw not in ("True", "False"):
                    raise ValueError(raw)
                kwargs[f.name] = raw == "True"
            elif f.type == "int":
                kwargs[f.name] = int(raw)
            else:
                kwargs[f.name] = float(raw)
        except ValueError as e:
            raise CheckpointError(f"bad value {raw!r} for config field {f.name!r}") from e
    if values:
        raise CheckpointError(f"unknown config fields in checkpoint: {sorted(values)}")
    config = ModelConfig(**kwargs)
    try:
        config.validate()
    except ModelConfigError as e:
        raise CheckpointError(f"checkpoint config is invalid: {e}") from e
    return config


def save_checkpoint(
    path: str | Path,
    model: ParsRecModel,
    epoch: int = 0,
    best_metric: float = float("nan"),
    optimizer_arrays: dict[str, np.ndarray] | None = None,
    optimizer_steps: dict[str, int] | None = None,
) -> None:
    """Write parameters (and optionally optimizer state) to ``path``."""
    tensors = {name: p.data for name, p in model.params.items()}
    for name, array in (optimizer_arrays or {}).items():
        tensors[_OPT_PREFIX + name] = array

    lines = [f"{MAGIC} {FORMAT_VERSION}"]
    for f in fields(ModelConfig):
        lines.append(f"config {f.name} {_format_value(getattr(model.config, f.name))}")
    lines.append(f"n_users {model.n_users}")
    lines.append(f"epoch {epoch}")
    lines.append(f"best_metric {best_metric!r}")
    for name, t in sorted((optimizer_steps or {}).items()):
        lines.append(f"step {name} {t}")
    codes = {name: _dtype_code(array) for name, array in tensors.items()}
    offset = 0
    for name, array in tensors.items():
        shape = ",".join(str(d) for d in array.shape)
        lines.append(f"tensor {name} {codes[name]} {shape} {offset}")
        offset += array.size * _DTYPES[codes[name]].itemsize
    header = ("\n".join(lines) + "\n").encode("utf-8") + _END

    with open(path, "wb") as f:
        f.write(header)
        for name, array in tensors.items():
            f.write(np.ascontiguousarray(array, dtype=_DTYPES[codes[name]]).tobytes())
    logger.info("Saved checkpoint %s (%d tensors, epoch %d)", path, len(tensors), epoch)


def read_checkpoint(path: str | Path, expected: ModelConfig | None = None) -> Checkpoint:
    """Parse a checkpoint; ``expected`` must equal the stored config when given."""
    raw = Path(path).read_bytes()
    end = raw.find(b"\n" + _END)
    if not raw.startswith(MAGIC.encode()) or end < 0:
        raise CheckpointError(f"{path}: not a checkpoint (missing header)")
    try:
        header = raw[:end].decode("utf-8").split("\n")
    except UnicodeDecodeError as e:
        raise CheckpointError(f"{path}: header is not valid text") from e
    body = raw[end + 1 + len(_END) :]

    magic = header[0].split()
    if len(magic) != 2 or magic[1] != str(FORMAT_VERSION):
        raise CheckpointError(f"{path}: unsupported checkpoint version {header[0]!r}")

    config_values: dict[str, str] = {}
    manifest: list[tuple[str, np.dtype, tuple[int, ...], int]] = []
    steps: dict[str, int] = {}
    n_users = epoch = None
    best_metric = math.nan
    for line in header[1:]:
        kind, *rest = line.split(" ")
        if kind not in _RECORDS:
            raise CheckpointError(f"{path}: unknown header record {kind!r}")
        try:
            if kind == "config":
                config_values[rest[0]] = rest[1]
            elif kind == "n_users":
                n_users = int(rest[0])
            elif kind == "epoch":
                epoch = int(rest[0])
            elif kind == "best_metric":
                best_metric = float(rest[0])
            elif kind == "step":
                steps[rest[0]] = int(rest[1])
            elif kind == "tensor":
                dtype = _DTYPES[rest[1]]
                shape = tuple(int(d) for d in rest[2].split(",")) if rest[2] else ()
                manifest.append((rest[0], dtype, shape, int(rest[3])))
        except (IndexError, KeyError, ValueError) as e:
            raise CheckpointError(f"{path}: malformed header line {line!r}") from e
    if n_users is None or epoch is None:
        raise CheckpointError(f"{path}: header lacks n_users or epoch")

    config = _parse_config(config_values)
    if expected is not None and expected != config:
        raise CheckpointError(
            f"{path}: stored config {config} does not match requested {expected}"
        )

    arrays: dict[str, np.ndarray] = {}
    for name, dtype, shape, offset in manifest:
        nbytes = int(np.prod(shape, dtype=np.int64)) * dtype.itemsize
        if offset + nbytes > len(body):
            raise CheckpointError(f"{path}: truncated inside tensor {name!r}")
        flat = np.frombuffer(body, dtype=dtype, count=nbytes // dtype.itemsize, offset=offset)
        arrays[name] = flat.reshape(shape)
    expected_size = sum(
        int(np.prod(shape, dtype=np.int64)) * dtype.itemsize for _, dtype, shape, _ in manifest
    )
    if len(body) != expected_size:
        raise CheckpointError(f"{path}: {len(body)} data bytes, manifest declares {expected_size}")

    params = {
        name: Tensor(a.copy(), requires_grad=True, name=name)
        for name, a in arrays.items()
        if not name.startswith(_OPT_PREFIX)
    }
    try:
        model = ParsRecModel(config, n_users, params)
    except ModelConfigError as e:
        raise CheckpointError(f"{path}: tensors do not match the stored config: {e}") from e
    optimizer_arrays = {
        name.removeprefix(_OPT_PREFIX): a.copy()
        for name, a in arrays.items()
        if name.startswith(_OPT_PREFIX)
    }
    logger.debug("Read checkpoint %s at epoch %d", path, epoch)
    return Checkpoint(
        model=model,
        epoch=epoch,
        best_metric=best_metric,
        optimizer_arrays=optimizer_arrays,
        optimizer_steps=steps,
    )


def load_checkpoint(path: str | Path, expected: ModelConfig | None = None) -> ParsRecModel:
    return read_checkpoint(path, expected).model
