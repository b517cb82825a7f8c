"""Dataset files: one JSON session per line plus a JSON metadata sidecar.

``dataset.jsonl`` holds ``{"user":int,"t":int,"items":[int,...]}`` records in
ascending (user, t); ``dataset.meta.json`` holds the item->category map,
user->group map, per-group Sigma, prices, the config echo and the format
version. Both files are newline-terminated and written deterministically.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .data_models import Dataset, PriceTable, Session
from .errors import DatasetFormatError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def meta_path(path: str | Path) -> Path:
    """Sidecar metadata path: ``runs/dataset.jsonl`` -> ``runs/dataset.meta.json``."""
    return Path(path).with_suffix(".meta.json")


def write_dataset(ds: Dataset, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for s in ds.sessions:
            record = {"user": s.user, "t": s.t, "items": list(s.items)}
            f.write(json.dumps(record, separators=(",", ":")) + "\n")

    meta = {
        "format_version": FORMAT_VERSION,
        "n_sessions": len(ds.sessions),
        "item_category": ds.item_category.tolist(),
        "user_group": ds.user_group.tolist(),
        "group_sigma": ds.group_sigma.tolist(),
        "prices": (
            None
            if ds.prices is None
            else {"base": ds.prices.base.tolist(), "product": ds.prices.product.tolist()}
        ),
        "config": ds.config,
    }
    with open(meta_path(path), "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(meta, sort_keys=True) + "\n")
    logger.info("Wrote %d sessions to %s", len(ds.sessions), path)


def _read_meta(path: Path) -> dict:
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DatasetFormatError(f"{path}: malformed metadata: {e}") from e
    if not isinstance(meta, dict):
        raise DatasetFormatError(f"{path}: metadata must be a JSON object")
    version = meta.get("format_version")
    if version != FORMAT_VERSION:
        raise DatasetFormatError(
            f"{path}: format_version {version!r}, expected {FORMAT_VERSION}"
        )
    missing = {"n_sessions", "item_category", "user_group", "group_sigma"} - meta.keys()
    if missing:
        raise DatasetFormatError(f"{path}: metadata lacks {sorted(missing)}")
    return meta


def _parse_session(line: str, where: str) -> Session:
    try:
        record = json.loads(line)
        return Session(
            user=int(record["user"]),
            t=int(record["t"]),
            items=tuple(int(i) for i in record["items"]),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DatasetFormatError(f"{where}: malformed session record: {e}") from e


def read_dataset(path: str | Path) -> Dataset:
    """Load a dataset written by ``write_dataset``.

    Raises DatasetFormatError on malformed records, a version mismatch, or a
    session count that disagrees with the metadata (truncation).
    """
    path = Path(path)
    meta = _read_meta(meta_path(path))

    sessions = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.endswith("\n"):
                raise DatasetFormatError(f"{path}:{lineno}: truncated record")
            sessions.append(_parse_session(line, f"{path}:{lineno}"))
    if len(sessions) != meta["n_sessions"]:
        raise DatasetFormatError(
            f"{path}: {len(sessions)} sessions, metadata declares {meta['n_sessions']}"
        )

    prices = meta.get("prices")
    return Dataset(
        sessions=sessions,
        item_category=np.asarray(meta["item_category"], dtype=np.int64),
        user_group=np.asarray(meta["user_group"], dtype=np.int64),
        group_sigma=np.asarray(meta["group_sigma"], dtype=np.float64),
        prices=(
            None
            if prices is None
            else PriceTable(
                base=np.asarray(prices["base"], dtype=np.float64),
                product=np.asarray(prices["product"], dtype=np.float64),
            )
        ),
        config=meta.get("config", {}),
    )
