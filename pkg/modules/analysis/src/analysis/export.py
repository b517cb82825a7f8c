"""Heatmap export: a labelled CSV next to a binary PGM/PPM raster."""

from __future__ import annotations

import csv
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from .errors import AnalysisConfigError
from .heatmaps import display_filter

logger = logging.getLogger(__name__)


def _to_gray(matrix: np.ndarray) -> np.ndarray:
    """Nonnegative values to 0..255 with white for zero and black for the max."""
    top = float(matrix.max())
    scaled = matrix / top if top > 0 else np.zeros_like(matrix)
    return np.round(255 * (1 - scaled)).astype(np.uint8)


def _to_diverging(matrix: np.ndarray) -> np.ndarray:
    """Signed values to RGB: blue below zero, red above, white at zero."""
    top = float(np.abs(matrix).max())
    scaled = matrix / top if top > 0 else np.zeros_like(matrix)
    fade = np.round(255 * (1 - np.abs(scaled))).astype(np.uint8)
    rgb = np.full((*matrix.shape, 3), 255, dtype=np.uint8)
    pos, neg = scaled > 0, scaled < 0
    rgb[pos, 1] = fade[pos]
    rgb[pos, 2] = fade[pos]
    rgb[neg, 0] = fade[neg]
    rgb[neg, 1] = fade[neg]
    return rgb


def render_image(matrix: np.ndarray, threshold: float = 0.05, cell_pixels: int = 16) -> bytes:
    """Binary PGM (P5) for nonnegative matrices, PPM (P6) when any entry is negative."""
    if cell_pixels < 1:
        raise AnalysisConfigError(f"cell_pixels must be >= 1, got {cell_pixels}")
    shown = display_filter(np.asarray(matrix, dtype=np.float64), threshold)
    if (shown < 0).any():
        pixels, magic = _to_diverging(shown), b"P6"
    else:
        pixels, magic = _to_gray(shown), b"P5"
    pixels = np.repeat(np.repeat(pixels, cell_pixels, axis=0), cell_pixels, axis=1)
    height, width = pixels.shape[:2]
    return magic + f"\n{width} {height}\n255\n".encode() + pixels.tobytes()


def write_heatmap_csv(matrix: np.ndarray, labels: Sequence[str], path: str | Path) -> None:
    """Unfiltered values; first row and first column carry ``labels``."""
    matrix = np.asarray(matrix)
    if matrix.shape != (len(labels), len(labels)):
        raise AnalysisConfigError(f"{len(labels)} labels for a heatmap of shape {matrix.shape}")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["", *labels])
        for label, row in zip(labels, matrix, strict=True):
            writer.writerow([label, *(f"{v:.6f}" for v in row)])


def export_heatmap(
    matrix: np.ndarray,
    labels: Sequence[str],
    path: str | Path,
    threshold: float = 0.05,
    cell_pixels: int = 16,
) -> tuple[Path, Path]:
    """Write ``<path>.csv`` and ``<path>.pgm``/``.ppm``; returns both paths.

    The display threshold applies to the image only; the CSV keeps raw values.
    """
    base = Path(path).with_suffix("")
    csv_path = base.with_suffix(".csv")
    write_heatmap_csv(matrix, labels, csv_path)
    image = render_image(matrix, threshold, cell_pixels)
    image_path = base.with_suffix(".pgm" if image.startswith(b"P5") else ".ppm")
    image_path.write_bytes(image)
    logger.debug("Exported heatmap %s", base)
    return csv_path, image_path


def category_labels(n_categories: int) -> list[str]:
    return [f"C{c}" for c in range(n_categories)]
