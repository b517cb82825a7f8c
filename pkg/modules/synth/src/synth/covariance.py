"""Category covariance plans, random correlation matrices and Gaussian sampling."""

from __future__ import annotations

import logging
import tomllib
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .data_models import CovarianceBlock, CovarianceBlockPlan
from .errors import InvalidPlanError, NotPositiveDefiniteError

logger = logging.getLogger(__name__)

PLAN_FORMAT_VERSION = 1
_SYMMETRY_TOL = 1e-10


def load_plan(path: str | Path | None = None) -> CovarianceBlockPlan:
    """Read a covariance plan from TOML; ``None`` loads the packaged default."""
    if path is None:
        text = resources.files("synth").joinpath("default_plan.toml").read_text()
        source = "default_plan.toml"
    else:
        text = Path(path).read_text()
        source = str(path)
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise InvalidPlanError(f"{source}: {e}") from e
    return parse_plan(raw, source=source)


def parse_plan(raw: dict[str, Any], source: str = "<plan>") -> CovarianceBlockPlan:
    version = raw.get("format_version", PLAN_FORMAT_VERSION)
    if version != PLAN_FORMAT_VERSION:
        raise InvalidPlanError(f"{source}: unsupported plan format_version {version}")
    groups_raw = raw.get("group", [])
    if not groups_raw:
        return CovarianceBlockPlan()

    groups: list[list[CovarianceBlock]] = []
    names: list[str] = []
    for g, group in enumerate(groups_raw):
        names.append(str(group.get("name", g)))
        blocks = []
        for b, block in enumerate(group.get("block", [])):
            where = f"{source}: group {names[-1]} block {b}"
            try:
                cats = tuple(int(c) for c in block["categories"])
                corr = np.asarray(block["corr"], dtype=np.float64)
            except (KeyError, TypeError, ValueError) as e:
                raise InvalidPlanError(f"{where}: {e}") from e
            _check_block(cats, corr, where)
            blocks.append(CovarianceBlock(categories=cats, corr=corr))
        _check_disjoint_prefix(blocks, f"{source}: group {names[-1]}")
        groups.append(blocks)
    return CovarianceBlockPlan(groups=groups, names=names)


def _check_block(cats: tuple[int, ...], corr: np.ndarray, where: str) -> None:
    d = len(cats)
    if d == 0:
        raise InvalidPlanError(f"{where}: empty block")
    if corr.shape != (d, d):
        raise InvalidPlanError(f"{where}: corr must be {d}x{d}, got {corr.shape}")
    if not np.allclose(corr, corr.T, atol=_SYMMETRY_TOL):
        raise InvalidPlanError(f"{where}: corr is not symmetric")
    if not np.all(np.diag(corr) == 1.0):
        raise InvalidPlanError(f"{where}: corr diagonal must be 1")
    off = corr[~np.eye(d, dtype=bool)]
    if off.size and np.abs(off).max() >= 1.0:
        raise InvalidPlanError(f"{where}: off-diagonal correlations must lie in (-1, 1)")


def _check_disjoint_prefix(blocks: list[CovarianceBlock], where: str) -> None:
    members = [c for block in blocks for c in block.categories]
    if len(set(members)) != len(members):
        raise InvalidPlanError(f"{where}: blocks overlap")
    if sorted(members) != list(range(len(members))):
        raise InvalidPlanError(f"{where}: blocks must cover categories 0..{len(members) - 1}")


def build_group_sigma(
    plan: CovarianceBlockPlan, group: int, n_categories: int
) -> np.ndarray:
    """Assemble the block-diagonal category covariance of one user group.

    Categories outside every block get unit variance and no correlation.
    Raises NotPositiveDefiniteError if the result cannot be factorized.
    """
    if not 0 <= group < len(plan.groups):
        raise InvalidPlanError(f"plan has {len(plan.groups)} group(s), no group {group}")
    sigma = np.eye(n_categories)
    for block in plan.blocks(group):
        if max(block.categories) >= n_categories:
            raise InvalidPlanError(
                f"block {block.categories} exceeds {n_categories} categories"
            )
        idx = np.asarray(block.categories)
        sigma[np.ix_(idx, idx)] = block.corr
    cholesky(sigma)
    return sigma


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L @ L.T == a; raises if ``a`` is not positive definite."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidPlanError(f"cholesky needs a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, atol=_SYMMETRY_TOL):
        raise InvalidPlanError("cholesky needs a symmetric matrix")
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"matrix is not positive definite: {e}") from e


def psd_factor(a: np.ndarray, max_jitter: float = 1e-6) -> np.ndarray:
    """Factor F with F @ F.T ~= a for a positive semidefinite ``a``.

    Tries Cholesky, then Cholesky with growing diagonal jitter, then an
    eigendecomposition with negative eigenvalues clipped to zero.
    """
    try:
        return cholesky(a)
    except NotPositiveDefiniteError:
        pass
    jitter = 1e-12
    eye = np.eye(a.shape[0])
    while jitter <= max_jitter:
        try:
            factor = np.linalg.cholesky(a + jitter * eye)
            logger.debug("Cholesky needed diagonal jitter %.0e", jitter)
            return factor
        except np.linalg.LinAlgError:
            jitter *= 10
    logger.warning(
        "Matrix not factorizable with jitter <= %.0e, using eigendecomposition", max_jitter
    )
    values, vectors = np.linalg.eigh(a)
    return vectors * np.sqrt(np.clip(values, 0.0, None))


def vine_correlation(
    d: int, rng: np.random.Generator, beta_a: float = 0.2, beta_b: float = 1.0
) -> np.ndarray:
    """Random d x d correlation matrix from the vine construction.

    Partial correlations are drawn as 2x - 1 with x ~ Beta(beta_a, beta_b)
    and composed into full correlations one vine level at a time.
    """
    if d < 1:
        raise ValueError(f"vine_correlation needs d >= 1, got {d}")
    partial = np.zeros((d, d))
    corr = np.eye(d)
    for k in range(d - 1):
        for i in range(k + 1, d):
            partial[k, i] = 2.0 * rng.beta(beta_a, beta_b) - 1.0
            p = partial[k, i]
            for level in range(k - 1, -1, -1):
                p = (
                    p * np.sqrt((1.0 - partial[level, i] ** 2) * (1.0 - partial[level, k] ** 2))
                    + partial[level, i] * partial[level, k]
                )
            corr[k, i] = corr[i, k] = p
    return corr


def sample_mvn(
    factor: np.ndarray, rng: np.random.Generator, size: int | None = None
) -> np.ndarray:
    """Draw from N(0, F F^T): one vector, or ``size`` stacked rows."""
    if size is None:
        return factor @ rng.standard_normal(factor.shape[1])
    return rng.standard_normal((size, factor.shape[1])) @ factor.T
