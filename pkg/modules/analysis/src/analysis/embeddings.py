"""Item embedding self-similarity."""

import numpy as np
from parsrec import ParsRecModel


def embedding_similarity(model: ParsRecModel) -> np.ndarray:
    """E E^T over real items (SOB and EOB rows dropped), (n_items, n_items)."""
    e = model.item_emb.data[: model.config.n_items].astype(np.float64)
    sim = e @ e.T
    # exact symmetry regardless of BLAS summation order
    return (sim + sim.T) / 2
