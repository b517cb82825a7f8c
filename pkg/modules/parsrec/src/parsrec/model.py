"""Learned parameters of the recommender and their initialization."""

from __future__ import annotations

import logging

import numpy as np
from numerics import Tensor

from .data_models import ModelConfig
from .errors import ModelConfigError

logger = logging.getLogger(__name__)

EMBEDDING_TABLES = ("user_emb", "item_emb")


def parameter_shapes(config: ModelConfig, n_users: int) -> dict[str, tuple[int, ...]]:
    """Name -> shape of every parameter, in a fixed order.

    Lower layers (all but the last) are self-attention over the prefix with
    d_v-wide projections; the last layer is queried by concat(user, h).
    """
    d_u, d_v, d_q, vocab = config.d_u, config.d_v, config.d_q, config.vocab_size
    shapes: dict[str, tuple[int, ...]] = {
        "user_emb": (n_users, d_u),
        "item_emb": (vocab, d_v),
    }
    for layer in range(config.layers):
        top = layer == config.layers - 1
        d_in = d_q if top else d_v
        for head in range(config.heads):
            prefix = f"layer{layer}.head{head}"
            shapes[f"{prefix}.w_q"] = (d_in, d_in)
            shapes[f"{prefix}.w_k"] = (d_v, d_in)
            shapes[f"{prefix}.w_v"] = (d_v, d_in)
        shapes[f"layer{layer}.w_o"] = (config.heads * d_in, d_v)
        if config.use_ln:
            shapes[f"layer{layer}.ln_gain"] = (d_v,)
            shapes[f"layer{layer}.ln_bias"] = (d_v,)
    for block, enabled in (("ffn_pre", config.ffn_pre_rnn), ("ffn_post", config.ffn_post_rnn)):
        if enabled:
            shapes[f"{block}.w1"] = (d_v, d_v)
            shapes[f"{block}.b1"] = (d_v,)
            shapes[f"{block}.w2"] = (d_v, d_v)
            shapes[f"{block}.b2"] = (d_v,)
    shapes["rnn.w1"] = (d_v, d_v)
    shapes["rnn.w2"] = (d_q, d_v)
    shapes["rnn.b1"] = (d_v,)
    shapes["out.w3"] = (d_v, vocab)
    shapes["out.w4"] = (d_q, vocab)
    shapes["out.b2"] = (vocab,)
    return shapes


def xavier_normal(rng: np.random.Generator, shape: tuple[int, int]) -> np.ndarray:
    """N(0, 2 / (n + m)) for an n x m matrix."""
    n, m = shape
    return rng.normal(0.0, np.sqrt(2.0 / (n + m)), size=shape)


class ParsRecModel:
    """All learned tensors of one recommender, addressed by name."""

    def __init__(self, config: ModelConfig, n_users: int, params: dict[str, Tensor]):
        expected = parameter_shapes(config, n_users)
        if list(params) != list(expected):
            raise ModelConfigError(
                f"parameter names do not match the config: "
                f"missing {sorted(expected.keys() - params.keys())}, "
                f"unexpected {sorted(params.keys() - expected.keys())}"
            )
        for name, shape in expected.items():
            if params[name].shape != shape:
                raise ModelConfigError(
                    f"{name}: shape {params[name].shape} does not match config {shape}"
                )
        self.config = config
        self.n_users = n_users
        self.params = params

    def __getitem__(self, name: str) -> Tensor:
        return self.params[name]

    def __repr__(self) -> str:
        return (
            f"ParsRecModel(n_items={self.config.n_items}, n_users={self.n_users}, "
            f"params={self.num_parameters()})"
        )

    @property
    def user_emb(self) -> Tensor:
        return self.params["user_emb"]

    @property
    def item_emb(self) -> Tensor:
        return self.params["item_emb"]

    def parameters(self) -> dict[str, Tensor]:
        return dict(self.params)

    def embedding_tables(self) -> dict[str, Tensor]:
        return {name: self.params[name] for name in EMBEDDING_TABLES}

    def dense_params(self) -> dict[str, Tensor]:
        return {n: p for n, p in self.params.items() if n not in EMBEDDING_TABLES}

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Copies of every parameter array."""
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        """Overwrite parameter values in place from ``state_arrays`` output."""
        for name, p in self.params.items():
            if arrays[name].shape != p.shape:
                raise ModelConfigError(f"{name}: cannot load shape {arrays[name].shape}")
            p.data[...] = arrays[name]


def init_model(config: ModelConfig, n_users: int, rng: np.random.Generator) -> ParsRecModel:
    """Fresh parameters.

    Embedding rows are uniform in +-1/sqrt(count) (users, or real items for
    the item table, whose SOB/EOB rows use the same range); matrices are
    Xavier-normal; biases start at 0 and layer-norm gains at 1.
    """
    config.validate()
    if n_users < 1:
        raise ModelConfigError(f"n_users must be >= 1, got {n_users}")
    params: dict[str, Tensor] = {}
    for name, shape in parameter_shapes(config, n_users).items():
        if name == "user_emb":
            bound = 1.0 / np.sqrt(n_users)
            values = rng.uniform(-bound, bound, size=shape)
        elif name == "item_emb":
            bound = 1.0 / np.sqrt(config.n_items)
            values = rng.uniform(-bound, bound, size=shape)
        elif name.endswith("ln_gain"):
            values = np.ones(shape)
        elif len(shape) == 1:
            values = np.zeros(shape)
        else:
            values = xavier_normal(rng, shape)
        params[name] = Tensor(values, requires_grad=True, name=name)
    model = ParsRecModel(config, n_users, params)
    logger.info("Initialized %s", model)
    return model
