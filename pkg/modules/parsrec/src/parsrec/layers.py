"""Building blocks of one recurrent step: history, attention, ARNN cell.

Every function works on a batch: tensors carry a leading batch axis B and a
singleton query axis, e.g. the hidden state is (B, 1, d_v).
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numerics import (
    Tensor,
    add,
    concat,
    dropout,
    embedding_bag,
    embedding_lookup,
    layer_norm,
    matmul,
    relu,
    reshape,
    row_softmax,
    scale,
    transpose,
)

from .model import ParsRecModel


def history_state(model: ParsRecModel, histories: Sequence[Sequence[int]]) -> Tensor:
    """Mean item embedding of each session's past items, (B, 1, d_v); empty -> 0."""
    bag = embedding_bag(model.item_emb, histories)
    return reshape(bag, (len(histories), 1, model.config.d_v))


def _dropout_residual_norm(
    model: ParsRecModel,
    layer: int,
    x: Tensor,
    residual: Tensor | None,
    training: bool,
    rng: np.random.Generator | None,
) -> Tensor:
    config = model.config
    if config.use_dropout and training:
        x = dropout(x, config.dropout, training, rng)
    if residual is not None:
        x = add(x, residual)
    if config.use_ln:
        x = layer_norm(x, model[f"layer{layer}.ln_gain"], model[f"layer{layer}.ln_bias"])
    return x


def _multi_head(
    model: ParsRecModel, layer: int, query: Tensor, keys: Tensor
) -> tuple[Tensor, list[Tensor]]:
    """concat_i(softmax((q Wq_i)(k Wk_i)^T / sqrt(d_k)) (k Wv_i)) W^O; keys double as values."""
    inv_sqrt_dk = 1.0 / np.sqrt(model.config.d_k)
    heads, weights = [], []
    for i in range(model.config.heads):
        prefix = f"layer{layer}.head{i}"
        q = matmul(query, model[f"{prefix}.w_q"])
        k = matmul(keys, model[f"{prefix}.w_k"])
        v = matmul(keys, model[f"{prefix}.w_v"])
        w = row_softmax(scale(matmul(q, transpose(k)), inv_sqrt_dk))
        weights.append(w)
        heads.append(matmul(w, v))
    return matmul(concat(heads, axis=-1), model[f"layer{layer}.w_o"]), weights


def encode_prefix(
    model: ParsRecModel, prefix: np.ndarray, training: bool, rng: np.random.Generator | None
) -> Tensor:
    """Key/value rows of the prefix, (B, n, d_v), after the lower self-attention layers."""
    x = embedding_lookup(model.item_emb, prefix)
    for layer in range(model.config.layers - 1):
        out, _ = _multi_head(model, layer, x, x)
        x = _dropout_residual_norm(model, layer, out, x, training, rng)
    return x


def user_query(model: ParsRecModel, users: np.ndarray, h: Tensor) -> Tensor:
    """Q = concat(E^U[user], h_j), (B, 1, d_q)."""
    user_vec = embedding_lookup(model.user_emb, np.asarray(users).reshape(-1, 1))
    return concat([user_vec, h], axis=-1)


def attention_step(
    model: ParsRecModel,
    users: np.ndarray,
    h: Tensor,
    prefix: np.ndarray,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[Tensor, np.ndarray, Tensor]:
    """Attend from the user-state query to the fed prefix.

    Returns (v_tilde (B, 1, d_v), head weights (B, heads, n), query (B, 1, d_q)).
    v_tilde = LN(Dropout(MultiHead) + h) with each part switchable by config.
    """
    keys = encode_prefix(model, prefix, training, rng)
    query = user_query(model, users, h)
    top = model.config.layers - 1
    out, weights = _multi_head(model, top, query, keys)
    residual = h if model.config.add_q_at_ln else None
    v_tilde = _dropout_residual_norm(model, top, out, residual, training, rng)
    head_weights = np.concatenate([w.data for w in weights], axis=1)
    return v_tilde, head_weights, query


def feed_forward(model: ParsRecModel, block: str, x: Tensor) -> Tensor:
    """Two-layer d_v -> d_v network with a ReLU in between."""
    hidden = relu(add(matmul(x, model[f"{block}.w1"]), model[f"{block}.b1"]))
    return add(matmul(hidden, model[f"{block}.w2"]), model[f"{block}.b2"])


def arnn_step(model: ParsRecModel, v_tilde: Tensor, query: Tensor) -> tuple[Tensor, Tensor]:
    """Recurrent update and prediction head.

    h_{j+1} = ReLU(v W1 + Q W2 + b1) and logits = v W3 + Q W4 + b2 over the
    full vocabulary (specials included), shapes (B, 1, d_v) and (B, vocab).
    """
    config = model.config
    if config.ffn_pre_rnn:
        v_tilde = feed_forward(model, "ffn_pre", v_tilde)
    h_next = relu(
        add(
            add(matmul(v_tilde, model["rnn.w1"]), matmul(query, model["rnn.w2"])),
            model["rnn.b1"],
        )
    )
    if config.ffn_post_rnn:
        h_next = feed_forward(model, "ffn_post", h_next)
    logits = add(
        add(matmul(v_tilde, model["out.w3"]), matmul(query, model["out.w4"])), model["out.b2"]
    )
    return h_next, reshape(logits, (logits.shape[0], config.vocab_size))
