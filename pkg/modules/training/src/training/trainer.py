"""Teacher-forced unrolling, optimizer steps and the epoch loop."""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Callable
from dataclasses import replace
from pathlib import Path

import numpy as np
from evaluation import EvalConfig, ParsRecScorer, Split, SplitSpec, evaluate_model
from numerics import (
    Adam,
    Graph,
    NonFiniteError,
    SparseAdam,
    Stream,
    backward,
    clip_global_norm,
    make_rng,
)
from parsrec import (
    ForwardResult,
    ParsRecModel,
    begin_session,
    item_scores,
    session_loss,
    step,
    teacher_force_next,
)
from tqdm import tqdm

from .batching import plan_batches, training_sessions
from .data_models import Batch, EpochRecord, TrainConfig, TrainingHistory, Unroll
from .errors import TrainingDivergedError

logger = logging.getLogger(__name__)

HISTORY_HEADER = ["epoch", "loss", "hr10", "ndcg10", "sessprec10"]


class Optimizers:
    """Dense Adam for matrices and biases, row-sparse Adam for the embedding tables."""

    def __init__(self, model: ParsRecModel, config: TrainConfig):
        betas = (config.beta1, config.beta2)
        self.dense = Adam(model.dense_params(), lr=config.lr, betas=betas, eps=config.eps)
        self.sparse = SparseAdam(
            model.embedding_tables(), lr=config.lr, betas=betas, eps=config.eps
        )

    def step(self) -> None:
        self.dense.step()
        self.sparse.step()

    def zero_grad(self) -> None:
        self.dense.zero_grad()
        self.sparse.zero_grad()

    def state_arrays(self) -> tuple[dict[str, np.ndarray], dict[str, int]]:
        """Copies of the moment arrays and the step counters, keyed for checkpointing."""
        arrays: dict[str, np.ndarray] = {}
        steps = {"dense": self.dense.state.t}
        for name in self.dense.params:
            if name in self.dense.state.m:
                arrays[f"dense.m.{name}"] = self.dense.state.m[name].copy()
                arrays[f"dense.v.{name}"] = self.dense.state.v[name].copy()
        for name, state in self.sparse.states.items():
            steps[f"sparse.{name}"] = state.t
            if name in state.m:
                arrays[f"sparse.m.{name}"] = state.m[name].copy()
                arrays[f"sparse.v.{name}"] = state.v[name].copy()
                arrays[f"sparse.rows.{name}"] = state.row_steps[name].copy()
        return arrays, steps

    def load_state(self, arrays: dict[str, np.ndarray], steps: dict[str, int]) -> None:
        self.dense.state.t = steps.get("dense", 0)
        for name in self.dense.params:
            if f"dense.m.{name}" in arrays:
                self.dense.state.m[name] = arrays[f"dense.m.{name}"].copy()
                self.dense.state.v[name] = arrays[f"dense.v.{name}"].copy()
        for name, state in self.sparse.states.items():
            state.t = steps.get(f"sparse.{name}", 0)
            if f"sparse.m.{name}" in arrays:
                state.m[name] = arrays[f"sparse.m.{name}"].copy()
                state.v[name] = arrays[f"sparse.v.{name}"].copy()
                state.row_steps[name] = arrays[f"sparse.rows.{name}"].astype(np.int64)


def unroll(
    model: ParsRecModel,
    batch: Batch,
    feed_rng: np.random.Generator,
    training: bool = True,
    dropout_rng: np.random.Generator | None = None,
) -> Unroll:
    """Run a batch through the model, choosing each fed item by teacher forcing.

    The greedy prediction over real items is fed when it is still in the
    basket, otherwise a random remaining item; exhausted baskets feed EOB.
    Dropout masks come from ``feed_rng`` when no ``dropout_rng`` is given.
    """
    if dropout_rng is None:
        dropout_rng = feed_rng
    eob = model.config.eob
    state = begin_session(model, batch.users, batch.histories)
    remaining = [set(s.items) for s in batch.sessions]
    fed = np.full((len(batch), batch.length), eob, dtype=np.int64)
    result = ForwardResult()
    for j in range(batch.length):
        logits, weights = step(model, state, training, dropout_rng)
        predicted = np.argmax(item_scores(model, logits), axis=1)
        for b, rest in enumerate(remaining):
            if rest:
                item = teacher_force_next(int(predicted[b]), rest, feed_rng)
                rest.discard(item)
                fed[b, j] = item
        result.logits.append(logits)
        result.attention.append(weights)
        state.feed(fed[:, j])
    return Unroll(batch=batch, fed=fed, result=result)


def run_training_step(
    model: ParsRecModel,
    batch: Batch,
    optimizers: Optimizers,
    feed_rng: np.random.Generator,
    dropout_rng: np.random.Generator | None = None,
    clip_norm: float = 30.0,
    on_unroll: Callable[[ParsRecModel, Unroll], None] | None = None,
) -> float:
    """One teacher-forced forward, backward, clip and Adam update; returns the batch loss."""
    optimizers.zero_grad()
    with Graph() as graph:
        out = unroll(model, batch, feed_rng, training=True, dropout_rng=dropout_rng)
        loss = session_loss(out.result.logits, out.fed, model.config.eob)
    value = loss.item()
    if not math.isfinite(value):
        raise TrainingDivergedError(
            f"non-finite loss {value} on a batch of {len(batch)} sessions "
            f"(users {batch.users[:5].tolist()}...)"
        )
    backward(loss, graph)
    try:
        clip_global_norm(model.params.values(), clip_norm)
    except NonFiniteError as e:
        raise TrainingDivergedError(f"gradient norm is not finite at loss {value:.4f}") from e
    optimizers.step()
    if on_unroll is not None:
        on_unroll(model, out)
    return value


def fit(
    model: ParsRecModel,
    splits: SplitSpec,
    config: TrainConfig | None = None,
    eval_config: EvalConfig | None = None,
    progress: bool = True,
    on_unroll: Callable[[ParsRecModel, Unroll], None] | None = None,
    history_path: str | Path | None = None,
    optimizers: Optimizers | None = None,
) -> TrainingHistory:
    """Train with early stopping on validation NDCG@10.

    The model is left holding the parameters of the best validated epoch and
    the history carries the optimizer state of that epoch. Pass ``optimizers``
    restored from a checkpoint to continue with its Adam moments.
    """
    config = config or TrainConfig()
    config.validate()
    eval_config = eval_config or EvalConfig(seed=config.seed)
    # early stopping reads NDCG@10
    eval_config = replace(eval_config, ks=tuple(sorted({*eval_config.ks, 10})))
    sessions = training_sessions(splits)
    if not sessions:
        raise ValueError("no training sessions: every user needs at least 3 sessions")
    if optimizers is None:
        optimizers = Optimizers(model, config)
    scorer = ParsRecScorer(model)
    history = TrainingHistory()
    best_state = model.state_arrays()
    best_optimizer = optimizers.state_arrays()
    stale = 0
    logger.info(
        "Training %d parameters on %d sessions (batch %d, up to %d epochs)",
        model.num_parameters(),
        len(sessions),
        config.batch_size,
        config.max_epochs,
    )

    for epoch in range(1, config.max_epochs + 1):
        batch_rng = make_rng(config.seed, Stream.BATCHING, epoch)
        plan = plan_batches(sessions, config.batch_size, batch_rng)
        feed_rng = make_rng(config.seed, Stream.FEEDING, epoch)
        dropout_rng = make_rng(config.seed, Stream.DROPOUT, epoch)
        total, weight = 0.0, 0
        for batch in tqdm(
            plan, desc=f"Epoch {epoch}", unit="batch", leave=False, disable=not progress
        ):
            loss = run_training_step(
                model, batch, optimizers, feed_rng, dropout_rng, config.clip_norm, on_unroll
            )
            # weight by real (non-padding) steps so the epoch loss is per item
            n_real = int((~batch.pad_mask).sum())
            total += loss * n_real
            weight += n_real
        record = EpochRecord(epoch=epoch, loss=total / weight)

        if epoch % config.eval_every == 0 or epoch == config.max_epochs:
            report = evaluate_model(
                scorer, splits, Split.VALIDATION, model.config.n_items, eval_config, progress=False
            )
            record.hr10 = report.hr.get(10, float("nan"))
            record.ndcg10 = report.ndcg.get(10, float("nan"))
            record.sessprec10 = report.sess_prec.get(10, float("nan"))
            if record.ndcg10 > history.best_metric:
                history.best_metric = record.ndcg10
                history.best_epoch = epoch
                best_state = model.state_arrays()
                best_optimizer = optimizers.state_arrays()
                stale = 0
            else:
                stale += 1
        history.records.append(record)
        logger.info(
            "Epoch %d: loss %.4f, val HR@10 %.4f, NDCG@10 %.4f",
            epoch,
            record.loss,
            record.hr10,
            record.ndcg10,
        )
        if history_path is not None:
            write_history_csv(history, history_path)
        if stale >= config.patience:
            history.stopped_early = True
            logger.info("Early stop after epoch %d (best epoch %d)", epoch, history.best_epoch)
            break

    model.load_arrays(best_state)
    optimizers.load_state(*best_optimizer)
    history.optimizer_arrays, history.optimizer_steps = best_optimizer
    return history


def write_history_csv(history: TrainingHistory, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HISTORY_HEADER)
        for r in history.records:
            writer.writerow(
                [r.epoch, *(f"{v:.6f}" for v in (r.loss, r.hr10, r.ndcg10, r.sessprec10))]
            )
