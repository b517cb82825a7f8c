"""ParsRec: an attention-fused recurrent recommender for market baskets.

At each step a query made of the user embedding and the recurrent state
attends over the items fed so far (starting at SOB); the attended vector
drives a ReLU recurrent update and a prediction head over the vocabulary.

Example:
    import numpy as np
    from parsrec import ModelConfig, forward_session, init_model, item_scores

    model = init_model(ModelConfig(n_items=100), n_users=10, rng=np.random.default_rng(0))
    out = forward_session(model, user=3, history=[5, 17], fed=[42, 7])
    scores = item_scores(model, out.logits[0])  # ranks the first pick
"""

from .data_models import ForwardResult, ModelConfig, StepState
from .errors import EmptyBasketError, ModelConfigError, ParsRecError
from .feeding import teacher_force_next
from .forward import (
    begin_session,
    forward_batch,
    forward_session,
    item_scores,
    session_loss,
    step,
)
from .layers import (
    arnn_step,
    attention_step,
    encode_prefix,
    feed_forward,
    history_state,
    user_query,
)
from .model import (
    EMBEDDING_TABLES,
    ParsRecModel,
    init_model,
    parameter_shapes,
    xavier_normal,
)

__all__ = [
    # Data models
    "ModelConfig",
    "StepState",
    "ForwardResult",
    # Parameters
    "ParsRecModel",
    "EMBEDDING_TABLES",
    "init_model",
    "parameter_shapes",
    "xavier_normal",
    # Layers
    "history_state",
    "encode_prefix",
    "user_query",
    "attention_step",
    "feed_forward",
    "arnn_step",
    # Unrolling
    "begin_session",
    "step",
    "forward_batch",
    "forward_session",
    "session_loss",
    "item_scores",
    "teacher_force_next",
    # Errors
    "ParsRecError",
    "ModelConfigError",
    "EmptyBasketError",
]
