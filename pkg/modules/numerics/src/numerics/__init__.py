"""Numerics: a minimal dense-tensor engine for the PARSRec laboratory.

Tensors wrap numpy arrays; a ``Graph`` tape records primitive ops so that
``backward`` can replay them in reverse. Dense parameters train with
``Adam``, embedding tables with the row-sparse ``SparseAdam``.

Example:
    from numerics import Graph, Tensor, backward, matmul, tensor_sum

    w = Tensor([[1.0, 2.0], [3.0, 4.0]], requires_grad=True)
    x = Tensor([[1.0, 0.0]])
    with Graph() as graph:
        loss = tensor_sum(matmul(x, w))
    backward(loss, graph)
    print(w.grad)  # [[1, 1], [0, 0]]
"""

from .errors import (
    GraphError,
    IndexRangeError,
    NonFiniteError,
    NumericsError,
    OptimizerError,
    ShapeError,
)
from .gradcheck import gradient_check, numeric_gradient
from .ops import (
    add,
    concat,
    cross_entropy_loss,
    dropout,
    embedding_bag,
    embedding_lookup,
    layer_norm,
    matmul,
    mul,
    relu,
    reshape,
    row_softmax,
    scale,
    tensor_sum,
    transpose,
)
from .optim import (
    Adam,
    OptimizerState,
    SparseAdam,
    adam_step,
    clip_global_norm,
    sparse_adam_step,
)
from .streams import Stream, make_rng
from .tensor import Graph, Node, Tensor, backward, default_dtype, float64_mode

__all__ = [
    # Tensor and tape
    "Tensor",
    "Graph",
    "Node",
    "backward",
    "default_dtype",
    "float64_mode",
    # Primitives
    "add",
    "concat",
    "cross_entropy_loss",
    "dropout",
    "embedding_bag",
    "embedding_lookup",
    "layer_norm",
    "matmul",
    "mul",
    "relu",
    "reshape",
    "row_softmax",
    "scale",
    "tensor_sum",
    "transpose",
    # Optimization
    "Adam",
    "SparseAdam",
    "OptimizerState",
    "adam_step",
    "sparse_adam_step",
    "clip_global_norm",
    # Checking and randomness
    "gradient_check",
    "numeric_gradient",
    "Stream",
    "make_rng",
    # Errors
    "NumericsError",
    "ShapeError",
    "IndexRangeError",
    "NonFiniteError",
    "GraphError",
    "OptimizerError",
]
