"""Tests for backward(), gradient clipping and the Adam optimizers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from numerics import (
    Adam,
    Graph,
    GraphError,
    IndexRangeError,
    NonFiniteError,
    OptimizerError,
    OptimizerState,
    SparseAdam,
    Stream,
    Tensor,
    adam_step,
    backward,
    clip_global_norm,
    float64_mode,
    make_rng,
    matmul,
    mul,
    scale,
    sparse_adam_step,
    tensor_sum,
)


def _param(values, grad) -> Tensor:
    p = Tensor(values, requires_grad=True)
    p.grad[...] = grad
    return p


class TestBackward:
    def test_sum_gives_ones(self):
        x = Tensor([[1.0, -2.0, 3.0]], requires_grad=True)
        with Graph() as graph:
            loss = tensor_sum(x)
        backward(loss, graph)
        np.testing.assert_array_equal(x.grad, [[1, 1, 1]])

    def test_half_squared_norm_gives_x(self):
        x = Tensor([[0.5, -1.5, 2.0]], requires_grad=True)
        with Graph() as graph:
            loss = scale(tensor_sum(mul(x, x)), 0.5)
        backward(loss, graph)
        np.testing.assert_allclose(x.grad, x.data)

    def test_fan_out_accumulates(self):
        x = Tensor([[1.0, 2.0]], requires_grad=True)
        w = Tensor([[1.0], [1.0]])
        with Graph() as graph:
            y = matmul(x, w)
            loss = tensor_sum(mul(y, y))  # (x1 + x2)^2
        backward(loss, graph)
        np.testing.assert_allclose(x.grad, [[6.0, 6.0]])

    def test_each_node_visited_once(self):
        x = Tensor([[1.0]], requires_grad=True)
        with Graph() as graph:
            loss = tensor_sum(scale(x, 3.0))
        assert len(graph) == 2
        backward(loss, graph)
        assert len(graph) == 0
        np.testing.assert_allclose(x.grad, [[3.0]])

    def test_without_graph_raises(self):
        x = Tensor([[1.0]], requires_grad=True)
        loss = tensor_sum(x)
        with pytest.raises(GraphError):
            backward(loss, None)
        with pytest.raises(GraphError):
            backward(loss, Graph())

    def test_inference_records_nothing(self):
        w = Tensor([[1.0]], requires_grad=True)
        with Graph() as graph:
            tensor_sum(matmul(Tensor([[2.0]]), Tensor([[3.0]])))
        assert len(graph) == 0
        assert w.grad is not None


class TestClipGlobalNorm:
    def test_halves_large_gradient(self):
        p = _param([0.0, 0.0], [36.0, 48.0])  # norm 60
        assert clip_global_norm([p], 30.0) == pytest.approx(0.5)
        np.testing.assert_allclose(p.grad, [18.0, 24.0])

    def test_small_gradient_untouched(self):
        p = _param([0.0], [3.0])
        assert clip_global_norm([p], 30.0) == 1.0
        np.testing.assert_array_equal(p.grad, [3.0])

    def test_non_finite_raises(self):
        with pytest.raises(NonFiniteError):
            clip_global_norm([_param([0.0], [np.nan])])

    @settings(max_examples=50, deadline=None)
    @given(
        grads=st.lists(
            st.floats(min_value=-1e3, max_value=1e3, allow_nan=False), min_size=1, max_size=10
        )
    )
    def test_bounded_and_idempotent(self, grads):
        with float64_mode():
            p = _param(np.zeros(len(grads)), grads)
            clip_global_norm([p], 30.0)
            once = p.grad.copy()
            clip_global_norm([p], 30.0)
        assert np.linalg.norm(once) <= 30.0 + 1e-6
        np.testing.assert_allclose(p.grad, once, rtol=1e-12)


class TestAdam:
    def test_first_step_moves_by_lr(self):
        with float64_mode():
            p = _param([1.0], [1.0])
            adam_step(OptimizerState(), {"w": p})
        assert p.data[0] == pytest.approx(1.0 - 1e-3 / (1.0 + 1e-8), abs=1e-12)

    def test_zero_gradient_no_change(self):
        p = _param([1.5, -2.0], [0.0, 0.0])
        adam_step(OptimizerState(), {"w": p})
        np.testing.assert_array_equal(p.data, [1.5, -2.0])

    def test_constant_gradient_steps_by_lr_twice(self):
        with float64_mode():
            p = _param([0.0], [4.0])
            state = OptimizerState()
            adam_step(state, {"w": p})
            first = p.data[0]
            adam_step(state, {"w": p})
            second = p.data[0] - first
        assert first == pytest.approx(-1e-3, rel=1e-6)
        assert second == pytest.approx(-1e-3, rel=1e-6)
        assert state.t == 2

    def test_empty_parameter_set_raises(self):
        with pytest.raises(OptimizerError):
            adam_step(OptimizerState(), {})

    def test_wrapper_zero_grad(self):
        p = _param([1.0], [1.0])
        opt = Adam({"w": p})
        opt.step()
        opt.zero_grad()
        assert not p.grad.any()


class TestSparseAdam:
    def test_no_rows_touched_leaves_table(self):
        table = _param(np.ones((3, 2)), np.ones((3, 2)))
        sparse_adam_step(OptimizerState(mode="sparse-rows"), "E", table, [])
        np.testing.assert_array_equal(table.data, np.ones((3, 2)))

    def test_only_touched_row_moves(self):
        table = _param(np.ones((3, 2)), np.ones((3, 2)))
        state = OptimizerState(mode="sparse-rows")
        sparse_adam_step(state, "E", table, {1})
        assert (table.data[[0, 2]] == 1).all()
        assert (table.data[1] < 1).all()
        np.testing.assert_array_equal(state.row_steps["E"], [0, 1, 0])
        assert not state.m["E"][[0, 2]].any()

    def test_single_touch_equals_dense_first_step(self):
        with float64_mode():
            grad = np.array([[0.3, -2.0]])
            sparse = _param([[1.0, 2.0]], grad)
            dense = _param([[1.0, 2.0]], grad)
            sparse_adam_step(OptimizerState(mode="sparse-rows"), "E", sparse, [0])
            adam_step(OptimizerState(), {"E": dense})
        np.testing.assert_allclose(sparse.data, dense.data, atol=1e-12)

    def test_all_rows_equals_dense(self):
        rng = make_rng(3, Stream.INIT)
        values = rng.normal(size=(4, 3))
        sparse = Tensor(values, requires_grad=True)
        dense = Tensor(values, requires_grad=True)
        s_state = OptimizerState(mode="sparse-rows")
        d_state = OptimizerState()
        for _ in range(3):
            g = rng.normal(size=(4, 3))
            sparse.grad[...] = g
            dense.grad[...] = g
            sparse_adam_step(s_state, "E", sparse, range(4))
            adam_step(d_state, {"E": dense})
        np.testing.assert_allclose(sparse.data, dense.data, atol=1e-6)

    def test_out_of_range_row_raises(self):
        table = _param(np.ones((2, 2)), np.ones((2, 2)))
        with pytest.raises(IndexRangeError):
            sparse_adam_step(OptimizerState(mode="sparse-rows"), "E", table, [2])

    def test_wrapper_uses_recorded_rows(self):
        table = Tensor(np.ones((4, 2)), requires_grad=True)
        table.grad[2] = 1.0
        table.mark_rows(np.array([2]))
        opt = SparseAdam({"E": table})
        opt.step()
        assert (table.data[2] < 1).all()
        assert (table.data[[0, 1, 3]] == 1).all()
        assert opt.states["E"].t == 1
