from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from app.nn import tensor as T
from app.nn.gradcheck import gradient_check
from app.nn.optim import AdamState, adam_step, global_norm, grads_of
from app.nn.tensor import MASK_VALUE, Tape, backward, parameter
from app.utils.errors import NonFiniteError, ShapeError


def weighted(out, weights):
    """Perda escalar Σ w·out, para que todo gradiente seja O(1)."""
    return T.sum(T.mul(out, weights))


@pytest.fixture
def gen():
    return np.random.default_rng(0)


def leaf(gen, *shape, low=-1.0, high=1.0):
    return parameter(gen.uniform(low, high, size=shape))


class TestPrimitiveGradients:
    def test_matmul(self, gen):
        a, b = leaf(gen, 2, 3, 4), leaf(gen, 4, 5)
        w = gen.normal(size=(2, 3, 5))
        assert gradient_check(lambda: weighted(T.matmul(a, b), w), [a, b]) < 1e-4

    def test_matmul_transposed_batch(self, gen):
        a, b = leaf(gen, 2, 3, 4), leaf(gen, 2, 5, 4)
        w = gen.normal(size=(2, 3, 5))
        assert gradient_check(lambda: weighted(T.matmul(a, b, transpose_b=True), w), [a, b]) < 1e-4

    @pytest.mark.parametrize("op", [T.add, T.sub, T.mul])
    def test_broadcast_binary(self, gen, op):
        a, b = leaf(gen, 3, 4), leaf(gen, 4)
        w = gen.normal(size=(3, 4))
        assert gradient_check(lambda: weighted(op(a, b), w), [a, b]) < 1e-4

    @pytest.mark.parametrize("op", [T.tanh, T.sigmoid, T.square, lambda x: T.scale(x, -2.5)])
    def test_unary(self, gen, op):
        x = leaf(gen, 3, 5, low=-2.0, high=2.0)
        w = gen.normal(size=(3, 5))
        assert gradient_check(lambda: weighted(op(x), w), [x]) < 1e-4

    def test_relu_away_from_kink(self, gen):
        data = gen.uniform(0.1, 1.0, size=(4, 4)) * gen.choice([-1.0, 1.0], size=(4, 4))
        x = parameter(data)
        w = gen.normal(size=(4, 4))
        assert gradient_check(lambda: weighted(T.relu(x), w), [x]) < 1e-4

    def test_masked_softmax_and_log_softmax(self, gen):
        x = leaf(gen, 3, 6, low=-3.0, high=3.0)
        allowed = gen.uniform(size=(3, 6)) > 0.3
        allowed[:, 0] = True
        w = gen.normal(size=(3, 6))
        assert gradient_check(lambda: weighted(T.masked_softmax(x, allowed), w), [x]) < 1e-4
        assert gradient_check(
            lambda: weighted(T.mul(T.masked_log_softmax(x, allowed), allowed.astype(float)), w), [x]
        ) < 1e-4

    def test_structure_ops(self, gen):
        a, b = leaf(gen, 2, 3), leaf(gen, 2, 4)
        w1, w2 = gen.normal(size=(2, 7)), gen.normal(size=(2, 2, 3))
        assert gradient_check(lambda: weighted(T.concat([a, b], axis=-1), w1), [a, b]) < 1e-4
        c = leaf(gen, 2, 3)
        assert gradient_check(lambda: weighted(T.stack([a, c], axis=1), w2), [a, c]) < 1e-4
        assert gradient_check(lambda: weighted(T.narrow(b, 1, 3), gen.normal(size=(2, 2))), [b]) < 1e-4
        assert gradient_check(lambda: weighted(T.reshape(b, (4, 2)), gen.normal(size=(4, 2))), [b]) < 1e-4

    def test_take(self, gen):
        x = leaf(gen, 3, 5, 2)
        index = np.array([4, 0, 4])
        w = gen.normal(size=(3, 2))
        assert gradient_check(lambda: weighted(T.take(x, index), w), [x]) < 1e-4
        assert gradient_check(lambda: weighted(T.take(x, -1, axis=1), w), [x]) < 1e-4

    def test_reductions(self, gen):
        x = leaf(gen, 3, 4)
        w = gen.normal(size=(3,))
        assert gradient_check(lambda: weighted(T.sum(x, axis=1), w), [x]) < 1e-4
        assert gradient_check(lambda: weighted(T.mean(x, axis=1), w), [x]) < 1e-4
        assert gradient_check(lambda: weighted(T.max(x, axis=1), w), [x]) < 1e-4
        assert gradient_check(lambda: T.mean(x), [x]) < 1e-4

    def test_composite_tanh_of_linear(self, gen):
        W, x = leaf(gen, 4, 3), leaf(gen, 3, 1)
        assert gradient_check(lambda: T.sum(T.tanh(T.matmul(W, x))), [W, x]) < 1e-4


class TestTape:
    def test_no_recording_outside_tape(self, gen):
        x = leaf(gen, 2, 2)
        y = T.tanh(x)
        assert not y.requires_grad
        assert y._tape is None

    def test_unreached_leaf_gets_zero_gradient(self, gen):
        x, unused = leaf(gen, 2), leaf(gen, 3)
        with Tape():
            loss = T.sum(T.square(x))
            grads = backward(loss, [x, unused])
        np.testing.assert_allclose(grads[0], 2.0 * x.data)
        assert np.array_equal(grads[1], np.zeros(3))
        assert np.array_equal(unused.grad, np.zeros(3))

    def test_reused_tensor_accumulates(self, gen):
        x = leaf(gen, 3)
        with Tape():
            loss = T.sum(T.add(T.mul(x, x), x))
            (grad,) = backward(loss, [x])
        np.testing.assert_allclose(grad, 2.0 * x.data + 1.0)

    def test_backward_requires_scalar(self, gen):
        x = leaf(gen, 3)
        with Tape():
            with pytest.raises(ShapeError):
                backward(T.tanh(x), [x])

    def test_discovers_leaves(self, gen):
        a, b = leaf(gen, 2), leaf(gen, 2)
        with Tape():
            loss = T.sum(T.mul(a, b))
            grads = backward(loss)
        assert len(grads) == 2
        np.testing.assert_allclose(a.grad, b.data)

    def test_threads_have_separate_tapes(self, gen):
        def run(seed):
            x = parameter(np.full(3, float(seed)))
            with Tape() as tape:
                loss = T.sum(T.square(x))
                backward(loss, [x])
            return len(tape), x.grad

        with ThreadPoolExecutor(max_workers=4) as pool:
            results = list(pool.map(run, range(8)))
        for seed, (nodes, grad) in enumerate(results):
            assert nodes == 2
            np.testing.assert_allclose(grad, 2.0 * seed)


class TestErrors:
    def test_shape_mismatch(self, gen):
        with pytest.raises(ShapeError):
            T.matmul(gen.normal(size=(2, 3)), gen.normal(size=(2, 3)))
        with pytest.raises(ShapeError):
            T.add(np.ones((2, 3)), np.ones((4,)))

    def test_non_finite(self):
        with pytest.raises(NonFiniteError):
            T.mul(np.array([np.inf]), np.array([1.0]))

    def test_fully_masked_row(self):
        with pytest.raises(ShapeError):
            T.masked_softmax(np.zeros((2, 3)), np.array([[True, False, False], [False, False, False]]))


class TestMaskedSoftmax:
    def test_masked_entries_are_zero_and_rows_sum_to_one(self, gen):
        x = gen.normal(size=(5, 7)) * 50.0
        allowed = gen.uniform(size=(5, 7)) > 0.5
        allowed[:, 3] = True
        probs = T.masked_softmax(x, allowed).data
        assert np.all(probs[~allowed] == 0.0)
        np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-12)

    def test_log_softmax_consistent(self, gen):
        x = gen.normal(size=(2, 5))
        allowed = np.ones((2, 5), dtype=bool)
        np.testing.assert_allclose(
            np.exp(T.masked_log_softmax(x, allowed).data), T.masked_softmax(x, allowed).data, atol=1e-12
        )

    def test_mask_value_is_finite(self):
        assert np.isfinite(MASK_VALUE)


class TestAdam:
    def test_quadratic_bowl(self, gen):
        target = np.array([1.5, -2.0, 2.5, -1.8])
        params = {"w": parameter(np.zeros(4))}
        state = AdamState()
        losses = []
        for _ in range(100):
            with Tape():
                loss = T.sum(T.square(T.sub(params["w"], target)))
                backward(loss, [params["w"]])
            losses.append(loss.item())
            adam_step(params, grads_of(params), state, lr=0.01)
        assert np.all(np.diff(losses[5:]) < 0.0)
        assert losses[-1] < 0.5 * losses[0]

    def test_first_step_moves_by_learning_rate(self):
        params = {"w": parameter(np.array([1.0, -1.0]))}
        adam_step(params, {"w": np.array([3.0, -0.5])}, AdamState(), lr=0.1)
        np.testing.assert_allclose(params["w"].data, [0.9, -0.9], atol=1e-6)

    def test_weight_decay_enters_gradient(self):
        params = {"w": parameter(np.array([2.0]))}
        state = adam_step(params, {"w": np.array([0.0])}, AdamState(), lr=0.1, weight_decay=0.5)
        np.testing.assert_allclose(state.m["w"], [0.1 * 0.5 * 2.0])

    def test_replaces_arrays(self):
        data = np.array([1.0])
        params = {"w": parameter(data)}
        before = params["w"].data
        adam_step(params, {"w": np.array([1.0])}, AdamState(), lr=0.1)
        assert params["w"].data is not before
        assert before[0] == 1.0

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            adam_step({"w": parameter(np.zeros(2))}, {"w": np.zeros(3)}, AdamState(), lr=0.1)

    def test_global_norm(self):
        assert global_norm([np.array([3.0]), np.array([4.0])]) == pytest.approx(5.0)
