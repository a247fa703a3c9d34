import numpy as np
import pytest

from loadgen import nets
from loadgen.nets import AdamState, LayerSpec


def finite_difference(loss, vector, h=1e-5):
    grad = np.empty_like(vector)
    for i in range(vector.size):
        up = vector.copy()
        up[i] += h
        down = vector.copy()
        down[i] -= h
        grad[i] = (loss(up) - loss(down)) / (2 * h)
    return grad


class TestInit:
    def test_shape_contract(self):
        params = nets.init_params([LayerSpec(2, 3)], seed=0)
        assert params.weights[0].shape == (3, 2)
        assert params.biases[0].shape == (3,)

    def test_determinism(self):
        a = nets.init_params([LayerSpec(4, 5), LayerSpec(5, 2, "identity")], seed=7)
        b = nets.init_params([LayerSpec(4, 5), LayerSpec(5, 2, "identity")], seed=7)
        for wa, wb in zip(a.weights, b.weights):
            np.testing.assert_array_equal(wa, wb)

    def test_zero_biases(self):
        params = nets.init_params([LayerSpec(3, 4)], seed=1)
        np.testing.assert_array_equal(params.biases[0], 0.0)

    def test_non_chainable(self):
        with pytest.raises(ValueError, match="chain"):
            nets.init_params([LayerSpec(2, 3), LayerSpec(4, 2)], seed=0)

    def test_bad_activation(self):
        with pytest.raises(ValueError):
            LayerSpec(2, 2, "tanh")


class TestForward:
    def test_zero_network(self):
        params = nets.init_params([LayerSpec(3, 2)], seed=0)
        params.weights[0][:] = 0.0
        out = nets.forward(params, np.ones((4, 3))).output
        np.testing.assert_array_equal(out, 0.0)

    def test_affine_map(self):
        params = nets.init_params([LayerSpec(2, 2, "identity")], seed=0)
        params.weights[0] = np.array([[1.0, 2.0], [3.0, 4.0]])
        params.biases[0] = np.array([0.5, -0.5])
        out = nets.forward(params, np.array([[1.0, 1.0]])).output
        np.testing.assert_allclose(out, [[3.5, 6.5]])

    def test_relu_clamps(self):
        params = nets.init_params([LayerSpec(1, 1, "relu")], seed=0)
        params.weights[0] = np.array([[1.0]])
        params.biases[0] = np.array([-2.0])
        out = nets.forward(params, np.array([[1.0]])).output
        assert out[0, 0] == 0.0

    def test_width_mismatch(self):
        params = nets.init_params([LayerSpec(3, 2)], seed=0)
        with pytest.raises(ValueError, match="width"):
            nets.forward(params, np.ones((1, 4)))

    def test_batch_equals_stacked_rows(self):
        params = nets.init_params(
            [LayerSpec(3, 8), LayerSpec(8, 2, "identity")], seed=3
        )
        x = np.random.default_rng(0).normal(size=(6, 3))
        batch = nets.forward(params, x).output
        rows = np.vstack([nets.forward(params, x[i : i + 1]).output for i in range(6)])
        np.testing.assert_allclose(batch, rows, atol=1e-12)


class TestBackward:
    def test_zero_output_gradient(self):
        params = nets.init_params([LayerSpec(2, 3), LayerSpec(3, 1, "identity")], 0)
        cache = nets.forward(params, np.ones((5, 2)))
        grads, _ = nets.backward(params, cache, np.zeros((5, 1)))
        for g in grads.weights + grads.biases:
            np.testing.assert_array_equal(g, 0.0)

    def test_linear_layer_squared_error_by_hand(self):
        # single identity layer, loss = 0.5 (w.x + b - y)^2 on a 2x1 case:
        # dL/dw = (w.x + b - y) x, dL/db = residual
        params = nets.init_params([LayerSpec(2, 1, "identity")], seed=0)
        params.weights[0] = np.array([[0.7, -0.2]])
        params.biases[0] = np.array([0.1])
        x = np.array([[1.5, -2.0]])
        y = 0.3
        cache = nets.forward(params, x)
        resid = cache.output[0, 0] - y
        grads, grad_in = nets.backward(params, cache, np.array([[resid]]))
        np.testing.assert_allclose(grads.weights[0], resid * x)
        np.testing.assert_allclose(grads.biases[0], [resid])
        np.testing.assert_allclose(grad_in, resid * params.weights[0])

    def test_matches_finite_differences(self):
        specs = [LayerSpec(4, 7), LayerSpec(7, 5), LayerSpec(5, 3, "identity")]
        params = nets.init_params(specs, seed=12)
        rng = np.random.default_rng(5)
        x = rng.normal(size=(10, 4))
        target = rng.normal(size=(10, 3))

        def loss_of(vector):
            p = nets.unpack(params, vector)
            out = nets.forward(p, x).output
            return 0.5 * np.sum((out - target) ** 2)

        cache = nets.forward(params, x)
        grads, _ = nets.backward(params, cache, cache.output - target)
        analytic = np.concatenate(
            [
                np.concatenate([w.ravel(), b.ravel()])
                for w, b in zip(grads.weights, grads.biases)
            ]
        )
        numeric = finite_difference(loss_of, nets.pack(params))
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
        rel = np.abs(analytic - numeric) / denom
        assert (rel <= 1e-4).mean() >= 0.95
        assert rel.max() <= 1e-3

    def test_shape_mismatch(self):
        params = nets.init_params([LayerSpec(2, 2)], seed=0)
        cache = nets.forward(params, np.ones((3, 2)))
        with pytest.raises(ValueError):
            nets.backward(params, cache, np.ones((3, 5)))


class TestAdam:
    def _single_param(self, value):
        params = nets.init_params([LayerSpec(1, 1, "identity")], seed=0)
        params.weights[0][:] = value
        params.biases[0][:] = 0.0
        return params

    def test_zero_gradient_no_motion(self):
        params = self._single_param(1.5)
        grads = nets.Gradients([np.zeros((1, 1))], [np.zeros(1)])
        state = AdamState.for_params(params)
        nets.adam_step(params, grads, state, alpha=0.1)
        assert params.weights[0][0, 0] == 1.5
        assert state.step == 1

    def test_first_step_is_signed_alpha(self):
        # bias-corrected first step: -alpha * g / (|g| + eps)
        for g in (0.5, -0.25):
            params = self._single_param(1.0)
            grads = nets.Gradients([np.array([[g]])], [np.zeros(1)])
            state = AdamState.for_params(params)
            nets.adam_step(params, grads, state, alpha=1e-4)
            step = params.weights[0][0, 0] - 1.0
            assert step == pytest.approx(-1e-4 * np.sign(g), rel=1e-6)

    def test_adam_recurrence_by_hand(self):
        # two steps with constant gradient, checked against the textbook recurrence
        g = 0.3
        alpha, b1, b2, eps = 1e-3, 0.9, 0.999, 1e-8
        params = self._single_param(0.0)
        grads = nets.Gradients([np.array([[g]])], [np.zeros(1)])
        state = AdamState.for_params(params)
        m = v = 0.0
        theta = 0.0
        for t in range(1, 3):
            nets.adam_step(params, grads, state, alpha=alpha)
            m = b1 * m + (1 - b1) * g
            v = b2 * v + (1 - b2) * g * g
            theta -= alpha * (m / (1 - b1**t)) / (np.sqrt(v / (1 - b2**t)) + eps)
        assert params.weights[0][0, 0] == pytest.approx(theta, rel=1e-12)

    def test_rejects_non_finite(self):
        params = self._single_param(0.0)
        grads = nets.Gradients([np.array([[np.nan]])], [np.zeros(1)])
        state = AdamState.for_params(params)
        with pytest.raises(FloatingPointError):
            nets.adam_step(params, grads, state, alpha=1e-3)


class TestSerialization:
    def test_round_trip(self):
        params = nets.init_params(
            [LayerSpec(3, 5), LayerSpec(5, 4, "identity")], seed=21
        )
        clone = nets.NetworkParams.from_dict(params.to_dict())
        assert clone.specs == params.specs
        for a, b in zip(params.weights + params.biases, clone.weights + clone.biases):
            np.testing.assert_array_equal(a, b)

    def test_pack_unpack(self):
        params = nets.init_params([LayerSpec(2, 3), LayerSpec(3, 1, "identity")], 5)
        vec = nets.pack(params)
        clone = nets.unpack(params, vec)
        np.testing.assert_array_equal(nets.pack(clone), vec)
        with pytest.raises(ValueError):
            nets.unpack(params, vec[:-1])
