import struct

import numpy as np
import pytest

from cyclemimo.exceptions import CheckpointError, DomainError, NetworkStateError, NumericError, ShapeError
from cyclemimo.nn import (
    AdamState,
    LayerSpec,
    NeuralNet,
    adam_step,
    dense_forward,
    load_network,
    net_backward,
    net_forward,
    network_from_bytes,
    network_to_bytes,
    save_network,
)
from cyclemimo.nn.layers import mlp_layers


def scalar_net(weight: float = 1.0, bias: float = 0.0) -> NeuralNet:
    return NeuralNet(1, [LayerSpec.dense(1)], [np.array([[weight]])], [np.array([bias])])


def smooth_net(rng: np.random.Generator) -> NeuralNet:
    layers = [LayerSpec.dense(5), LayerSpec.leaky_relu(0.2), LayerSpec.dense(3), LayerSpec.tanh()]
    return NeuralNet.build(4, layers, rng)


def numeric_gradient(f, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        original = x[index]
        x[index] = original + step
        upper = f()
        x[index] = original - step
        lower = f()
        x[index] = original
        grad[index] = (upper - lower) / (2 * step)
    return grad


def safe_input(net: NeuralNet, rng: np.random.Generator, rows: int = 3) -> np.ndarray:
    """Draw inputs whose leaky-ReLU preactivations stay away from the kink."""
    while True:
        x = rng.standard_normal((rows, net.input_width))
        z = dense_forward(x, net.weights[0], net.biases[0])
        if np.min(np.abs(z)) > 1e-3:
            return x


class TestDenseForward:
    def test_affine_map(self):
        x = np.array([[1.0, 2.0]])
        W = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]])
        b = np.array([0.5, 0.5, 0.5])
        np.testing.assert_allclose(dense_forward(x, W, b), [[1.5, 2.5, 0.5]])

    def test_chain_mismatch(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(4, 1\)"):
            dense_forward(np.zeros((2, 3)), np.zeros((4, 1)), np.zeros(1))

    def test_bias_mismatch(self):
        with pytest.raises(ShapeError):
            dense_forward(np.zeros((2, 3)), np.zeros((3, 2)), np.zeros(3))


class TestLayerSpec:
    def test_dense_needs_width(self):
        with pytest.raises(DomainError):
            LayerSpec(kind="dense")

    def test_dropout_rate_range(self):
        with pytest.raises(DomainError):
            LayerSpec.dropout(1.0)

    def test_mlp_layout(self):
        layers = mlp_layers([8, 4], 2, 0.2, 0.1, output_activation=True)
        assert [layer.kind for layer in layers] == [
            "dense",
            "leaky_relu",
            "dropout",
            "dense",
            "leaky_relu",
            "dropout",
            "dense",
            "tanh",
        ]
        assert [layer.width for layer in layers if layer.kind == "dense"] == [8, 4, 2]


class TestNeuralNet:
    def test_parameter_shape_mismatch(self):
        with pytest.raises(ShapeError):
            NeuralNet(2, [LayerSpec.dense(3)], [np.zeros((3, 3))], [np.zeros(3)])

    def test_input_width_mismatch(self, rng):
        net = smooth_net(rng)
        with pytest.raises(ShapeError):
            net.forward(np.zeros((2, 5)), "eval")

    def test_non_finite_activation(self):
        net = scalar_net()
        with pytest.raises(NumericError) as excinfo:
            net.forward(np.array([[np.inf]]), "eval")
        assert excinfo.value.layer_index == 0

    def test_backward_without_forward(self, rng):
        net = smooth_net(rng)
        with pytest.raises(NetworkStateError):
            net.backward(np.ones((1, 3)))

    def test_backward_after_eval_forward(self, rng):
        net = smooth_net(rng)
        net.forward(np.zeros((1, 4)), "eval")
        with pytest.raises(NetworkStateError):
            net_backward(net, np.ones((1, 3)))

    def test_default_trace_is_used_once(self):
        net = scalar_net(weight=3.0)
        net.forward(np.array([[2.0]]), "train")
        net.backward(np.array([[1.0]]))
        with pytest.raises(NetworkStateError):
            net.backward(np.array([[1.0]]))
        np.testing.assert_allclose(net.grad_weights[0], [[2.0]])

    def test_upstream_shape_mismatch(self, rng):
        net = smooth_net(rng)
        net_forward(net, np.zeros((2, 4)), "train")
        with pytest.raises(ShapeError):
            net_backward(net, np.ones((1, 3)))

    def test_eval_is_deterministic_with_dropout(self, rng):
        net = NeuralNet.build(4, mlp_layers([8], 2, 0.2, 0.5, output_activation=False), rng)
        x = rng.standard_normal((5, 4))
        np.testing.assert_array_equal(net.forward(x, "eval"), net.forward(x, "eval"))

    @pytest.mark.parametrize("seed", range(100))
    def test_parameter_gradients_match_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        net = smooth_net(rng)
        x = safe_input(net, rng)
        weights = rng.standard_normal((x.shape[0], 3))

        net.forward(x, "train")
        net.backward(weights)
        for param, grad in zip(net.parameters(), net.gradients(), strict=True):
            expected = numeric_gradient(lambda: float(np.sum(net.forward(x, "eval") * weights)), param)
            tolerance = 1e-4 * np.max(np.abs(expected)) + 1e-7
            assert np.max(np.abs(grad - expected)) <= tolerance

    def test_input_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(11)
        net = smooth_net(rng)
        x = safe_input(net, rng)
        weights = rng.standard_normal((x.shape[0], 3))

        net.forward(x, "train")
        analytic = net.backward(weights)
        expected = numeric_gradient(lambda: float(np.sum(net.forward(x, "eval") * weights)), x)

        np.testing.assert_allclose(analytic, expected, rtol=1e-4, atol=1e-7)

    def test_traced_passes_are_independent(self, rng):
        net = smooth_net(rng)
        x1, x2 = safe_input(net, rng), safe_input(net, rng)
        g = np.ones((3, 3))

        _, trace1 = net.forward_traced(x1)
        _, trace2 = net.forward_traced(x2)
        net.backward(g, trace1)
        net.backward(g, trace2)
        combined = [grad.copy() for grad in net.gradients()]

        net.zero_grad()
        net.forward(x1, "train")
        net.backward(g)
        net.forward(x2, "train")
        net.backward(g)
        for a, b in zip(combined, net.gradients(), strict=True):
            np.testing.assert_allclose(a, b)

    def test_dropout_preserves_expectation(self):
        rng = np.random.default_rng(3)
        layers = [LayerSpec.dense(16), LayerSpec.dropout(0.3), LayerSpec.dense(1)]
        net = NeuralNet.build(4, layers, rng)
        x = rng.standard_normal((1, 4))
        expected = net.forward(x, "eval")[0, 0]
        samples = [net.forward(x, "train")[0, 0] for _ in range(20000)]
        assert np.mean(samples) == pytest.approx(expected, abs=0.05 * max(1.0, abs(expected)))

    def test_dropout_mask_reused_in_backward(self):
        rng = np.random.default_rng(5)
        layers = [LayerSpec.dense(6), LayerSpec.dropout(0.5), LayerSpec.dense(1)]
        net = NeuralNet.build(2, layers, rng)
        x = np.ones((1, 2))
        out, trace = net.forward_traced(x)
        mask = trace.masks[1]
        net.backward(np.ones_like(out), trace)
        hidden = dense_forward(x, net.weights[0], net.biases[0])
        np.testing.assert_allclose(net.grad_weights[1], (hidden * mask).T)


class TestAdam:
    def test_single_step(self):
        net = scalar_net(weight=1.0, bias=0.0)
        state = AdamState(l2_coeff=0.0)
        net.grad_weights[0][:] = 0.5
        net.grad_biases[0][:] = -0.5

        adam_step(net, state)

        # m_hat = g and v_hat = g^2 after one step
        step = 0.0002 * 0.5 / (0.5 + 1e-8)
        assert net.weights[0][0, 0] == pytest.approx(1.0 - step, abs=1e-12)
        assert net.biases[0][0] == pytest.approx(step, abs=1e-12)
        assert state.step_count == 1

    def test_two_steps(self):
        net = scalar_net(weight=1.0)
        state = AdamState(l2_coeff=0.0)
        expected = 1.0
        m = v = 0.0
        for t, g in enumerate((0.5, -0.25), start=1):
            net.grad_weights[0][:] = g
            adam_step(net, state)
            m = 0.5 * m + 0.5 * g
            v = 0.99 * v + 0.01 * g * g
            m_hat = m / (1 - 0.5**t)
            v_hat = v / (1 - 0.99**t)
            expected -= 0.0002 * m_hat / (np.sqrt(v_hat) + 1e-8)
        assert net.weights[0][0, 0] == pytest.approx(expected, abs=1e-12)

    def test_l2_term_added_to_gradient(self):
        net = scalar_net(weight=2.0)
        state = AdamState(l2_coeff=0.1)
        adam_step(net, state)
        # gradient is 0.1 * 2.0 = 0.2, so the first step has magnitude ~lr
        assert net.weights[0][0, 0] == pytest.approx(2.0 - 0.0002 * 0.2 / (0.2 + 1e-8), abs=1e-12)

    def test_gradients_cleared(self):
        net = scalar_net()
        net.grad_weights[0][:] = 1.0
        adam_step(net, AdamState())
        assert net.grad_weights[0][0, 0] == 0.0

    def test_invalid_beta(self):
        with pytest.raises(DomainError):
            AdamState(beta1=1.0)


class TestCheckpoint:
    def test_roundtrip_is_byte_identical(self, rng):
        net = NeuralNet.build(4, mlp_layers([8, 6], 2, 0.2, 0.1, output_activation=True), rng)
        data = network_to_bytes(net)
        restored, end = network_from_bytes(data)

        assert end == len(data)
        assert network_to_bytes(restored) == data
        x = rng.standard_normal((3, 4))
        np.testing.assert_array_equal(restored.forward(x, "eval"), net.forward(x, "eval"))

    def test_truncated(self, rng):
        data = network_to_bytes(smooth_net(rng))
        with pytest.raises(CheckpointError):
            network_from_bytes(data[:-5])

    def test_bad_magic(self, rng):
        data = network_to_bytes(smooth_net(rng))
        with pytest.raises(CheckpointError, match="magic"):
            network_from_bytes(b"XXXX" + data[4:])

    def test_out_of_range_layer_setting(self):
        net = NeuralNet(2, [LayerSpec.dropout(0.5)], [], [])
        data = network_to_bytes(net)
        corrupt = data[: -8] + struct.pack("<d", 1.5)
        with pytest.raises(CheckpointError, match="Inconsistent"):
            network_from_bytes(corrupt)

    def test_input_width_disagrees_with_weights(self):
        data = bytearray(network_to_bytes(scalar_net(weight=3.0)))
        struct.pack_into("<I", data, 6, 2)
        with pytest.raises(CheckpointError, match="Inconsistent"):
            network_from_bytes(bytes(data))

    def test_save_and_load(self, rng, tmp_path):
        net = smooth_net(rng)
        path = tmp_path / "net.bin"
        save_network(net, path)
        assert network_to_bytes(load_network(path)) == network_to_bytes(net)

    def test_load_rejects_trailing_bytes(self, rng, tmp_path):
        path = tmp_path / "net.bin"
        path.write_bytes(network_to_bytes(smooth_net(rng)) + b"\x00")
        with pytest.raises(CheckpointError, match="Trailing"):
            load_network(path)
