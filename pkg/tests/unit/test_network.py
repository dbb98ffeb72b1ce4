import numpy as np
import pytest

from src.core.exceptions import (
    DatasetEmptyError, DegenerateDataError, DimensionMismatchError, InputDataError
)
from src.models.neural.network import (
    NeuralNet, TrainingSet, activation, activation_deriv, denormalize, forward, loss, loss_gradient,
    normalize_apply, normalize_fit, predict, residual_jacobian
)


def _random_set(rng, n_in, n_out, rows=20):
    return TrainingSet(rng.uniform(0, 1, (rows, n_in)), rng.uniform(0, 1, (rows, n_out)),
                       rng.uniform(0, 1, rows))


def test_activation_values():
    np.testing.assert_allclose(activation(np.array([0.0, 1.0, -3.0])), [0.0, 0.5, -0.75])
    np.testing.assert_allclose(activation_deriv(np.array([0.0, 1.0, -1.0])), [1.0, 0.25, 0.25])


def test_activation_is_bounded_and_odd(rng):
    x = rng.standard_normal(100) * 50
    assert np.all(np.abs(activation(x)) < 1)
    np.testing.assert_allclose(activation(-x), -activation(x))


class TestNeuralNet:
    def test_initialize(self):
        net = NeuralNet.initialize([16, 8, 3], seed=2)
        assert net.num_params == 16 * 8 + 8 + 8 * 3 + 3
        assert np.all(np.abs(net.weights[0]) <= 1 / 4)
        assert np.all(np.abs(net.weights[1]) <= 1 / np.sqrt(8))
        assert all(np.all(b == 0) for b in net.biases)
        np.testing.assert_array_equal(net.get_params(), NeuralNet.initialize([16, 8, 3], 2).get_params())
        assert not np.array_equal(net.get_params(), NeuralNet.initialize([16, 8, 3], 3).get_params())

    def test_params_layout(self):
        net = NeuralNet.initialize([3, 2, 1], seed=0)
        params = net.get_params()
        np.testing.assert_array_equal(params[:6], net.weights[0].ravel())
        np.testing.assert_array_equal(params[6:8], net.biases[0])
        restored = net.with_params(params * 2)
        np.testing.assert_array_equal(restored.weights[1], net.weights[1] * 2)

    def test_with_params_length_checked(self):
        net = NeuralNet.initialize([3, 2, 1], seed=0)
        with pytest.raises(DimensionMismatchError):
            net.with_params(np.zeros(5))

    def test_shape_validation(self):
        with pytest.raises(DimensionMismatchError):
            NeuralNet([2, 1], [np.zeros((2, 1))], [np.zeros(1)])
        with pytest.raises(DimensionMismatchError):
            NeuralNet([2], [], [])

    def test_normalization_validated(self):
        with pytest.raises(InputDataError):
            NeuralNet([1, 1], [np.ones((1, 1))], [np.zeros(1)], 0.0, 0.0)


class TestForward:
    def test_linear_output(self):
        net = NeuralNet([2, 1], [np.array([[1.0, -2.0]])], [np.array([0.5])])
        assert forward(net, np.array([3.0, 1.0]))[0] == pytest.approx(1.5)

    def test_hidden_layer(self):
        net = NeuralNet([1, 1, 1], [np.array([[1.0]]), np.array([[2.0]])], [np.zeros(1), np.array([1.0])])
        # 2 * sigma(1) + 1
        assert forward(net, np.array([1.0]))[0] == pytest.approx(2.0)

    def test_batch_matches_single(self, rng):
        net = NeuralNet.initialize([4, 5, 2], seed=1)
        X = rng.standard_normal((6, 4))
        batch = forward(net, X)
        assert batch.shape == (6, 2)
        np.testing.assert_allclose(batch[3], forward(net, X[3]))

    def test_input_width_checked(self):
        with pytest.raises(DimensionMismatchError):
            forward(NeuralNet.initialize([4, 1], 0), np.zeros(3))

    def test_predict_uses_shared_normalization(self):
        net = NeuralNet([1, 1], [np.array([[2.0]])], [np.array([0.5])], norm_shift=2.0, norm_scale=0.5)
        # ((x - 2) * 0.5 * 2 + 0.5) / 0.5 + 2 = 2x - 1
        assert predict(net, np.array([3.0]))[0] == pytest.approx(5.0)


class TestNormalization:
    def test_fit(self):
        assert normalize_fit(np.array([[2.0, 4.0], [6.0, 3.0]])) == (2.0, 0.25)

    def test_apply_and_back(self):
        x = np.array([2.0, 6.0])
        np.testing.assert_allclose(normalize_apply(x, 2.0, 0.25), [0.0, 1.0])
        np.testing.assert_allclose(denormalize(normalize_apply(x, 2.0, 0.25), 2.0, 0.25), x)

    def test_constant_data(self):
        with pytest.raises(DegenerateDataError):
            normalize_fit(np.full(5, 3.0))


class TestTrainingSet:
    def test_vector_targets_become_columns(self):
        data = TrainingSet(np.zeros((3, 2)), np.zeros(3), np.ones(3))
        assert data.n_outputs == 1
        assert len(data) == 3

    def test_row_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            TrainingSet(np.zeros((3, 2)), np.zeros((4, 1)), np.ones(3))

    def test_negative_weight(self):
        with pytest.raises(InputDataError):
            TrainingSet(np.zeros((2, 2)), np.zeros(2), np.array([1.0, -1.0]))

    def test_all_zero_weights(self):
        with pytest.raises(DatasetEmptyError):
            TrainingSet(np.zeros((2, 2)), np.zeros(2), np.zeros(2))


class TestGradients:
    @pytest.mark.parametrize("sizes", [[5, 4, 2], [5, 4, 3, 2]])
    @pytest.mark.parametrize("seed", range(10))
    def test_gradient_matches_finite_differences(self, sizes, seed):
        rng = np.random.default_rng(seed)
        net = NeuralNet.initialize(sizes, seed)
        net = net.with_params(net.get_params() + 0.1 * rng.standard_normal(net.num_params))
        data = _random_set(rng, sizes[0], sizes[-1])
        grad = loss_gradient(net, data)
        params = net.get_params()
        direction = rng.standard_normal(params.size)
        h = 1e-6
        numeric = (loss(net.with_params(params + h * direction), data)
                   - loss(net.with_params(params - h * direction), data)) / (2 * h)
        assert numeric == pytest.approx(float(grad @ direction), rel=1e-5, abs=1e-8)

    @pytest.mark.parametrize("sizes", [[3, 4, 2], [3, 2, 2, 1]])
    def test_jacobian_consistent_with_loss(self, sizes, rng):
        net = NeuralNet.initialize(sizes, 5)
        data = _random_set(rng, sizes[0], sizes[-1], rows=7)
        flat = np.arange(len(data) * data.n_outputs)
        examples, outputs = np.divmod(flat, data.n_outputs)
        residuals, jacobian = residual_jacobian(net, data, examples, outputs)
        assert jacobian.shape == (flat.size, net.num_params)
        assert float(residuals @ residuals) == pytest.approx(loss(net, data))
        np.testing.assert_allclose(2 * residuals @ jacobian, loss_gradient(net, data), atol=1e-12)

    @pytest.mark.parametrize("sizes", [[3, 4, 2], [2, 3, 3, 1]])
    def test_loss_matches_elementwise_sum(self, sizes, rng):
        net = NeuralNet.initialize(sizes, 2)
        net = net.with_params(net.get_params() + 0.2 * rng.standard_normal(net.num_params))
        data = _random_set(rng, sizes[0], sizes[-1], rows=6)
        expected = 0.0
        for k in range(len(data)):
            a = list(data.inputs[k])
            for l, (w, b) in enumerate(zip(net.weights, net.biases)):
                z = [b[j] + sum(w[j, i] * a[i] for i in range(len(a))) for j in range(len(b))]
                a = z if l == len(net.weights) - 1 else [v / (1.0 + abs(v)) for v in z]
            for o in range(data.n_outputs):
                expected += data.example_weights[k] * (a[o] - data.targets[k, o]) ** 2
        assert loss(net, data) == pytest.approx(expected, rel=1e-12)

    def test_duplicated_examples_match_doubled_weights(self, rng):
        net = NeuralNet.initialize([3, 4, 2], 6)
        data = _random_set(rng, 3, 2, rows=9)
        duplicated = TrainingSet(np.vstack([data.inputs, data.inputs]), np.vstack([data.targets, data.targets]),
                                 np.concatenate([data.example_weights, data.example_weights]))
        doubled = TrainingSet(data.inputs, data.targets, 2 * data.example_weights)
        assert loss(net, duplicated) == pytest.approx(2 * loss(net, data), rel=1e-12)
        assert loss(net, doubled) == pytest.approx(2 * loss(net, data), rel=1e-12)
        np.testing.assert_allclose(loss_gradient(net, duplicated), 2 * loss_gradient(net, data), rtol=1e-10)
        np.testing.assert_allclose(loss_gradient(net, doubled), loss_gradient(net, duplicated), rtol=1e-10)

    def test_zero_weight_rows_do_not_contribute(self, rng):
        net = NeuralNet.initialize([3, 2, 1], 0)
        data = _random_set(rng, 3, 1, rows=8)
        padded = TrainingSet(np.vstack([data.inputs, rng.uniform(0, 1, (4, 3))]),
                             np.vstack([data.targets, np.full((4, 1), 1e6)]),
                             np.concatenate([data.example_weights, np.zeros(4)]))
        assert loss(net, padded) == pytest.approx(loss(net, data))
        np.testing.assert_allclose(loss_gradient(net, padded), loss_gradient(net, data))

    def test_set_must_match_network(self, rng):
        with pytest.raises(DimensionMismatchError):
            loss(NeuralNet.initialize([3, 1], 0), _random_set(rng, 4, 1))
