"""
Feed-Forward Network
====================
Small fully-connected regression network with the rational sigmoid
sigma(x) = x / (1 + |x|) on hidden layers and a linear output layer.

Weights are stored per layer as (out, in) matrices plus bias vectors; the flat
parameter vector concatenates W_0, b_0, W_1, b_1, ... in that order.
Inputs and targets share one affine normalisation (x - alpha1) * alpha2,
fitted on the training features and stored with the weights.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.core.exceptions import (
    DatasetEmptyError, DegenerateDataError, DimensionMismatchError, InputDataError
)
from src.core.random import make_rng

logger = logging.getLogger(__name__)


def activation(x):
    return x / (1.0 + np.abs(x))


def activation_deriv(x):
    return 1.0 / (1.0 + np.abs(x)) ** 2


@dataclass
class NeuralNet:
    layer_sizes: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    norm_shift: float = 0.0
    norm_scale: float = 1.0

    def __post_init__(self):
        self.layer_sizes = [int(n) for n in self.layer_sizes]
        if len(self.layer_sizes) < 2 or any(n < 1 for n in self.layer_sizes):
            raise DimensionMismatchError(f"Invalid layer sizes: {self.layer_sizes}")
        if len(self.weights) != len(self.layer_sizes) - 1 or len(self.biases) != len(self.weights):
            raise DimensionMismatchError("Weight/bias count does not match the layer sizes")

        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.layer_sizes[l + 1], self.layer_sizes[l])
            if w.shape != expected or b.shape != (expected[0],):
                raise DimensionMismatchError(
                    f"Layer {l}: weights {w.shape} / bias {b.shape}, expected {expected} / ({expected[0]},)"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise InputDataError(f"Layer {l} contains non-finite parameters")
        if not (np.isfinite(self.norm_shift) and np.isfinite(self.norm_scale) and self.norm_scale > 0):
            raise InputDataError(f"Invalid normalisation constants ({self.norm_shift}, {self.norm_scale})")

    @classmethod
    def initialize(cls, layer_sizes: Sequence[int], seed: int) -> 'NeuralNet':
        """Uniform weights in +-1/sqrt(fan_in); zero biases"""
        rng = make_rng(seed, 0)
        weights, biases = [], []
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(list(layer_sizes), weights, biases)

    @property
    def n_inputs(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.layer_sizes[-1]

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def get_params(self) -> np.ndarray:
        return np.concatenate([part for w, b in zip(self.weights, self.biases) for part in (w.ravel(), b)])

    def with_params(self, params: np.ndarray) -> 'NeuralNet':
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.num_params,):
            raise DimensionMismatchError(f"Expected {self.num_params} parameters, got {params.shape}")
        weights, biases, offset = [], [], 0
        for w, b in zip(self.weights, self.biases):
            weights.append(params[offset:offset + w.size].reshape(w.shape).copy())
            offset += w.size
            biases.append(params[offset:offset + b.size].copy())
            offset += b.size
        return NeuralNet(list(self.layer_sizes), weights, biases, self.norm_shift, self.norm_scale)

    def with_normalization(self, shift: float, scale: float) -> 'NeuralNet':
        return NeuralNet(list(self.layer_sizes), [w.copy() for w in self.weights],
                         [b.copy() for b in self.biases], float(shift), float(scale))


@dataclass
class TrainingSet:
    """Rows are examples: inputs (K, m), targets (K, n), weights rho (K,)"""

    inputs: np.ndarray
    targets: np.ndarray
    example_weights: np.ndarray
    norm_shift: Optional[float] = None
    norm_scale: Optional[float] = None
    locations: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.inputs = np.atleast_2d(np.asarray(self.inputs, dtype=np.float64))
        self.targets = np.asarray(self.targets, dtype=np.float64)
        if self.targets.ndim == 1:
            self.targets = self.targets[:, None]
        self.example_weights = np.asarray(self.example_weights, dtype=np.float64).ravel()

        K = self.inputs.shape[0]
        if self.targets.shape[0] != K or self.example_weights.shape[0] != K:
            raise DimensionMismatchError(
                f"Row counts disagree: inputs {K}, targets {self.targets.shape[0]}, "
                f"weights {self.example_weights.shape[0]}"
            )
        if np.any(self.example_weights < 0) or not np.all(np.isfinite(self.example_weights)):
            raise InputDataError("Example weights must be finite and non-negative")
        if not np.any(self.example_weights > 0):
            raise DatasetEmptyError("Training set has no example with positive weight")

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.inputs.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.targets.shape[1]

    def subset(self, index: np.ndarray) -> 'TrainingSet':
        return TrainingSet(self.inputs[index], self.targets[index], self.example_weights[index],
                           self.norm_shift, self.norm_scale)

    def normalized(self, shift: float, scale: float) -> 'TrainingSet':
        """Inputs and targets mapped through (x - shift) * scale"""
        return TrainingSet(normalize_apply(self.inputs, shift, scale),
                           normalize_apply(self.targets, shift, scale),
                           self.example_weights, shift, scale)


def normalize_fit(data: np.ndarray) -> Tuple[float, float]:
    """alpha1 = global min, alpha2 = 1 / (global max after the shift)"""
    data = np.asarray(data, dtype=np.float64)
    if data.size == 0:
        raise DegenerateDataError("Cannot fit normalisation on empty data")
    low = float(data.min())
    span = float(data.max()) - low
    if not span > 0:
        raise DegenerateDataError(f"Data is constant ({low}); normalisation is undefined")
    return low, 1.0 / span


def normalize_apply(data: np.ndarray, shift: float, scale: float) -> np.ndarray:
    return (np.asarray(data, dtype=np.float64) - shift) * scale


def denormalize(data: np.ndarray, shift: float, scale: float) -> np.ndarray:
    return np.asarray(data, dtype=np.float64) / scale + shift


def _check_inputs(net: NeuralNet, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != net.n_inputs:
        raise DimensionMismatchError(f"Network expects {net.n_inputs} inputs, got {x.shape[-1]}")
    return x


def forward_layers(net: NeuralNet, X: np.ndarray):
    """Hidden pre-activations and all layer outputs for a batch (K, m)"""
    pre, outputs = [], [X]
    a = X
    last = len(net.weights) - 1
    for l, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w.T + b
        if l < last:
            pre.append(z)
            a = activation(z)
        else:
            a = z
        outputs.append(a)
    return pre, outputs


def forward(net: NeuralNet, x: np.ndarray) -> np.ndarray:
    """Network output for one input vector (m,) or a batch (K, m)"""
    x = _check_inputs(net, x)
    single = x.ndim == 1
    _, outputs = forward_layers(net, np.atleast_2d(x))
    return outputs[-1][0] if single else outputs[-1]


def predict(net: NeuralNet, x: np.ndarray) -> np.ndarray:
    """Raw-unit prediction: normalise, run the network, map back"""
    x = _check_inputs(net, x)
    y = forward(net, normalize_apply(x, net.norm_shift, net.norm_scale))
    return denormalize(y, net.norm_shift, net.norm_scale)


def _check_set(net: NeuralNet, data: TrainingSet) -> None:
    if data.n_inputs != net.n_inputs or data.n_outputs != net.n_outputs:
        raise DimensionMismatchError(
            f"Training set is {data.n_inputs}->{data.n_outputs}, network is {net.n_inputs}->{net.n_outputs}"
        )


def loss(net: NeuralNet, data: TrainingSet) -> float:
    """sum_k rho_k * ||forward(X_k) - Y_k||^2"""
    _check_set(net, data)
    residual = forward(net, data.inputs) - data.targets
    return float(np.sum(data.example_weights * np.sum(residual ** 2, axis=1)))


def loss_gradient(net: NeuralNet, data: TrainingSet) -> np.ndarray:
    """Back-propagated gradient of `loss` w.r.t. the flat parameter vector"""
    _check_set(net, data)
    pre, outputs = forward_layers(net, data.inputs)
    delta = 2.0 * data.example_weights[:, None] * (outputs[-1] - data.targets)

    grads = []
    for l in reversed(range(len(net.weights))):
        grads.append((delta.T @ outputs[l], delta.sum(axis=0)))
        if l > 0:
            delta = (delta @ net.weights[l]) * activation_deriv(pre[l - 1])

    return np.concatenate([part for gw, gb in reversed(grads) for part in (gw.ravel(), gb)])


def residual_jacobian(net: NeuralNet, data: TrainingSet, examples: np.ndarray,
                      outputs_idx: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weighted residual rows r = sqrt(rho_k) * (y_o(X_k) - Y_ko) and their
    Jacobian (rows, num_params) for the requested (example, output) pairs.
    """
    R = len(examples)
    rows = np.arange(R)
    pre, acts = forward_layers(net, data.inputs[examples])
    sqrt_rho = np.sqrt(data.example_weights[examples])
    residuals = sqrt_rho * (acts[-1][rows, outputs_idx] - data.targets[examples, outputs_idx])

    L = len(net.weights)
    blocks = [None] * L

    out_dim, in_dim = net.weights[-1].shape
    gw = np.zeros((R, out_dim, in_dim))
    gw[rows, outputs_idx, :] = acts[L - 1]
    gb = np.zeros((R, out_dim))
    gb[rows, outputs_idx] = 1.0
    blocks[L - 1] = (gw, gb)

    if L > 1:
        delta = net.weights[-1][outputs_idx, :] * activation_deriv(pre[L - 2])
        for l in reversed(range(L - 1)):
            blocks[l] = (delta[:, :, None] * acts[l][:, None, :], delta)
            if l > 0:
                delta = (delta @ net.weights[l]) * activation_deriv(pre[l - 1])

    jacobian = np.concatenate([part for gw, gb in blocks for part in (gw.reshape(R, -1), gb)], axis=1)
    return residuals, jacobian * sqrt_rho[:, None]
