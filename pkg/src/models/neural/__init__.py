from .network import (
    NeuralNet, TrainingSet, activation, activation_deriv, denormalize, forward, loss,
    loss_gradient, normalize_apply, normalize_fit, predict, residual_jacobian
)
from .training import TrainConfig, TrainResult, train
from .model_io import dumps_model, load_model, loads_model, save_model

__all__ = [
    "NeuralNet", "TrainingSet", "activation", "activation_deriv", "denormalize", "forward", "loss",
    "loss_gradient", "normalize_apply", "normalize_fit", "predict", "residual_jacobian",
    "TrainConfig", "TrainResult", "train",
    "dumps_model", "load_model", "loads_model", "save_model",
]
