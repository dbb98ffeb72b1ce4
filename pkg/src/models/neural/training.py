"""
Network Training
================
Levenberg-Marquardt on the weighted squared residuals, with a
gradient-descent-with-momentum fallback behind the same entry point.

Each LM step uses the exact full-batch gradient; the Gauss-Newton curvature
is built from at most `batch_rows` (example, output) residual rows drawn with
the seeded generator. When every row fits the budget this is plain
full-batch LM. Steps are accepted only if the full training loss decreases;
the damping mu shrinks on acceptance and grows on rejection.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from sklearn.model_selection import train_test_split

from src.core.exceptions import DimensionMismatchError
from src.core.random import make_rng
from .network import (
    NeuralNet, TrainingSet, loss, loss_gradient, normalize_fit, residual_jacobian
)

logger = logging.getLogger(__name__)

# Smallest damping; steps off the sampled row space scale like 1/mu
MU_MIN = 1e-12


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    trainer: Literal["lm", "gd"] = "lm"
    max_epochs: int = Field(default=200, ge=1)
    mu0: float = Field(default=1e-3, gt=0)
    mu_up: float = Field(default=10.0, gt=1)
    mu_down: float = Field(default=0.1, gt=0, lt=1)
    mu_max: float = Field(default=1e10, gt=0)
    tolerance: float = Field(default=1e-9, ge=0, description="Relative loss decrease treated as converged")
    validation_fraction: float = Field(default=0.1, ge=0, le=0.5)
    patience: int = Field(default=20, ge=1)
    batch_rows: int = Field(default=1000, ge=1)
    learning_rate: float = Field(default=0.05, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    seed: int = Field(default=0, ge=0)


@dataclass
class TrainResult:
    net: NeuralNet
    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    epochs: int = 0
    best_epoch: int = 0
    status: str = "max_epochs"


def split_validation(data: TrainingSet, fraction: float, seed: int):
    """Hold out `fraction` of the examples; both parts keep a positive weight"""
    if fraction <= 0 or len(data) < 10:
        return data, None
    train_idx, val_idx = train_test_split(np.arange(len(data)), test_size=fraction, random_state=seed)
    train_idx, val_idx = np.sort(train_idx), np.sort(val_idx)
    if not (np.any(data.example_weights[train_idx] > 0) and np.any(data.example_weights[val_idx] > 0)):
        logger.warning("Validation split leaves one side without weighted examples; training on all data")
        return data, None
    return data.subset(train_idx), data.subset(val_idx)


class _Tracker:
    """Best-validation bookkeeping shared by both trainers"""

    def __init__(self, net: NeuralNet, val: Optional[TrainingSet], patience: int):
        self.val = val
        self.patience = patience
        self.best_params = net.get_params()
        self.best_loss = loss(net, val) if val is not None else np.inf
        self.best_epoch = 0
        self.history: List[float] = [self.best_loss] if val is not None else []

    def update(self, net: NeuralNet, epoch: int) -> bool:
        """Record the epoch; True when patience is exhausted"""
        if self.val is None:
            self.best_params = net.get_params()
            self.best_epoch = epoch
            return False
        value = loss(net, self.val)
        self.history.append(value)
        if value < self.best_loss:
            self.best_loss = value
            self.best_params = net.get_params()
            self.best_epoch = epoch
        return epoch - self.best_epoch >= self.patience


def _lm_solver(jacobian: np.ndarray, scale: float):
    """Returns solve(b, mu) = (scale * J^T J + mu I)^-1 b via one eigendecomposition"""
    R, P = jacobian.shape
    if P <= R:
        values, vectors = np.linalg.eigh(scale * (jacobian.T @ jacobian))

        def solve(b, mu):
            return vectors @ ((vectors.T @ b) / (values + mu))
    else:
        # Woodbury identity on the (rows x rows) system
        values, vectors = np.linalg.eigh(scale * (jacobian @ jacobian.T))

        def solve(b, mu):
            t = vectors @ ((vectors.T @ (jacobian @ b)) / (values + mu))
            return (b - scale * (jacobian.T @ t)) / mu

    return solve


def _train_lm(net: NeuralNet, train: TrainingSet, cfg: TrainConfig, tracker: _Tracker, result: TrainResult):
    rng = make_rng(cfg.seed, 1)
    K, n_out = train.targets.shape
    total_rows = K * n_out
    params = net.get_params()
    current = loss(net, train)
    result.train_loss.append(current)
    mu = cfg.mu0

    for epoch in range(1, cfg.max_epochs + 1):
        if total_rows <= cfg.batch_rows:
            flat = np.arange(total_rows)
        else:
            flat = np.sort(rng.choice(total_rows, size=cfg.batch_rows, replace=False))
        examples, outputs_idx = np.divmod(flat, n_out)
        _, jacobian = residual_jacobian(net, train, examples, outputs_idx)
        solve = _lm_solver(jacobian, total_rows / len(flat))
        half_grad = 0.5 * loss_gradient(net, train)

        accepted = False
        while mu <= cfg.mu_max:
            step = -solve(half_grad, mu)
            if np.all(np.isfinite(step)):
                trial = net.with_params(params + step)
                trial_loss = loss(trial, train)
                if trial_loss < current:
                    accepted = True
                    break
            mu *= cfg.mu_up

        if not accepted:
            result.status = "stalled"
            logger.info(f"LM stalled at epoch {epoch} (mu={mu:.3g})")
            break

        decrease = current - trial_loss
        net, params, current = trial, trial.get_params(), trial_loss
        mu = max(mu * cfg.mu_down, MU_MIN)
        result.train_loss.append(current)
        result.epochs = epoch
        logger.debug(f"LM epoch {epoch}: loss={current:.8g} mu={mu:.3g}")
        if epoch % 10 == 0:
            logger.info(f"LM epoch {epoch}: train loss={current:.6g}")

        if tracker.update(net, epoch):
            result.status = "early_stopped"
            break
        if decrease <= cfg.tolerance * current:
            result.status = "converged"
            break


def _train_gd(net: NeuralNet, train: TrainingSet, cfg: TrainConfig, tracker: _Tracker, result: TrainResult):
    params = net.get_params()
    velocity = np.zeros_like(params)
    rate = cfg.learning_rate
    total_weight = float(train.example_weights.sum())
    current = loss(net, train)
    result.train_loss.append(current)

    for epoch in range(1, cfg.max_epochs + 1):
        grad = loss_gradient(net, train) / total_weight
        velocity = cfg.momentum * velocity - rate * grad
        trial = net.with_params(params + velocity)
        trial_loss = loss(trial, train)
        if not trial_loss < current:
            # Rejected: restart momentum with a smaller rate
            rate *= 0.5
            velocity[:] = 0.0
            if rate < 1e-12:
                result.status = "stalled"
                break
            continue

        decrease = current - trial_loss
        net, params, current = trial, trial.get_params(), trial_loss
        result.train_loss.append(current)
        result.epochs = epoch
        if epoch % 50 == 0:
            logger.info(f"GD epoch {epoch}: train loss={current:.6g}")
        if tracker.update(net, epoch):
            result.status = "early_stopped"
            break
        if decrease <= cfg.tolerance * current:
            result.status = "converged"
            break


def train(net: NeuralNet, data: TrainingSet, cfg: TrainConfig) -> TrainResult:
    """
    Fit `net` to the raw-unit training set. Normalisation constants come from
    the set when it carries them, otherwise they are fitted on its inputs.
    The returned network holds the parameters with the best validation loss
    (the last accepted ones when no validation split is used).
    """
    if data.n_inputs != net.n_inputs or data.n_outputs != net.n_outputs:
        raise DimensionMismatchError(
            f"Training set is {data.n_inputs}->{data.n_outputs}, network is {net.n_inputs}->{net.n_outputs}"
        )
    if len(data) < net.num_params / 10:
        logger.warning(f"Only {len(data)} examples for {net.num_params} parameters")

    if data.norm_shift is not None and data.norm_scale is not None:
        shift, scale = data.norm_shift, data.norm_scale
    else:
        shift, scale = normalize_fit(data.inputs)
    net = net.with_normalization(shift, scale)
    normalized = data.normalized(shift, scale)

    train_part, val_part = split_validation(normalized, cfg.validation_fraction, cfg.seed)
    logger.info(f"Training {cfg.trainer.upper()}: {len(train_part)} examples, "
                f"{0 if val_part is None else len(val_part)} validation, {net.num_params} parameters")

    tracker = _Tracker(net, val_part, cfg.patience)
    result = TrainResult(net=net)
    if cfg.trainer == "lm":
        _train_lm(net, train_part, cfg, tracker, result)
    else:
        _train_gd(net, train_part, cfg, tracker, result)

    result.net = net.with_params(tracker.best_params)
    result.val_loss = tracker.history
    result.best_epoch = tracker.best_epoch
    logger.info(f"Training finished: status={result.status}, epochs={result.epochs}, "
                f"final train loss={result.train_loss[-1]:.6g}, best epoch={result.best_epoch}")
    return result
