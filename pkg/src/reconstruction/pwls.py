"""
Penalized Weighted Least Squares
================================
    f* = argmin_f (A f - g)^T D (A f - g) + beta * R(f)

with D = diag(y / max y) and an edge-preserving Huber prior over the
4-connected neighbourhood, summed over ordered pairs (q, k) so every
adjacent pair contributes twice. The objective is minimised with L-BFGS;
iterates are captured every `snapshot_every` iterations as image versions
for fusion.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.core.exceptions import DimensionMismatchError, InputDataError, NumericalFailure
from src.optimization.lbfgs import STATUS_CONVERGED, STATUS_LINE_SEARCH_FAILED, lbfgs_minimize
from src.scanmodel.noise import counts_to_sinogram
from src.scanmodel.projector import JosephProjector
from src.scanmodel.types import CountsData, Image, Sinogram
from .fbp import FilterParams, fbp_reconstruct

logger = logging.getLogger(__name__)

# Initial image filter for PWLS runs
INIT_FILTER = FilterParams(cutoff=2.0, order=3)


class PwlsParams(BaseModel):
    """
    Prior weight beta (0 = plain weighted least squares), Huber threshold delta
    in attenuation units, iteration budget and snapshot period.
    """

    model_config = ConfigDict(frozen=True)

    beta: float = Field(default=1e-3, ge=0)
    delta: float = Field(default=0.02, gt=0)
    max_iters: int = Field(default=90, ge=1)
    snapshot_every: int = Field(default=10, ge=1)
    lbfgs_memory: int = Field(default=10, ge=1)
    tolerance: float = Field(default=1e-10, ge=0)

    @model_validator(mode="after")
    def check_snapshot_period(self) -> 'PwlsParams':
        if self.snapshot_every > self.max_iters:
            raise ValueError(f"snapshot_every ({self.snapshot_every}) exceeds max_iters ({self.max_iters})")
        return self

    @property
    def snapshot_iterations(self) -> List[int]:
        return list(range(self.snapshot_every, self.max_iters + 1, self.snapshot_every))


@dataclass
class WeightMap:
    """Diagonal of D, one weight per (view, bin)"""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise DimensionMismatchError(f"WeightMap must be 2-D, got shape {self.weights.shape}")
        if not np.all(np.isfinite(self.weights)) or np.any(self.weights < 0):
            raise InputDataError("Weights must be finite and non-negative")

    @classmethod
    def from_counts(cls, counts: CountsData) -> 'WeightMap':
        peak = counts.counts.max()
        if peak <= 0:
            raise InputDataError("All counts are zero; weights are undefined")
        return cls(counts.counts / peak)


def huber(x, delta: float):
    """x^2/2 for |x| < delta, delta*|x| - delta^2/2 otherwise"""
    ax = np.abs(x)
    return np.where(ax < delta, 0.5 * ax ** 2, delta * ax - 0.5 * delta ** 2)


def huber_deriv(x, delta: float):
    return np.clip(x, -delta, delta)


def penalty(image: Image, delta: float) -> float:
    f = image.data
    dx = f[:, 1:] - f[:, :-1]
    dy = f[1:, :] - f[:-1, :]
    # huber is even, so (q, k) and (k, q) contribute the same term
    return 2.0 * float(np.sum(huber(dx, delta)) + np.sum(huber(dy, delta)))


def penalty_gradient(image: Image, delta: float) -> Image:
    f = image.data
    grad = np.zeros_like(f)
    dx = huber_deriv(f[:, 1:] - f[:, :-1], delta)
    dy = huber_deriv(f[1:, :] - f[:-1, :], delta)
    grad[:, 1:] += dx
    grad[:, :-1] -= dx
    grad[1:, :] += dy
    grad[:-1, :] -= dy
    return image.with_data(2.0 * grad)


class PwlsProblem:
    """Objective and gradient bound to one measurement; the projector is built once"""

    def __init__(self, g_hat: Sinogram, weights: WeightMap, params: PwlsParams,
                 width: int, height: int, pixel_size: float):
        if weights.weights.shape != g_hat.geometry.shape:
            raise DimensionMismatchError(
                f"Weight map shape {weights.weights.shape} does not match sinogram {g_hat.geometry.shape}"
            )
        self.g_hat = g_hat
        self.weights = weights.weights
        self.params = params
        self.projector = JosephProjector(g_hat.geometry, width, height, pixel_size)

    def _image(self, data: np.ndarray) -> Image:
        return Image(data, self.projector.pixel_size)

    def objective_and_gradient(self, data: np.ndarray):
        image = self._image(data)
        residual = self.projector.forward(image).data - self.g_hat.data
        weighted = self.weights * residual
        value = float(np.sum(weighted * residual))
        grad = 2.0 * self.projector.adjoint(self.g_hat.with_data(weighted)).data
        if self.params.beta > 0:
            value += self.params.beta * penalty(image, self.params.delta)
            grad += self.params.beta * penalty_gradient(image, self.params.delta).data
        return value, grad

    def objective(self, image: Image) -> float:
        self.projector.check_image(image)
        return self.objective_and_gradient(image.data)[0]

    def gradient(self, image: Image) -> Image:
        self.projector.check_image(image)
        return image.with_data(self.objective_and_gradient(image.data)[1])


def pwls_objective(f: Image, g_hat: Sinogram, w: WeightMap, params: PwlsParams) -> float:
    return PwlsProblem(g_hat, w, params, f.width, f.height, f.pixel_size).objective(f)


def pwls_gradient(f: Image, g_hat: Sinogram, w: WeightMap, params: PwlsParams) -> Image:
    return PwlsProblem(g_hat, w, params, f.width, f.height, f.pixel_size).gradient(f)


@dataclass
class PwlsResult:
    init: Image
    snapshots: List[Image]
    iterations: List[int]
    status: str
    n_iters: int
    objective_history: List[float] = field(default_factory=list)
    snapshot_objectives: List[float] = field(default_factory=list)

    @property
    def final(self) -> Image:
        return self.snapshots[-1] if self.snapshots else self.init

    def select(self, iterations: Sequence[int]) -> List[Image]:
        """Images at the given iteration numbers; 0 is the initial image"""
        by_iteration = {0: self.init}
        by_iteration.update(zip(self.iterations, self.snapshots))
        missing = [it for it in iterations if it not in by_iteration]
        if missing:
            if self.status == STATUS_LINE_SEARCH_FAILED:
                raise NumericalFailure(
                    f"Snapshots {missing} unavailable: line search failed after {self.n_iters} iterations"
                )
            raise InputDataError(f"No snapshot at iterations {missing}; available: {sorted(by_iteration)}")
        return [by_iteration[it] for it in iterations]


def fbp_initial_image(counts: CountsData, width: int, height: int, pixel_size: float) -> Image:
    """Starting image: FBP with a nearly transparent low-pass (cut-off 2.0, p = 3)"""
    return fbp_reconstruct(counts_to_sinogram(counts), INIT_FILTER, width, height, pixel_size)


def pwls_reconstruct(counts: CountsData, init: Image, params: PwlsParams) -> PwlsResult:
    """
    Run L-BFGS on the PWLS objective from `init`, keeping a copy of the iterate
    at iterations snapshot_every, 2*snapshot_every, ..., max_iters.
    """
    g_hat = counts_to_sinogram(counts)
    problem = PwlsProblem(g_hat, WeightMap.from_counts(counts), params,
                          init.width, init.height, init.pixel_size)
    wanted = params.snapshot_iterations
    snapshots: List[Image] = []
    iterations: List[int] = []
    objectives: List[float] = []

    def keep(iteration: int, x: np.ndarray, value: float) -> None:
        if iteration % params.snapshot_every == 0:
            snapshots.append(init.with_data(x.copy()))
            iterations.append(iteration)
            objectives.append(value)
            logger.info(f"PWLS iteration {iteration}: objective={value:.8g}")

    result = lbfgs_minimize(problem.objective_and_gradient, init.data,
                            memory=params.lbfgs_memory, max_iters=params.max_iters,
                            tolerance=params.tolerance, callback=keep)

    if result.status == STATUS_CONVERGED:
        # Remaining snapshots repeat the converged iterate
        for iteration in wanted[len(snapshots):]:
            snapshots.append(init.with_data(result.x.copy()))
            iterations.append(iteration)
            objectives.append(result.fun)

    logger.info(f"PWLS finished: status={result.status}, iterations={result.n_iters}, "
                f"snapshots={len(snapshots)}/{len(wanted)}")
    return PwlsResult(init=init, snapshots=snapshots, iterations=iterations, status=result.status,
                      n_iters=result.n_iters, objective_history=result.history,
                      snapshot_objectives=objectives)
