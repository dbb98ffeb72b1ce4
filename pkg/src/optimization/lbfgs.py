"""
Limited-memory BFGS
===================
Two-loop recursion with a backtracking (Armijo) line search. Every accepted
iterate satisfies the sufficient-decrease condition, so the objective trace
is non-increasing up to floating-point round-off.

Close to a minimiser the decrease promised by the Armijo test drops below the
round-off of f itself. A trial step whose value is indistinguishable from f
is then accepted when it shrinks the gradient, and a line search that only
ever lands on that flat floor ends the run as converged.
"""

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.core.exceptions import InputDataError, NumericalFailure

logger = logging.getLogger(__name__)

FunAndGrad = Callable[[np.ndarray], Tuple[float, np.ndarray]]

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"
STATUS_LINE_SEARCH_FAILED = "line_search_failed"

# Relative size of the round-off floor on objective values
ROUNDOFF = 16 * np.finfo(np.float64).eps


def roundoff_floor(f: float) -> float:
    return ROUNDOFF * max(1.0, abs(f))


@dataclass
class OptimizeResult:
    x: np.ndarray
    fun: float
    grad_norm: float
    n_iters: int
    status: str
    history: List[float] = field(default_factory=list)
    n_evals: int = 0

    @property
    def success(self) -> bool:
        return self.status != STATUS_LINE_SEARCH_FAILED


def two_loop_direction(grad: np.ndarray, s_hist, y_hist, rho_hist) -> np.ndarray:
    """H_k @ grad using the stored curvature pairs (oldest first)"""
    q = grad.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        alpha = rho * np.dot(s, q)
        q -= alpha * y
        alphas.append(alpha)

    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= np.dot(s, y) / np.dot(y, y)

    for (s, y, rho), alpha in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        beta = rho * np.dot(y, q)
        q += (alpha - beta) * s
    return q


def lbfgs_minimize(fun_and_grad: FunAndGrad,
                   x0: np.ndarray,
                   memory: int = 10,
                   max_iters: int = 100,
                   tolerance: float = 1e-8,
                   armijo: float = 1e-4,
                   max_backtracks: int = 30,
                   callback: Optional[Callable[[int, np.ndarray, float], None]] = None) -> OptimizeResult:
    """
    Minimise a C1 objective from x0.

    Stops after max_iters accepted steps, when the gradient norm falls below
    `tolerance`, or when the line search exhausts `max_backtracks` halvings
    (status "line_search_failed", current iterate returned). Exhausting the
    halvings on the round-off floor of f counts as "converged".
    `callback(iteration, x, f)` runs after every accepted step.
    """
    if memory < 1 or max_iters < 0:
        raise InputDataError(f"Invalid L-BFGS settings: memory={memory}, max_iters={max_iters}")

    shape = np.shape(x0)
    x = np.array(x0, dtype=np.float64).ravel()
    if not np.all(np.isfinite(x)):
        raise InputDataError("L-BFGS start point contains non-finite values")

    def evaluate(point):
        f_val, g_val = fun_and_grad(point.reshape(shape))
        return float(f_val), np.asarray(g_val, dtype=np.float64).ravel()

    f, g = evaluate(x)
    n_evals = 1
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise NumericalFailure("Objective or gradient is not finite at the start point")

    s_hist, y_hist, rho_hist = deque(maxlen=memory), deque(maxlen=memory), deque(maxlen=memory)
    history = [f]
    status = STATUS_MAX_ITERS
    n_iters = 0

    while True:
        grad_norm = float(np.linalg.norm(g))
        if grad_norm <= tolerance:
            status = STATUS_CONVERGED
            break
        if n_iters >= max_iters:
            break

        direction = -two_loop_direction(g, list(s_hist), list(y_hist), list(rho_hist))
        slope = float(np.dot(g, direction))
        if not slope < 0:
            # Not a descent direction: restart from steepest descent
            s_hist.clear()
            y_hist.clear()
            rho_hist.clear()
            direction = -g
            slope = -grad_norm ** 2

        step = 1.0 if s_hist else min(1.0, 1.0 / np.sum(np.abs(g)))
        floor = roundoff_floor(f)
        accepted = False
        flat = False
        for _ in range(max_backtracks + 1):
            x_new = x + step * direction
            f_new, g_new = evaluate(x_new)
            n_evals += 1
            if np.isfinite(f_new) and f_new <= f + armijo * step * slope:
                accepted = True
                break
            flat = bool(np.isfinite(f_new) and abs(f_new - f) <= floor)
            if flat and np.all(np.isfinite(g_new)) and np.linalg.norm(g_new) < grad_norm:
                accepted = True
                break
            step *= 0.5

        if not accepted:
            if flat:
                status = STATUS_CONVERGED
                logger.debug(f"L-BFGS reached the round-off floor at iteration {n_iters} (|g|={grad_norm:.3e})")
            else:
                status = STATUS_LINE_SEARCH_FAILED
                logger.warning(f"L-BFGS line search failed at iteration {n_iters} (f={f:.6g})")
            break

        s = x_new - x
        y = g_new - g
        sy = float(np.dot(s, y))
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)

        x, f, g = x_new, f_new, g_new
        n_iters += 1
        history.append(f)
        logger.debug(f"L-BFGS iter {n_iters}: f={f:.10g} |g|={np.linalg.norm(g):.3e} step={step:.3g}")
        if callback is not None:
            callback(n_iters, x.reshape(shape), f)

    return OptimizeResult(x=x.reshape(shape), fun=f, grad_norm=float(np.linalg.norm(g)),
                          n_iters=n_iters, status=status, history=history, n_evals=n_evals)
