"""Raw, smoothed and penalized objectives computed from the observed tensor only.

f(x)        = T(x,x,x)
g(x, t)     = E_y f(x + t y)              = f(x) + t^2 <z, x>
g_r(x, t)   = E_y [f(x + t y) - (3 tau_hat / 4) ||x + t y||^4]

with y ~ N(0, I) and z = mode_diag_sum(T).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import DEGENERATE_NORM
from .errors import DegenerateInputError, InvalidArgumentError
from .rng import PROBE_STREAM, random_unit
from .tensor_core import Tensor3, as_vec, mode_diag_sum, sym_contract_matrix, sym_contract_vec, trilinear

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SmoothedEval:
    value: float
    gradient: np.ndarray
    hessian: Optional[np.ndarray]
    t: float
    tau_hat: float


def _check(t: float, tau_hat: Optional[float] = None) -> None:
    if t < 0:
        raise InvalidArgumentError(f"smoothing radius must be non-negative, got {t}")
    if tau_hat is not None and tau_hat <= 0:
        raise InvalidArgumentError(f"tau_hat must be positive, got {tau_hat}")


def f_eval(T: Tensor3, x) -> float:
    return trilinear(T, x, x, x)


def g_eval(T: Tensor3, x, t: float, z: Optional[np.ndarray] = None) -> float:
    _check(t)
    x = as_vec(x, T.n)
    if z is None:
        z = mode_diag_sum(T)
    return f_eval(T, x) + t * t * float(z @ x)


def _penalty(x: np.ndarray, t: float, n: int) -> float:
    s = float(x @ x)
    return s * s + 2 * t * t * (n + 2) * s + t ** 4 * (n * n + 2 * n)


def g_r_eval(T: Tensor3, x, t: float, tau_hat: float, z: Optional[np.ndarray] = None) -> float:
    _check(t, tau_hat)
    x = as_vec(x, T.n)
    return g_eval(T, x, t, z) - 0.75 * tau_hat * _penalty(x, t, T.n)


def g_r_grad(T: Tensor3, x, t: float, tau_hat: float, z: Optional[np.ndarray] = None) -> np.ndarray:
    _check(t, tau_hat)
    x = as_vec(x, T.n)
    if z is None:
        z = mode_diag_sum(T)
    shrink = float(x @ x) + t * t * (T.n + 2)
    return sym_contract_vec(T, x) + t * t * z - 3 * tau_hat * shrink * x


def g_r_hess(T: Tensor3, x, t: float, tau_hat: float) -> np.ndarray:
    # Factor 2 on the contraction matches the finite-difference Hessian of T(x,x,x).
    _check(t, tau_hat)
    x = as_vec(x, T.n)
    shrink = float(x @ x) + t * t * (T.n + 2)
    return 2 * sym_contract_matrix(T, x) - 3 * tau_hat * (shrink * np.eye(T.n) + 2 * np.outer(x, x))


def smoothed_eval(T: Tensor3, x, t: float, tau_hat: float, with_hessian: bool = False,
                  z: Optional[np.ndarray] = None) -> SmoothedEval:
    if z is None:
        z = mode_diag_sum(T)
    return SmoothedEval(
        value=g_r_eval(T, x, t, tau_hat, z),
        gradient=g_r_grad(T, x, t, tau_hat, z),
        hessian=g_r_hess(T, x, t, tau_hat) if with_hessian else None,
        t=t,
        tau_hat=tau_hat,
    )


def x_dagger_unit(T: Tensor3) -> np.ndarray:
    """Normalized z: the maximizer direction of the infinitely smoothed objective."""
    z = mode_diag_sum(T)
    norm = np.linalg.norm(z)
    if norm <= DEGENERATE_NORM:
        raise DegenerateInputError("mode diagonal sum z is zero")
    return z / norm


def x_dagger_scaled(T: Tensor3, tau_hat: float) -> np.ndarray:
    """Global maximizer z / (3 tau_hat (n+2)) of the t -> infinity limit of g_r."""
    _check(0.0, tau_hat)
    return mode_diag_sum(T) / (3 * tau_hat * (T.n + 2))


def estimate_tau_hat(T: Tensor3, seed: int = 0, probes: int = 20, steps: int = 10) -> float:
    """max(f over short power-iteration probes, 1), used when tau is unknown."""
    best = 1.0
    for p in range(probes):
        x = random_unit(T.n, seed, PROBE_STREAM, p)
        for _ in range(steps):
            y = sym_contract_vec(T, x)
            norm = np.linalg.norm(y)
            if norm <= DEGENERATE_NORM:
                break
            x = y / norm
        best = max(best, f_eval(T, x))
    logger.debug("[objective] tau_hat estimate %.4g from %d probes", best, probes)
    return best
