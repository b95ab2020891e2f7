"""Spiked tensor instances T = tau v(x)v(x)v + sigma A, noise estimation and scoring."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from .config import SUCCESS_THRESHOLD
from .errors import InvalidArgumentError
from .rng import NOISE_STREAM, SIGNAL_STREAM, random_unit
from .tensor_core import Tensor3, as_vec, combine, frobenius_sq, rank_one, sample_gaussian


@dataclass(frozen=True, eq=False)
class SpikedInstance:
    n: int
    tau: float
    sigma: float
    v: np.ndarray
    seed: int
    tensor: Tensor3

    def sidecar(self) -> Dict[str, Any]:
        return {"n": self.n, "tau": self.tau, "sigma": self.sigma, "seed": self.seed,
                "v": [float(c) for c in self.v]}


@dataclass(frozen=True)
class Score:
    correlation: float
    success: bool


def generate(n: int, tau: float, sigma: float, seed: int, v_opt=None) -> SpikedInstance:
    if n < 2:
        raise InvalidArgumentError(f"n must be at least 2, got {n}")
    if tau < 0:
        raise InvalidArgumentError(f"tau must be non-negative, got {tau}")
    if sigma <= 0:
        raise InvalidArgumentError(f"sigma must be positive, got {sigma}")
    if v_opt is None:
        v = random_unit(n, seed, SIGNAL_STREAM)
    else:
        v = as_vec(v_opt, n, "v")
        norm = np.linalg.norm(v)
        if norm == 0:
            raise InvalidArgumentError("signal vector must be nonzero")
        v = v / norm
    noise = sample_gaussian(n, sigma ** 2, seed, NOISE_STREAM)
    tensor = noise if tau == 0 else combine(rank_one(v, tau), noise, 1.0, 1.0)
    return SpikedInstance(n=n, tau=float(tau), sigma=float(sigma), v=v, seed=seed, tensor=tensor)


def estimate_sigma_sq(T: Tensor3) -> float:
    """Squared Frobenius norm over n^3: the noise variance estimate for small tau."""
    return frobenius_sq(T) / T.n ** 3


def normalize_noise(T: Tensor3) -> Tensor3:
    """Rescale T so its estimated noise variance is one."""
    sigma_sq = estimate_sigma_sq(T)
    if sigma_sq == 0:
        return T
    return combine(T, T, 1.0 / np.sqrt(sigma_sq), 0.0)


def correlation(x, v) -> float:
    x = as_vec(x)
    v = as_vec(v, x.shape[0], "v")
    nx, nv = np.linalg.norm(x), np.linalg.norm(v)
    if nx == 0 or nv == 0:
        raise InvalidArgumentError("cannot score a zero vector")
    return float(np.clip((x @ v) / (nx * nv), -1.0, 1.0))


def score(x, v) -> Score:
    c = correlation(x, v)
    return Score(correlation=c, success=c >= SUCCESS_THRESHOLD)
