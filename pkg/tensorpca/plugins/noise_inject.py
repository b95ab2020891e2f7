"""Homotopy-initialized power method with noise injection.

B^0..B^{m-1} have iid N(0, m) entries, B_bar is their mean and iteration p uses
T^p = T - B_bar + B^p. Each T^p then carries noise distributed as a fresh
N(0, m) tensor, independent across p.
"""
from __future__ import annotations

import logging
import time
from typing import Callable, List, Optional

import numpy as np

from ..algorithms import RecoveryTrace, RunContext, build_trace, normalized, power_step
from ..config import DEFAULT_TOL, get_settings
from ..errors import DegenerateStepError, InvalidArgumentError, ResourceGuardError
from ..rng import INIT_STREAM, INJECTION_STREAM, random_unit
from ..tensor_core import Tensor3, combine, mode_diag_sum, sample_gaussian

logger = logging.getLogger(__name__)


def injection_draw(n: int, m: int, seed: int, p: int) -> Tensor3:
    """B^p: regenerated bit-identically from its own substream on every call."""
    return sample_gaussian(n, float(m), seed, INJECTION_STREAM, p)


def injected_tensors(T: Tensor3, m: int, seed: int, streaming: bool = True,
                     memory_budget: Optional[int] = None) -> Callable[[int], Tensor3]:
    """Return p -> T^p. Streaming mode keeps only T - B_bar and regenerates B^p on use."""
    if m < 2:
        raise InvalidArgumentError(f"noise injection needs m >= 2, got {m}")
    budget = get_settings().memory_budget if memory_budget is None else memory_budget
    stored: List[Tensor3] = []
    if not streaming:
        needed = m * T.n ** 3 * T.entries.dtype.itemsize
        if needed > budget:
            raise ResourceGuardError(
                f"storing {m} injection tensors needs {needed} bytes > budget {budget}; enable streaming")
    acc = np.zeros((T.n, T.n, T.n))
    for p in range(m):
        b = injection_draw(T.n, m, seed, p)
        acc += b.entries
        if not streaming:
            stored.append(b)
    base = combine(T, Tensor3(acc / m), 1.0, -1.0)

    def tensor_at(p: int) -> Tensor3:
        if not 0 <= p < m:
            raise InvalidArgumentError(f"injection index {p} outside 0..{m - 1}")
        b = stored[p] if stored else injection_draw(T.n, m, seed, p)
        return combine(base, b, 1.0, 1.0)

    return tensor_at


def noise_injected_pca(T: Tensor3, m: int, seed: int, tol: float = DEFAULT_TOL, v: Optional[np.ndarray] = None,
                       streaming: bool = True, memory_budget: Optional[int] = None) -> RecoveryTrace:
    started = time.perf_counter()
    tensor_at = injected_tensors(T, m, seed, streaming, memory_budget)
    try:
        x = normalized(mode_diag_sum(tensor_at(0)), "initialization")
    except DegenerateStepError:
        logger.warning("[recover] injected z vector is zero; falling back to random initialization")
        x = random_unit(T.n, seed, INIT_STREAM)
    iterates = [x]
    for k in range(m - 1):
        iterates.append(power_step(tensor_at(k + 1), iterates[-1]))
    converged = np.linalg.norm(iterates[-1] - iterates[-2]) <= tol
    return build_trace("noise-inject", iterates, bool(converged), v, started)


class NoiseInjectPlugin:
    name = "noise-inject"
    seeded = True
    description = "Homotopy initialization with per-iteration noise injection"

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        cap = ctx.iteration_cap(T.n)
        m = ctx.m if ctx.m is not None else max(2, cap + 1)
        if ctx.max_iter is not None and m - 1 > cap:
            raise InvalidArgumentError(f"m={m} injections run {m - 1} iterations, above max_iter={cap}")
        return noise_injected_pca(T, m, ctx.seed, ctx.tol, ctx.v, ctx.streaming)


def get_plugin():
    return NoiseInjectPlugin()
