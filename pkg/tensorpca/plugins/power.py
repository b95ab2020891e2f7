from __future__ import annotations

import time
from typing import Optional

import numpy as np

from ..algorithms import RecoveryTrace, RunContext, build_trace, iterate_until_converged, power_step
from ..config import DEFAULT_TOL
from ..rng import INIT_STREAM, random_unit
from ..tensor_core import Tensor3


def power_random(T: Tensor3, seed: int, max_iter: int, tol: float = DEFAULT_TOL,
                 v: Optional[np.ndarray] = None) -> RecoveryTrace:
    started = time.perf_counter()
    x0 = random_unit(T.n, seed, INIT_STREAM)
    iterates, converged = iterate_until_converged(lambda x: power_step(T, x), x0, max_iter, tol)
    return build_trace("power", iterates, converged, v, started)


class PowerPlugin:
    name = "power"
    seeded = True
    description = "Power method from a uniformly random start"

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        return power_random(T, ctx.seed, ctx.iteration_cap(T.n), ctx.tol, ctx.v)


def get_plugin():
    return PowerPlugin()
