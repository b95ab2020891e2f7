from __future__ import annotations

import logging
import time
from typing import Optional

import numpy as np

from ..algorithms import RecoveryTrace, RunContext, build_trace, iterate_until_converged, power_step
from ..config import DEFAULT_TOL
from ..errors import DegenerateInputError
from ..objective import x_dagger_unit
from ..rng import INIT_STREAM, random_unit
from ..tensor_core import Tensor3

logger = logging.getLogger(__name__)


def homotopy_init(T: Tensor3, seed: int = 0) -> np.ndarray:
    """x_dagger_unit(T), or a random start when z vanishes."""
    try:
        return x_dagger_unit(T)
    except DegenerateInputError:
        logger.warning("[recover] z vector is zero; falling back to random initialization (seed %d)", seed)
        return random_unit(T.n, seed, INIT_STREAM)


def homotopy_pca(T: Tensor3, max_iter: int, tol: float = DEFAULT_TOL, v: Optional[np.ndarray] = None,
                 seed: int = 0) -> RecoveryTrace:
    """Power iteration started from the infinitely smoothed maximizer."""
    started = time.perf_counter()
    x0 = homotopy_init(T, seed)
    iterates, converged = iterate_until_converged(lambda x: power_step(T, x), x0, max_iter, tol)
    return build_trace("homotopy", iterates, converged, v, started)


class HomotopyPlugin:
    name = "homotopy"
    seeded = False
    description = "Power method from the homotopy initialization x = z/|z|"

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        return homotopy_pca(T, ctx.iteration_cap(T.n), ctx.tol, ctx.v, ctx.seed)


def get_plugin():
    return HomotopyPlugin()
