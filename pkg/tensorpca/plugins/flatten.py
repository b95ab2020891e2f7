from __future__ import annotations

import time
from typing import Optional

import numpy as np

from ..algorithms import RecoveryTrace, RunContext, build_trace, iterate_until_converged, normalized
from ..config import DEFAULT_TOL
from ..objective import f_eval
from ..rng import INIT_STREAM, random_unit
from ..tensor_core import Tensor3, flatten_gram_matvec


def flatten_method(T: Tensor3, seed: int, max_iter: int, tol: float = DEFAULT_TOL,
                   v: Optional[np.ndarray] = None) -> RecoveryTrace:
    """Top left singular vector of the n x n^2 flattening by power iteration on M M^T."""
    started = time.perf_counter()
    x0 = random_unit(T.n, seed, INIT_STREAM)
    iterates, converged = iterate_until_converged(
        lambda w: normalized(flatten_gram_matvec(T, w), "flatten matvec"), x0, max_iter, tol)
    # The singular vector is defined up to sign; f(w) >= 0 picks the spike's sign.
    if f_eval(T, iterates[-1]) < 0:
        iterates = [-w for w in iterates]
    return build_trace("flatten", iterates, converged, v, started)


class FlattenPlugin:
    name = "flatten"
    seeded = True
    description = "Top singular vector of the n x n^2 flattening"

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        return flatten_method(T, ctx.seed, ctx.iteration_cap(T.n), ctx.tol, ctx.v)


def get_plugin():
    return FlattenPlugin()
