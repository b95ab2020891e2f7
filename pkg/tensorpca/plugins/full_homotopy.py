"""Gaussian homotopy continuation on the penalized objective g_r."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from ..algorithms import (AscentOptions, AscentResult, HomotopySchedule, RecoveryTrace, RunContext, build_trace,
                          local_maximize_gr, normalized)
from ..config import DEFAULT_TOL
from ..errors import StalledError
from ..objective import estimate_tau_hat, x_dagger_scaled
from ..tensor_core import Tensor3, mode_diag_sum

logger = logging.getLogger(__name__)


@dataclass
class StageResult:
    index: int
    t: float
    x: np.ndarray
    ascent: Optional[AscentResult]
    stalled: bool = False


def homotopy_stages(T: Tensor3, schedule: HomotopySchedule, tau_hat: float, opts: Optional[AscentOptions] = None,
                    tolerate_stalls: bool = False) -> Iterator[StageResult]:
    """Solve each stage from the previous stage's maximizer, starting at x_dagger_scaled."""
    z = mode_diag_sum(T)
    x = x_dagger_scaled(T, tau_hat)
    for k, t in enumerate(schedule.t_values):
        try:
            res = local_maximize_gr(T, x, t, tau_hat, opts, z)
        except StalledError as e:
            if not tolerate_stalls:
                raise e.at_stage(k) from e
            logger.warning("[path] stage %d (t=%.4g) stalled; continuing from best point", k, t)
            x = e.best_point
            yield StageResult(k, t, x, None, stalled=True)
            continue
        x = res.x
        yield StageResult(k, t, x, res)


def homotopy_full(T: Tensor3, schedule: HomotopySchedule, tau_hat: float, opts: Optional[AscentOptions] = None,
                  v: Optional[np.ndarray] = None, tol: float = DEFAULT_TOL) -> RecoveryTrace:
    """Normalized stage solutions as the trace; converged needs the last ascent to finish
    and the last two stage directions to agree within tol."""
    started = time.perf_counter()
    stages = list(homotopy_stages(T, schedule, tau_hat, opts))
    iterates = [normalized(s.x, f"stage {s.index} solution") for s in stages]
    converged = bool(stages[-1].ascent and stages[-1].ascent.converged)
    if len(iterates) > 1:
        converged = converged and float(np.linalg.norm(iterates[-1] - iterates[-2])) <= tol
    return build_trace("full-homotopy", iterates, converged, v, started)


class FullHomotopyPlugin:
    name = "full-homotopy"
    seeded = False
    description = "Homotopy continuation over a decreasing smoothing schedule"

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        schedule = ctx.schedule or HomotopySchedule.geometric(T.n)
        tau_hat = ctx.tau_hat if ctx.tau_hat is not None else estimate_tau_hat(T, ctx.seed)
        return homotopy_full(T, schedule, tau_hat, ctx.ascent, ctx.v, ctx.tol)


def get_plugin():
    return FullHomotopyPlugin()
