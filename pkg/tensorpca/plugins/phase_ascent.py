"""Scaled gradient iteration at the phase-transition radius.

Each round picks the best scale alpha for the current direction, then steps to
the gradient of the smoothed cubic part at alpha * x_hat:

    alpha_k = argmax_a g_r(a x_hat_k, t)
    x_{k+1} = alpha_k^2 (T(x,x,:) + T(x,:,x) + T(:,x,x))|_{x_hat_k} + t^2 z

The penalty part of grad g_r is parallel to x_hat_k; only the direction is kept.
"""
from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np

from ..algorithms import RecoveryTrace, RunContext, build_trace, iterate_until_converged, normalized
from ..config import DEFAULT_TOL
from ..errors import InvalidArgumentError
from ..objective import estimate_tau_hat, x_dagger_scaled
from ..tensor_core import Tensor3, mode_diag_sum, sym_contract_vec


def default_phase_radius(n: int) -> float:
    return 1.0 / (n * math.log(n) ** 2)


def best_scale(f_hat: float, zx: float, t: float, tau_hat: float, n: int) -> float:
    """Real root of d/da g_r(a x_hat, t) = 0 with the largest objective value."""
    c = t * t * (n + 2)
    roots = np.roots([-3 * tau_hat, 3 * f_hat, -3 * tau_hat * c, t * t * zx])
    real = [r.real for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]
    if not real:
        return 0.0

    def h(a: float) -> float:
        return a ** 3 * f_hat + t * t * a * zx - 0.75 * tau_hat * (a ** 4 + 2 * c * a * a)

    return max(real, key=h)


def phase_ascent(T: Tensor3, t: float, tau_hat: float, max_iter: int, tol: float = DEFAULT_TOL,
                 v: Optional[np.ndarray] = None) -> RecoveryTrace:
    if t < 0 or tau_hat <= 0:
        raise InvalidArgumentError("phase ascent needs t >= 0 and tau_hat > 0")
    started = time.perf_counter()
    z = mode_diag_sum(T)
    x0 = normalized(x_dagger_scaled(T, tau_hat), "initialization")

    def step(x_hat: np.ndarray) -> np.ndarray:
        g = sym_contract_vec(T, x_hat)
        alpha = best_scale(float(g @ x_hat) / 3.0, float(z @ x_hat), t, tau_hat, T.n)
        return normalized(alpha * alpha * g + t * t * z, "phase ascent step")

    iterates, converged = iterate_until_converged(step, x0, max_iter, tol)
    return build_trace("phase-ascent", iterates, converged, v, started)


class PhaseAscentPlugin:
    name = "phase-ascent"
    seeded = False
    description = "Scaled gradient steps at the phase-transition radius"

    def run(self, T: Tensor3, ctx: RunContext) -> RecoveryTrace:
        tau_hat = ctx.tau_hat if ctx.tau_hat is not None else estimate_tau_hat(T, ctx.seed)
        t = ctx.t_phase if ctx.t_phase is not None else default_phase_radius(T.n)
        return phase_ascent(T, t, tau_hat, ctx.iteration_cap(T.n), ctx.tol, ctx.v)


def get_plugin():
    return PhaseAscentPlugin()
