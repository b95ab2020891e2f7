"""Types and kernels shared by the recovery plugins in tensorpca.plugins."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .config import DEFAULT_TOL, DEGENERATE_NORM
from .errors import DegenerateStepError, InvalidArgumentError, StalledError
from .model import correlation
from .objective import g_r_eval, g_r_grad
from .tensor_core import Tensor3, as_vec, mode_diag_sum, sym_contract_vec

logger = logging.getLogger(__name__)


def default_max_iter(n: int) -> int:
    """max(8, ceil(3 log2 log2 n)): a concrete cap for the O(log log n) bound."""
    return max(8, math.ceil(3 * math.log2(max(math.log2(max(n, 2)), 1.0))))


@dataclass
class RecoveryTrace:
    algorithm: str
    iterates: List[np.ndarray]
    correlations: List[float]
    converged: bool
    iterations_used: int
    wall_time: float = 0.0

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]

    @property
    def final_correlation(self) -> Optional[float]:
        return self.correlations[-1] if self.correlations else None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "wall_time": self.wall_time,
            "correlations": list(self.correlations),
            "final": [float(c) for c in self.final],
        }


@dataclass(frozen=True)
class HomotopySchedule:
    t_values: tuple

    def __post_init__(self):
        ts = tuple(float(t) for t in self.t_values)
        if not ts or ts[-1] != 0.0:
            raise InvalidArgumentError("schedule must end at t = 0")
        if any(a <= b for a, b in zip(ts, ts[1:])):
            raise InvalidArgumentError("schedule must be strictly decreasing")
        object.__setattr__(self, "t_values", ts)

    @classmethod
    def geometric(cls, n: int, stages: int = 12, t_max: Optional[float] = None,
                  t_min: Optional[float] = None) -> "HomotopySchedule":
        """`stages` geometric radii from 10/n down to 1/(100 n), then 0."""
        t_max = 10.0 / n if t_max is None else t_max
        t_min = 1.0 / (100.0 * n) if t_min is None else t_min
        if stages < 1 or not 0 < t_min <= t_max:
            raise InvalidArgumentError("geometric schedule needs stages >= 1 and 0 < t_min <= t_max")
        ts = np.geomspace(t_max, t_min, stages) if stages > 1 else np.array([t_max])
        return cls(tuple(ts) + (0.0,))

    def __len__(self) -> int:
        return len(self.t_values)


@dataclass(frozen=True)
class AscentOptions:
    max_iter: int = 5000
    grad_tol: Optional[float] = None  # None: 1e-6 * max(1, tau_hat)
    armijo: float = 1e-4
    max_backtracks: int = 60
    max_stalls: int = 20

    def resolved_grad_tol(self, tau_hat: float) -> float:
        return self.grad_tol if self.grad_tol is not None else 1e-6 * max(1.0, tau_hat)


@dataclass
class AscentResult:
    x: np.ndarray
    value: float
    values: List[float]
    iterations: int
    converged: bool
    grad_norm: float


@dataclass
class RunContext:
    """Per-run options handed to every plugin."""

    seed: int = 0
    max_iter: Optional[int] = None
    tol: float = DEFAULT_TOL
    v: Optional[np.ndarray] = None
    tau_hat: Optional[float] = None
    m: Optional[int] = None
    streaming: bool = True
    schedule: Optional[HomotopySchedule] = None
    t_phase: Optional[float] = None
    ascent: AscentOptions = field(default_factory=AscentOptions)

    def iteration_cap(self, n: int) -> int:
        return default_max_iter(n) if self.max_iter is None else self.max_iter


def normalized(y: np.ndarray, what: str = "step") -> np.ndarray:
    norm = float(np.linalg.norm(y))
    if norm <= DEGENERATE_NORM:
        raise DegenerateStepError(f"{what} produced a zero vector (norm {norm:.3g})")
    return y / norm


def power_step(T: Tensor3, x) -> np.ndarray:
    """One tensor power update: normalize T(x,x,:) + T(x,:,x) + T(:,x,x)."""
    x = as_vec(x, T.n)
    if not np.linalg.norm(x) > 0:
        raise InvalidArgumentError("power step needs a nonzero point")
    return normalized(sym_contract_vec(T, x), "power step")


def build_trace(algorithm: str, iterates: Sequence[np.ndarray], converged: bool,
                v: Optional[np.ndarray], started: float) -> RecoveryTrace:
    iterates = list(iterates)
    corrs = [correlation(x, v) for x in iterates] if v is not None else []
    return RecoveryTrace(algorithm=algorithm, iterates=iterates, correlations=corrs, converged=converged,
                         iterations_used=len(iterates) - 1, wall_time=time.perf_counter() - started)


def iterate_until_converged(step: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, max_iter: int,
                            tol: float) -> tuple[List[np.ndarray], bool]:
    """Apply `step` until two consecutive iterates are within tol or max_iter steps ran."""
    if max_iter < 0:
        raise InvalidArgumentError("max_iter must be non-negative")
    iterates = [x0]
    for _ in range(max_iter):
        x = step(iterates[-1])
        iterates.append(x)
        if np.linalg.norm(x - iterates[-2]) <= tol:
            return iterates, True
    return iterates, False


def _variable_value(T: Tensor3, x: np.ndarray, t: float, tau_hat: float, z: np.ndarray) -> float:
    # g_r without its x-independent t^4 term, which only adds rounding to the Armijo test
    return g_r_eval(T, x, t, tau_hat, z) + 0.75 * tau_hat * t ** 4 * (T.n * T.n + 2 * T.n)


def local_maximize_gr(T: Tensor3, x0, t: float, tau_hat: float, opts: Optional[AscentOptions] = None,
                      z: Optional[np.ndarray] = None) -> AscentResult:
    """Gradient ascent on g_r(., t) with Armijo backtracking, started at x0."""
    opts = opts or AscentOptions()
    x = as_vec(x0, T.n, "x0").copy()
    if z is None:
        z = mode_diag_sum(T)
    offset = 0.75 * tau_hat * t ** 4 * (T.n * T.n + 2 * T.n)
    grad_tol = opts.resolved_grad_tol(tau_hat)
    val = _variable_value(T, x, t, tau_hat, z)
    grad = g_r_grad(T, x, t, tau_hat, z)
    values = [val - offset]
    step = 1.0 / (3 * tau_hat * (float(x @ x) + t * t * (T.n + 2)) + 1.0)
    stalls = 0
    for it in range(opts.max_iter):
        gn = float(np.linalg.norm(grad))
        if gn <= grad_tol:
            return AscentResult(x, val - offset, values, it, True, gn)
        s = step
        for _ in range(opts.max_backtracks):
            cand = x + s * grad
            cval = _variable_value(T, cand, t, tau_hat, z)
            if cval >= val + opts.armijo * s * gn * gn:
                break
            s *= 0.5
        else:
            stalls += 1
            step = s
            if stalls >= opts.max_stalls:
                raise StalledError(f"line search stalled {stalls} times at t={t:.4g} (|grad|={gn:.3g})",
                                   best_point=x, best_value=val - offset)
            continue
        stalls = 0
        x, val = cand, cval
        grad = g_r_grad(T, x, t, tau_hat, z)
        values.append(val - offset)
        step = 2.0 * s
    gn = float(np.linalg.norm(grad))
    logger.debug("[ascent] t=%.4g hit max_iter=%d with |grad|=%.3g", t, opts.max_iter, gn)
    return AscentResult(x, val - offset, values, opts.max_iter, gn <= grad_tol, gn)
