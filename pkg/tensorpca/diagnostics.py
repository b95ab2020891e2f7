"""Empirical checks of the moment identities, Hessian spectrum and homotopy path.

Statistics with a nonzero theoretical value pass on relative deviation,
zero-mean statistics pass within a fixed number of standard errors, and bracket
statistics pass when every trial lies inside the bracket.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg

from .algorithms import AscentOptions, HomotopySchedule
from .errors import InvalidArgumentError, NonConvergenceError
from .model import correlation, generate
from .objective import f_eval, g_r_grad, g_r_hess, x_dagger_scaled
from .plugins.full_homotopy import homotopy_stages
from .plugins.noise_inject import injected_tensors
from .rng import NOISE_STREAM, PROBE_STREAM, SIGNAL_STREAM, derive_seed, random_unit
from .tensor_core import Tensor3, as_vec, mode_diag_sum, rank_one, sample_gaussian, sym_contract_matrix, sym_contract_vec
from .workers import map_tasks

logger = logging.getLogger(__name__)

# classify_point thresholds
GOOD_NORM = 0.2
GOOD_CORR = 0.2
BAD_NORM_FACTOR = 3.0
BAD_CORR = 0.2
NEAR_DAGGER = 0.5

# GOE-scale bracket for lambda_max / sqrt(n), frozen from pilot runs
GOE_BRACKET = (0.5, 6.0)
DELTA_CONSTANT_BRACKET = (1.0, 9.0)
SIN_THETA_NOTE = ("The 1/log^2 n bound on sin(theta(b, v)) is vacuous at desk-scale n "
              "(log^2 64 ~ 17); raw values are reported without a hard bound.")


@dataclass
class MomentReport:
    name: str
    empirical: float
    theoretical: float
    trials: int
    deviation: float
    bound: float
    passed: bool
    kind: str = "relative"
    std_error: float = float("nan")
    detail: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def relative(cls, name: str, samples: np.ndarray, theoretical: float, bound: float) -> "MomentReport":
        emp = float(np.mean(samples))
        dev = abs(emp - theoretical) / abs(theoretical)
        return cls(name, emp, theoretical, len(samples), dev, bound, bool(dev <= bound), "relative",
                   float(np.std(samples) / math.sqrt(len(samples))))

    @classmethod
    def zero_mean(cls, name: str, samples: np.ndarray, sigmas: float = 4.0) -> "MomentReport":
        emp = float(np.mean(samples))
        se = float(np.std(samples) / math.sqrt(len(samples)))
        dev = abs(emp) / se if se > 0 else (0.0 if emp == 0 else math.inf)
        return cls(name, emp, 0.0, len(samples), dev, sigmas, bool(dev <= sigmas), "zero", se)

    @classmethod
    def bracket(cls, name: str, values: np.ndarray, lo: float, hi: float) -> "MomentReport":
        emp = float(np.mean(values))
        mid, half = (lo + hi) / 2, (hi - lo) / 2
        inside = bool(np.all((values >= lo) & (values <= hi)))
        return cls(name, emp, mid, len(values), abs(emp - mid) / mid, half / mid, inside, "bracket",
                   float(np.std(values) / math.sqrt(len(values))),
                   {"min": float(np.min(values)), "max": float(np.max(values)), "lo": lo, "hi": hi})

    @classmethod
    def rate(cls, name: str, hits: np.ndarray, threshold: float) -> "MomentReport":
        frac = float(np.mean(hits))
        return cls(name, frac, threshold, len(hits), max(0.0, threshold - frac), 0.0, bool(frac >= threshold), "rate",
                   float(np.std(hits) / math.sqrt(len(hits))))

    @classmethod
    def observed(cls, name: str, values: np.ndarray, note: str = "") -> "MomentReport":
        """Raw measurements with no pass criterion."""
        return cls(name, float(np.mean(values)), math.nan, len(values), math.nan, math.nan, True, "observed",
                   float(np.std(values) / math.sqrt(len(values))),
                   {"min": float(np.min(values)), "median": float(np.median(values)), "max": float(np.max(values)),
                    **({"note": note} if note else {})})

    def to_dict(self) -> dict:
        return {
            "name": self.name, "empirical": self.empirical, "theoretical": self.theoretical,
            "trials": self.trials, "deviation": self.deviation, "bound": self.bound,
            "passed": self.passed, "kind": self.kind, "std_error": self.std_error, "detail": dict(self.detail),
        }


# --- independence-condition moments -------------------------------------------------

def u_moments(n: int, m_var: float, trials: int, seed: int, v: Optional[np.ndarray] = None,
              norm_bound: float = 0.05, corr_bound: float = 0.10, threads: int = 1) -> Tuple[MomentReport, MomentReport]:
    """E||u||^2 = 3n(n-1)m + 9nm and E<u,v>^2 = 9m + 3(n-1)m for u = z of a pure-noise tensor."""
    if trials < 100:
        raise InvalidArgumentError("u_moments needs at least 100 trials")
    v = random_unit(n, seed, SIGNAL_STREAM) if v is None else as_vec(v, n, "v") / np.linalg.norm(v)

    def one(trial: int) -> Tuple[float, float]:
        u = mode_diag_sum(sample_gaussian(n, m_var, seed, NOISE_STREAM, trial))
        return float(u @ u), float(u @ v) ** 2

    stats = np.array(map_tasks(one, range(trials), threads))
    norm = MomentReport.relative("E|u|^2", stats[:, 0], (3 * n * (n - 1) + 9 * n) * m_var, norm_bound)
    corr = MomentReport.relative("E<u,v>^2", stats[:, 1], (9 + 3 * (n - 1)) * m_var, corr_bound)
    return norm, corr


def exact_u_second_moment(n: int, m_var: float = 1.0) -> float:
    """E||u||^2 by enumerating the linear map vec(A) -> u over all n^3 basis tensors."""
    if n > 6:
        raise InvalidArgumentError("exact enumeration is limited to n <= 6")
    basis = np.eye(n ** 3).reshape(n ** 3, n, n, n)
    coeff = np.einsum("piij->pj", basis) + np.einsum("piji->pj", basis) + np.einsum("pjii->pj", basis)
    return float(m_var * np.sum(coeff ** 2))


def delta_moments(n: int, m_var: float, x, v, trials: int, seed: int, bound: float = 0.10,
                  threads: int = 1) -> Tuple[MomentReport, MomentReport]:
    """E||delta(x)||^2 = (3n+6) m ||x||^4 and E<delta(x),v>^2 = 3m||x||^4 + 6m||x||^2<v,x>^2, fresh noise per trial."""
    x = as_vec(x, n)
    v = as_vec(v, n, "v")
    xx = float(x @ x)
    if xx == 0:
        raise InvalidArgumentError("delta moments need a nonzero x")

    def one(trial: int) -> Tuple[float, float]:
        d = sym_contract_vec(sample_gaussian(n, m_var, seed, NOISE_STREAM, trial), x)
        return float(d @ d), float(d @ v) ** 2

    stats = np.array(map_tasks(one, range(trials), threads))
    norm = MomentReport.relative("E|delta(x)|^2", stats[:, 0], (3 * n + 6) * m_var * xx * xx, bound)
    constant = norm.empirical / (n * m_var * xx * xx)
    lo, hi = DELTA_CONSTANT_BRACKET
    norm.detail = {"constant": constant, "lo": lo, "hi": hi}
    norm.passed = norm.passed and lo <= constant <= hi
    corr = MomentReport.relative("E<delta(x),v>^2", stats[:, 1],
                                 3 * m_var * xx * xx + 6 * m_var * xx * float(x @ v) ** 2, bound)
    return norm, corr


def injection_moments(m: int, trials: int, seed: int, bound: float = 0.03, sigmas: float = 4.0, n: int = 2,
                      threads: int = 1) -> Tuple[MomentReport, MomentReport, MomentReport]:
    """Var(T^p_e) = m, Cov(T^p_e, T^q_e) = 0 and Cov(T^p_e, T^q_e') = 0 over independent injections.

    Every trial draws a fresh noise tensor A and runs it through the same
    injected_tensors used by noise_injected_pca; e and e' are two distinct entries.
    """
    if m < 2:
        raise InvalidArgumentError("injection needs m >= 2")
    if n < 2:
        raise InvalidArgumentError("injection moments need n >= 2 for two distinct entries")
    e, e_other = (0, 0, 0), (1, 0, 1)

    def one(trial: int) -> Tuple[float, float, float]:
        A = sample_gaussian(n, 1.0, seed, NOISE_STREAM, trial)
        tensor_at = injected_tensors(A, m, derive_seed(seed, trial), streaming=False)
        first, second = tensor_at(0).entries, tensor_at(1).entries
        return float(first[e]), float(second[e]), float(second[e_other])

    stats = np.array(map_tasks(one, range(trials), threads))
    stats = stats - stats.mean(axis=0)
    variance = MomentReport.relative("Var(T^p_e)", stats[:, 0] ** 2, float(m), bound)
    cross_p = MomentReport.zero_mean("Cov(T^p_e,T^q_e)", stats[:, 0] * stats[:, 1], sigmas)
    cross_entry = MomentReport.zero_mean("Cov(T^p_e,T^q_e')", stats[:, 0] * stats[:, 2], sigmas)
    return variance, cross_p, cross_entry


# --- Hessian spectrum ----------------------------------------------------------------

def hessian_top_eig(H: np.ndarray, iters: int = 50000, tol: float = 1e-8, seed: int = 0) -> Tuple[float, np.ndarray]:
    """Largest algebraic eigenpair by power iteration on H + sI, s the max absolute row sum.

    Power iteration stops once the residual |Hb - lambda b| is below tol * max(1, s);
    Rayleigh-quotient steps then bring it below tol. b is sign-normalized so its
    largest-magnitude coordinate is positive.
    """
    H = np.asarray(H, dtype=np.float64)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or not np.array_equal(H, H.T):
        raise InvalidArgumentError("hessian_top_eig needs a symmetric matrix")
    n = H.shape[0]
    shift = float(np.max(np.sum(np.abs(H), axis=1)))
    if shift == 0.0:
        b = np.zeros(n)
        b[0] = 1.0
        return 0.0, b
    b = random_unit(n, seed, PROBE_STREAM)
    limit = tol * max(1.0, shift)
    lam = float(b @ H @ b)
    for _ in range(iters):
        hb = H @ b
        lam = float(b @ hb)
        if np.linalg.norm(hb - lam * b) <= limit:
            break
        y = hb + shift * b
        b = y / np.linalg.norm(y)
    else:
        raise NonConvergenceError(f"no eigenpair within {iters} iterations", estimate=(lam, _sign_fix(b)))
    lam, b = _rayleigh_polish(H, lam, b, limit)
    residual = float(np.linalg.norm(H @ b - lam * b))
    if residual > tol:
        raise NonConvergenceError(f"eigenpair residual {residual:.3g} above tol {tol:.3g}",
                                  estimate=(lam, _sign_fix(b)))
    return lam, _sign_fix(b)


def _rayleigh_polish(H: np.ndarray, lam: float, b: np.ndarray, limit: float,
                     steps: int = 3) -> Tuple[float, np.ndarray]:
    # Starting this close to the top pair, each step converges cubically to it.
    eye = np.eye(H.shape[0])
    for _ in range(steps):
        try:
            y = np.linalg.solve(H - lam * eye, b)
        except np.linalg.LinAlgError:
            break  # lam is exact to working precision
        if not np.all(np.isfinite(y)):
            break
        y = y / np.linalg.norm(y)
        lam_y = float(y @ H @ y)
        if lam_y < lam - limit:
            break
        lam, b = lam_y, y
    return lam, b


def _sign_fix(b: np.ndarray) -> np.ndarray:
    return b if b[np.argmax(np.abs(b))] >= 0 else -b


def noise_hessian_top(A: Tensor3, x) -> float:
    """lambda_max of P_sym[A(x,:,:) + A(:,x,:) + A(:,:,x)]."""
    m = sym_contract_matrix(A, x)
    return float(linalg.eigvalsh(m, subset_by_index=[A.n - 1, A.n - 1])[0])


def goe_spectrum_check(n: int, trials: int, seed: int, bracket: Tuple[float, float] = GOE_BRACKET,
                       threads: int = 1) -> MomentReport:
    """lambda_max / sqrt(n) for noise tensors and random unit x; every trial must fall in the bracket."""
    if trials < 30:
        raise InvalidArgumentError("goe_spectrum_check needs at least 30 trials")

    def one(trial: int) -> float:
        A = sample_gaussian(n, 1.0, seed, NOISE_STREAM, trial)
        x = random_unit(n, seed, PROBE_STREAM, trial)
        return noise_hessian_top(A, x) / math.sqrt(n)

    ratios = np.array(map_tasks(one, range(trials), threads))
    return MomentReport.bracket("lambda_max/sqrt(n)", ratios, *bracket)


# --- finite differences ----------------------------------------------------------------

def fd_gradient(f: Callable[[np.ndarray], float], x, h: float = 1e-5) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_jacobian(grad: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-5) -> np.ndarray:
    """Central differences of a gradient; symmetrized when used as a Hessian."""
    x = np.asarray(x, dtype=np.float64)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((grad(x + e) - grad(x - e)) / (2 * h))
    jac = np.column_stack(cols)
    return (jac + jac.T) / 2


def fd_hessian(f: Callable[[np.ndarray], float], x, h: float = 1e-3) -> np.ndarray:
    """Mixed central second differences of values (exact for cubics up to rounding)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    eye = np.eye(n) * h
    hess = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            val = (f(x + eye[i] + eye[j]) - f(x + eye[i] - eye[j])
                   - f(x - eye[i] + eye[j]) + f(x - eye[i] - eye[j])) / (4 * h * h)
            hess[i, j] = hess[j, i] = val
    return hess


def hessian_factor(T: Tensor3, x, h: float = 1e-3) -> float:
    """Least-squares c with FD-Hessian(T(x,x,x)) ~ c * sym_contract_matrix(T, x); comes out as 2."""
    s = sym_contract_matrix(T, x)
    fd = fd_hessian(lambda y: f_eval(T, y), x, h)
    return float(np.sum(fd * s) / np.sum(s * s))


# --- homotopy path ---------------------------------------------------------------------

@dataclass
class PathPoint:
    t: float
    x: np.ndarray
    grad_norm: float
    top_eig: Tuple[float, np.ndarray]
    sin_theta_b_v: float
    point_class: str
    sin_theta_dagger: float
    dist_to_dagger: float
    delta_norm_ratio: float
    delta_corr_ratio: float
    stalled: bool = False
    eig_converged: bool = True
    ascent_values: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "t": self.t, "x_norm": float(np.linalg.norm(self.x)), "grad_norm": self.grad_norm,
            "lambda_max": self.top_eig[0], "sin_theta_b_v": self.sin_theta_b_v, "class": self.point_class,
            "sin_theta_b_v_at_dagger": self.sin_theta_dagger, "dist_to_dagger": self.dist_to_dagger,
            "delta_norm_ratio": self.delta_norm_ratio, "delta_corr_ratio": self.delta_corr_ratio,
            "stalled": self.stalled, "eig_converged": self.eig_converged,
        }


def classify_point(x, v, n: int) -> str:
    """'good' (large norm, correlated), 'bad' (norm O(n^-1/4), uncorrelated) or 'unclassified'."""
    x = as_vec(x, n)
    norm = float(np.linalg.norm(x))
    corr = correlation(x, v) if norm > 0 else 0.0
    if norm >= GOOD_NORM and corr >= GOOD_CORR:
        return "good"
    if norm <= BAD_NORM_FACTOR * n ** -0.25 and abs(corr) <= BAD_CORR:
        return "bad"
    return "unclassified"


def sin_theta(b: np.ndarray, v: np.ndarray) -> float:
    c = correlation(b, v)
    return math.sqrt(max(0.0, 1.0 - c * c))


def _top_eig(H: np.ndarray) -> Tuple[float, np.ndarray, bool]:
    try:
        lam, b = hessian_top_eig(H)
        return lam, b, True
    except NonConvergenceError as e:
        logger.warning("[path] Hessian eigenpair did not converge; recording last estimate")
        lam, b = e.estimate
        return lam, b, False


def trace_path(T: Tensor3, v, schedule: HomotopySchedule, tau_hat: float, opts: Optional[AscentOptions] = None,
               tau: Optional[float] = None) -> List[PathPoint]:
    """Follow the homotopy stage by stage, recording geometry and independence ratios at every t."""
    v = as_vec(v, T.n, "v")
    v = v / np.linalg.norm(v)
    tau = tau_hat if tau is None else tau
    noise = T - rank_one(v, tau)
    z = mode_diag_sum(T)
    dagger = x_dagger_scaled(T, tau_hat)
    dagger_norm = float(np.linalg.norm(dagger))
    points: List[PathPoint] = []
    for stage in homotopy_stages(T, schedule, tau_hat, opts, tolerate_stalls=True):
        x, t = stage.x, stage.t
        lam, b, ok = _top_eig(g_r_hess(T, x, t, tau_hat))
        _, b_dagger, _ = _top_eig(g_r_hess(T, dagger, t, tau_hat))
        dist = float(np.linalg.norm(x - dagger)) / dagger_norm if dagger_norm > 0 else math.inf
        if lam > 1e-9 * max(1.0, abs(lam)) and ok:
            point_class = "saddle-like"
        elif dist <= NEAR_DAGGER:
            point_class = "near_dagger"
        else:
            point_class = classify_point(x, v, T.n)
        xx = float(x @ x)
        delta = sym_contract_vec(noise, x)
        points.append(PathPoint(
            t=t, x=x, grad_norm=float(np.linalg.norm(g_r_grad(T, x, t, tau_hat, z))),
            top_eig=(lam, b), sin_theta_b_v=sin_theta(b, v), point_class=point_class,
            sin_theta_dagger=sin_theta(b_dagger, v), dist_to_dagger=dist,
            delta_norm_ratio=float(np.linalg.norm(delta)) / xx if xx > 0 else math.nan,
            delta_corr_ratio=abs(float(delta @ v)) / xx if xx > 0 else math.nan,
            stalled=stage.stalled, eig_converged=ok,
            ascent_values=list(stage.ascent.values) if stage.ascent else [],
        ))
        logger.info("[path] t=%.4g |x|=%.4g corr=%.3f class=%s", t, math.sqrt(xx),
                    correlation(x, v) if xx > 0 else 0.0, point_class)
    return points


def phase_transition_check(n: int = 64, seeds: int = 30, seed: int = 0, stages: int = 12,
                           near_rate: float = 0.8, good_rate: float = 0.7,
                           threads: int = 1) -> Tuple[MomentReport, MomentReport, MomentReport]:
    """At tau = n^(3/4) log n: the first stage stays near x_dagger and the t = 0 answer is good.

    Also reports sin(theta(b, v)) at x_dagger for the first radius, without a bound.
    """
    tau = n ** 0.75 * math.log(n)
    schedule = HomotopySchedule.geometric(n, stages)

    def one(trial: int) -> Tuple[bool, bool, float]:
        inst = generate(n, tau, 1.0, derive_seed(seed, trial))
        T = inst.tensor
        dagger = x_dagger_scaled(T, tau)
        solved = list(homotopy_stages(T, schedule, tau, tolerate_stalls=True))
        near = float(np.linalg.norm(solved[0].x - dagger)) <= NEAR_DAGGER * float(np.linalg.norm(dagger))
        good = classify_point(solved[-1].x, inst.v, n) == "good"
        H = g_r_hess(T, dagger, schedule.t_values[0], tau)
        _, vecs = linalg.eigh(H, subset_by_index=[n - 1, n - 1])
        return near, good, sin_theta(vecs[:, 0], inst.v)

    rows = map_tasks(one, range(seeds), threads)
    near = np.array([r[0] for r in rows], dtype=float)
    good = np.array([r[1] for r in rows], dtype=float)
    sines = np.array([r[2] for r in rows])
    logger.info("[check] phase transition n=%d: near %.2f, good %.2f", n, near.mean(), good.mean())
    return (MomentReport.rate("near x_dagger at first stage", near, near_rate),
            MomentReport.rate("good at t=0", good, good_rate),
            MomentReport.observed("sin theta(b,v) at x_dagger", sines, SIN_THETA_NOTE))
