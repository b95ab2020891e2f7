"""Batch experiments: success-rate grids, convergence curves and their CSV/JSON files.

Every trial draws its instance from a seed derived from the master seed and the
trial's grid coordinates, and all algorithms of a trial share that instance.
Rows are written in (n, tau, algorithm) order, so a given spec always produces
the same bytes whatever the thread count.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .algorithms import RunContext
from .config import DEFAULT_TOL, ITERATION_CAP, SUCCESS_THRESHOLD
from .errors import (DegenerateInputError, DegenerateStepError, InvalidArgumentError, StalledError,
                     TensorFileError)
from .model import generate
from .plugins_loader import get_algorithm
from .rng import derive_seed
from .tensor_core import check_dimension
from .workers import map_tasks

logger = logging.getLogger(__name__)

GRID_COLUMNS = ("n", "tau", "algorithm", "success_rate", "mean_iterations", "mean_final_correlation", "trials")
CURVE_COLUMNS = ("n", "alpha", "algorithm", "iteration", "mean_correlation", "variance", "trials")

# Failures that count against a trial instead of aborting the batch
_TRIAL_FAILURES = (DegenerateInputError, DegenerateStepError, StalledError)


def alpha_to_tau(alpha: float, n: int) -> float:
    return alpha * n ** 0.75


@dataclass(frozen=True)
class GridSpec:
    n_values: Tuple[int, ...]
    tau_values: Tuple[float, ...]
    trials: int
    algorithms: Tuple[str, ...]
    master_seed: int = 0
    max_iter: int = ITERATION_CAP
    tol: float = DEFAULT_TOL
    tau_mode: str = "alpha"  # "alpha": tau = value * n^(3/4); "absolute": tau = value
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("n_values", "tau_values", "algorithms"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.n_values or not self.tau_values or not self.algorithms:
            raise InvalidArgumentError("grid needs at least one n, one tau and one algorithm")
        if self.trials < 1:
            raise InvalidArgumentError(f"trials must be at least 1, got {self.trials}")
        if self.tau_mode not in ("alpha", "absolute"):
            raise InvalidArgumentError(f"tau_mode must be 'alpha' or 'absolute', got {self.tau_mode!r}")
        if any(n < 2 for n in self.n_values):
            raise InvalidArgumentError("every n must be at least 2")
        if any(t < 0 for t in self.tau_values):
            raise InvalidArgumentError("tau values must be non-negative")
        if self.max_iter < 1 or self.tol <= 0 or self.sigma <= 0:
            raise InvalidArgumentError("max_iter must be >= 1, tol and sigma > 0")

    def tau_for(self, n: int, value: float) -> float:
        return alpha_to_tau(value, n) if self.tau_mode == "alpha" else float(value)

    @classmethod
    def desk_default(cls, algorithms: Sequence[str] = ("flatten", "homotopy", "power"),
                     trials: int = 50, master_seed: int = 0) -> "GridSpec":
        return cls(n_values=(32, 64, 96, 128), tau_values=(0.5, 1.0, 2.0, 4.0), trials=trials,
                   algorithms=tuple(algorithms), master_seed=master_seed)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridSpec":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown grid spec fields: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise InvalidArgumentError(f"bad grid spec: {e}") from None

    @classmethod
    def load(cls, path: Path) -> "GridSpec":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise TensorFileError(f"{path}: cannot read grid spec: {e}") from e
        except ValueError as e:
            raise InvalidArgumentError(f"{path}: grid spec is not valid JSON: {e}") from None
        if not isinstance(data, dict):
            raise InvalidArgumentError(f"{path}: grid spec must be a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class GridCell:
    n: int
    tau: float
    algorithm: str
    success_count: int
    trials: int
    mean_iterations: float
    mean_final_correlation: float

    @property
    def success_rate(self) -> float:
        return self.success_count / self.trials

    def to_dict(self) -> Dict[str, Any]:
        d = asdict(self)
        d["success_rate"] = self.success_rate
        return d


@dataclass(frozen=True)
class ConvergenceCurve:
    n: int
    alpha: float
    algorithm: str
    mean_correlation: List[float] = field(default_factory=list)
    variance: List[float] = field(default_factory=list)
    trials: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class _Outcome:
    algorithm: str
    correlations: Tuple[float, ...]
    iterations: int
    failed: bool = False

    @property
    def final_correlation(self) -> float:
        return self.correlations[-1] if self.correlations else float("nan")


def _run_algorithms(n: int, tau: float, sigma: float, seed: int, algorithms: Sequence[str],
                    max_iter: int, tol: float) -> List[_Outcome]:
    """One instance, every algorithm on it; the tensor dies with this call."""
    inst = generate(n, tau * sigma, sigma, seed)
    ctx = RunContext(seed=seed, max_iter=max_iter, tol=tol, v=inst.v,
                     tau_hat=tau * sigma if tau > 0 else None)
    outcomes = []
    for tag in algorithms:
        try:
            trace = get_algorithm(tag).run(inst.tensor, ctx)
        except _TRIAL_FAILURES as e:
            logger.warning("[grid] %s failed on n=%d tau=%.4g seed=%d: %s", tag, n, tau, seed, e)
            outcomes.append(_Outcome(tag, (), max_iter, failed=True))
            continue
        outcomes.append(_Outcome(tag, tuple(trace.correlations), trace.iterations_used))
    return outcomes


def _is_success(outcome: _Outcome, max_iter: int) -> bool:
    if outcome.failed:
        return False
    return outcome.final_correlation >= SUCCESS_THRESHOLD and outcome.iterations <= min(max_iter, ITERATION_CAP)


def _validate(n_values: Iterable[int], algorithms: Iterable[str]) -> None:
    for n in n_values:
        check_dimension(n)
    for tag in algorithms:
        get_algorithm(tag)


def _mean(values: Sequence[float]) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return float(np.mean(finite)) if finite else float("nan")


def run_grid(spec: GridSpec, threads: int = 1) -> List[GridCell]:
    _validate(spec.n_values, spec.algorithms)
    tasks = [(ni, ti, trial)
             for ni in range(len(spec.n_values))
             for ti in range(len(spec.tau_values))
             for trial in range(spec.trials)]
    logger.info("[grid] %d instances x %d algorithms on %d thread(s)", len(tasks), len(spec.algorithms), threads)

    def task(key: Tuple[int, int, int]) -> List[_Outcome]:
        ni, ti, trial = key
        n = spec.n_values[ni]
        return _run_algorithms(n, spec.tau_for(n, spec.tau_values[ti]), spec.sigma,
                               derive_seed(spec.master_seed, ni, ti, trial),
                               spec.algorithms, spec.max_iter, spec.tol)

    results = map_tasks(task, tasks, threads)

    by_cell: Dict[Tuple[int, float, str], List[_Outcome]] = {}
    for (ni, ti, _), outcomes in zip(tasks, results):
        n = spec.n_values[ni]
        tau = spec.tau_for(n, spec.tau_values[ti])
        for out in outcomes:
            by_cell.setdefault((n, tau, out.algorithm), []).append(out)

    cells = []
    for (n, tau, tag) in sorted(by_cell):
        outs = by_cell[(n, tau, tag)]
        cells.append(GridCell(
            n=n, tau=tau, algorithm=tag,
            success_count=sum(_is_success(o, spec.max_iter) for o in outs),
            trials=len(outs),
            mean_iterations=float(np.mean([o.iterations for o in outs])),
            mean_final_correlation=_mean([o.final_correlation for o in outs]),
        ))
        logger.info("[grid] n=%d tau=%.4g %s: %d/%d", n, tau, tag, cells[-1].success_count, len(outs))
    return cells


def _pad(correlations: Sequence[float], length: int) -> np.ndarray:
    out = np.empty(length)
    out[:len(correlations)] = correlations
    out[len(correlations):] = correlations[-1]
    return out


def run_convergence(n: int, alphas: Sequence[float], trials: int, algorithms: Sequence[str], seed: int = 0,
                    max_iter: int = ITERATION_CAP, threads: int = 1, tol: float = DEFAULT_TOL,
                    sigma: float = 1.0) -> List[ConvergenceCurve]:
    """Per-iteration mean and variance of the correlation with v across paired trials."""
    if trials < 1 or not alphas or not algorithms:
        raise InvalidArgumentError("convergence run needs trials >= 1, alphas and algorithms")
    _validate([n], algorithms)
    tasks = [(ai, trial) for ai in range(len(alphas)) for trial in range(trials)]
    logger.info("[converge] n=%d, %d alphas x %d trials on %d thread(s)", n, len(alphas), trials, threads)

    def task(key: Tuple[int, int]) -> List[_Outcome]:
        ai, trial = key
        return _run_algorithms(n, alpha_to_tau(alphas[ai], n), sigma, derive_seed(seed, ai, trial),
                               algorithms, max_iter, tol)

    results = map_tasks(task, tasks, threads)

    curves = []
    for ai, alpha in enumerate(alphas):
        for tag in sorted(algorithms):
            series = [out.correlations for (a, _), outs in zip(tasks, results) if a == ai
                      for out in outs if out.algorithm == tag and not out.failed]
            if not series:
                logger.warning("[converge] no usable trials for %s at alpha=%g", tag, alpha)
                curves.append(ConvergenceCurve(n, float(alpha), tag, [], [], 0))
                continue
            length = max(len(s) for s in series)
            stacked = np.vstack([_pad(s, length) for s in series])
            curves.append(ConvergenceCurve(
                n=n, alpha=float(alpha), algorithm=tag,
                mean_correlation=[float(c) for c in stacked.mean(axis=0)],
                variance=[float(c) for c in stacked.var(axis=0)],
                trials=len(series),
            ))
    return curves


def _num(x: Any) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _result_kind(results: Sequence[Any], kind: Optional[str]) -> str:
    if kind is not None:
        if kind not in ("grid", "curve"):
            raise InvalidArgumentError(f"unknown result kind {kind!r}")
        return kind
    if results and isinstance(results[0], ConvergenceCurve):
        return "curve"
    return "grid"


def render_csv(results: Sequence[Any], kind: Optional[str] = None) -> str:
    kind = _result_kind(results, kind)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if kind == "grid":
        writer.writerow(GRID_COLUMNS)
        for cell in results:
            writer.writerow([_num(cell.n), _num(float(cell.tau)), cell.algorithm, _num(cell.success_rate),
                             _num(cell.mean_iterations), _num(cell.mean_final_correlation), _num(cell.trials)])
    else:
        writer.writerow(CURVE_COLUMNS)
        for curve in results:
            for i, (mean, var) in enumerate(zip(curve.mean_correlation, curve.variance)):
                writer.writerow([_num(curve.n), _num(curve.alpha), curve.algorithm, _num(i), _num(mean),
                                 _num(var), _num(curve.trials)])
    return buf.getvalue()


def render_json(results: Sequence[Any]) -> str:
    payload = [r.to_dict() if hasattr(r, "to_dict") else r for r in results]
    return json.dumps(payload, indent=2) + "\n"


def write_text(text: str, path: Optional[Path]) -> None:
    """Write to `path`, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise TensorFileError(f"{path}: cannot write results: {e}") from e
    logger.info("[io] Wrote %s", path)


def write_json(payload: Any, path: Optional[Path]) -> None:
    write_text(json.dumps(payload, indent=2) + "\n", path)


def emit(results: Sequence[Any], fmt: str, path: Optional[Path], kind: Optional[str] = None) -> None:
    """Write grid cells or convergence curves as CSV or JSON."""
    if fmt == "csv":
        text = render_csv(results, kind)
    elif fmt == "json":
        text = render_json(results)
    else:
        raise InvalidArgumentError(f"unknown format {fmt!r}; use csv or json")
    write_text(text, path)


def load_results(path: Path) -> Tuple[str, List[Dict[str, str]]]:
    """Read an emitted CSV or JSON file back as (kind, rows of strings) for display."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise TensorFileError(f"{path}: cannot read results: {e}") from e
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except ValueError as e:
            raise TensorFileError(f"{path}: not valid JSON: {e}") from e
        if not isinstance(data, list):
            raise TensorFileError(f"{path}: expected a JSON list of results")
        if data and "mean_correlation" in data[0]:
            rows = [{"n": str(c["n"]), "alpha": str(c["alpha"]), "algorithm": c["algorithm"],
                     "iteration": str(i), "mean_correlation": str(m), "variance": str(v),
                     "trials": str(c["trials"])}
                    for c in data for i, (m, v) in enumerate(zip(c["mean_correlation"], c["variance"]))]
            return "curve", rows
        return "grid", [{k: str(cell.get(k, "")) for k in GRID_COLUMNS} for cell in data]
    rows = list(csv.DictReader(io.StringIO(text)))
    header = text.splitlines()[0].split(",") if text else []
    if tuple(header) == CURVE_COLUMNS:
        return "curve", rows
    if tuple(header) == GRID_COLUMNS:
        return "grid", rows
    raise TensorFileError(f"{path}: unrecognized CSV header {header}")
