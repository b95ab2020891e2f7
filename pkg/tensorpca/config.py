"""Runtime settings and tuning constants.

Environment overrides:
- TPCA_MAX_N: hard cap on the tensor dimension (default 512)
- TPCA_MEMORY_BUDGET: bytes allowed for stored injection tensors
- TPCA_LOG_DIR: directory for tensorpca.log
- TPCA_PLUGINS_DIR: extra directory searched for algorithm plugins
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError

# Tuning constants
WARN_N = 320
MAX_N = 512
MEMORY_BUDGET_BYTES = 2 * 1024 ** 3
SUCCESS_THRESHOLD = 0.8
ITERATION_CAP = 100
DEFAULT_TOL = 1e-8
DEGENERATE_NORM = 1e-14

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    warn_n: int = WARN_N
    max_n: int = MAX_N
    memory_budget: int = MEMORY_BUDGET_BYTES
    precision: str = "double"
    log_dir: Path = Path(__file__).resolve().parent.parent / "logs"
    plugins_dir: Optional[Path] = None

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float32 if self.precision == "single" else np.float64)


def _int_env(name: str, default: int) -> int:
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("[startup] Ignoring non-integer %s=%r", name, raw)
        return default


def _from_env() -> Settings:
    base = Settings()
    log_dir = os.environ.get("TPCA_LOG_DIR")
    plugins_dir = os.environ.get("TPCA_PLUGINS_DIR")
    return replace(
        base,
        max_n=_int_env("TPCA_MAX_N", base.max_n),
        memory_budget=_int_env("TPCA_MEMORY_BUDGET", base.memory_budget),
        log_dir=Path(log_dir) if log_dir else base.log_dir,
        plugins_dir=Path(plugins_dir) if plugins_dir else None,
    )


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = _from_env()
    return _settings


def configure(max_n: Optional[int] = None, precision: Optional[str] = None,
              memory_budget: Optional[int] = None) -> Settings:
    """Apply overrides (e.g. from --max-n-override) on top of the environment."""
    global _settings
    current = get_settings()
    if precision is not None and precision not in ("double", "single"):
        raise InvalidArgumentError(f"unknown precision {precision!r}")
    if max_n is not None and max_n < 1:
        raise InvalidArgumentError("max_n must be positive")
    if max_n is not None and max_n > MAX_N and precision is None:
        precision = "single"
        logger.warning("[startup] n cap raised to %d; tensors stored in 32-bit floats (lower precision)", max_n)
    _settings = replace(
        current,
        max_n=current.max_n if max_n is None else max_n,
        precision=current.precision if precision is None else precision,
        memory_budget=current.memory_budget if memory_budget is None else memory_budget,
    )
    return _settings


def reset() -> None:
    global _settings
    _settings = None
