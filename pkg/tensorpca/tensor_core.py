"""Dense third-order tensors and the contraction kernels used everywhere else.

Storage is a C-ordered (n, n, n) array, so the flat entry order is (i, j, k)
with k fastest. No symmetrization is ever applied to the stored entries.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import get_settings
from .errors import InvalidArgumentError, ResourceGuardError
from .rng import make_rng

logger = logging.getLogger(__name__)


def check_dimension(n: int) -> None:
    settings = get_settings()
    if n < 1:
        raise InvalidArgumentError(f"dimension must be positive, got {n}")
    if n > settings.max_n:
        raise ResourceGuardError(f"n={n} exceeds the dimension cap {settings.max_n} (use --max-n-override)")
    if n > settings.warn_n:
        logger.warning("[tensor] n=%d above %d: tensor needs %.0f MB",
                       n, settings.warn_n, n ** 3 * settings.dtype.itemsize / 1e6)


@dataclass(frozen=True, eq=False)
class Tensor3:
    """Immutable dense n x n x n real tensor."""

    entries: np.ndarray

    def __post_init__(self):
        a = self.entries
        if a.ndim != 3 or not (a.shape[0] == a.shape[1] == a.shape[2]):
            raise InvalidArgumentError(f"expected an (n, n, n) array, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidArgumentError("tensor entries must be finite")
        if not a.flags.c_contiguous or a.flags.writeable:
            a = np.array(a, order="C", copy=True)
            a.flags.writeable = False
            object.__setattr__(self, "entries", a)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "Tensor3":
        check_dimension(n)
        return _wrap(np.zeros((n, n, n)))

    @classmethod
    def from_flat(cls, flat: np.ndarray, n: int) -> "Tensor3":
        if flat.size != n ** 3:
            raise InvalidArgumentError(f"expected {n ** 3} entries, got {flat.size}")
        return cls(np.asarray(flat).reshape(n, n, n))

    def flat(self) -> np.ndarray:
        return self.entries.reshape(-1)

    def __add__(self, other: "Tensor3") -> "Tensor3":
        return combine(self, other, 1.0, 1.0)

    def __sub__(self, other: "Tensor3") -> "Tensor3":
        return combine(self, other, 1.0, -1.0)

    def __repr__(self) -> str:
        return f"Tensor3(n={self.n}, dtype={self.entries.dtype})"


def _wrap(a: np.ndarray) -> Tensor3:
    a = np.ascontiguousarray(a, dtype=get_settings().dtype)
    a.flags.writeable = False
    return Tensor3(a)


def as_vec(x, n: Optional[int] = None, name: str = "x") -> np.ndarray:
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise InvalidArgumentError(f"{name} must be a vector")
    if n is not None and v.shape[0] != n:
        raise InvalidArgumentError(f"{name} has length {v.shape[0]}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise InvalidArgumentError(f"{name} must be finite")
    return v


def _same_n(T: Tensor3, U: Tensor3) -> None:
    if T.n != U.n:
        raise InvalidArgumentError(f"dimension mismatch: {T.n} vs {U.n}")


def sample_gaussian(n: int, variance: float, seed: int, *stream: int) -> Tensor3:
    """Tensor of iid N(0, variance) entries drawn from the (seed, stream) substream."""
    if variance <= 0:
        raise InvalidArgumentError(f"variance must be positive, got {variance}")
    check_dimension(n)
    rng = make_rng(seed, *stream)
    a = rng.standard_normal((n, n, n), dtype=np.float64)
    if variance != 1.0:
        a *= np.sqrt(variance)
    return _wrap(a)


def rank_one(v, scale: float) -> Tensor3:
    """scale * v (x) v (x) v."""
    v = as_vec(v, name="v")
    check_dimension(v.shape[0])
    a = scale * np.einsum("i,j,k->ijk", v, v, v)
    return _wrap(a)


def trilinear(T: Tensor3, x, y, z) -> float:
    """T(x, y, z) = sum_ijk T_ijk x_i y_j z_k."""
    x, y, z = (as_vec(w, T.n, name) for w, name in ((x, "x"), (y, "y"), (z, "z")))
    return float(x @ ((T.entries @ z) @ y))


def sym_contract_vec(T: Tensor3, x) -> np.ndarray:
    """T(x,x,:) + T(x,:,x) + T(:,x,x)."""
    x = as_vec(x, T.n)
    a = T.entries
    front = np.tensordot(x, a, axes=(0, 0))  # front[j, k] = sum_i x_i T_ijk
    return x @ front + front @ x + (a @ x) @ x


def sym_contract_matrix(T: Tensor3, x) -> np.ndarray:
    """P_sym[T(x,:,:) + T(:,x,:) + T(:,:,x)]; the result is exactly symmetric."""
    x = as_vec(x, T.n)
    a = T.entries
    m = np.tensordot(x, a, axes=(0, 0)) + np.tensordot(a, x, axes=(1, 0)) + a @ x
    return (m + m.T) / 2


def mode_diag_sum(T: Tensor3) -> np.ndarray:
    """z_j = sum_i T_iij + T_iji + T_jii."""
    a = T.entries
    return (np.einsum("iij->j", a) + np.einsum("iji->j", a) + np.einsum("jii->j", a)).astype(np.float64)


def frobenius_sq(T: Tensor3) -> float:
    flat = T.flat().astype(np.float64, copy=False)
    return float(flat @ flat)


def flatten_gram_matvec(T: Tensor3, w) -> np.ndarray:
    """(M M^T) w for the n x n^2 flattening M[i, (j,k)] = T_ijk, without forming M M^T."""
    w = as_vec(w, T.n, "w")
    m = T.entries.reshape(T.n, T.n * T.n)
    return m @ (m.T @ w)


def combine(T: Tensor3, U: Tensor3, a: float, b: float) -> Tensor3:
    """Entrywise a*T + b*U."""
    _same_n(T, U)
    return _wrap(a * T.entries + b * U.entries)
