"""TPC3 binary tensor files and their JSON sidecars.

Layout: magic b"TPC3", u32 version (=1), u64 n, then n^3 little-endian float64
entries with k fastest.
"""
from __future__ import annotations

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict

import numpy as np

from .errors import TensorFileError
from .tensor_core import Tensor3, check_dimension

MAGIC = b"TPC3"
VERSION = 1
_HEADER = struct.Struct("<4sIQ")

logger = logging.getLogger(__name__)


def write_tensor(T: Tensor3, path: Path) -> None:
    path = Path(path)
    try:
        with path.open("wb") as fh:
            fh.write(_HEADER.pack(MAGIC, VERSION, T.n))
            fh.write(np.ascontiguousarray(T.entries, dtype="<f8").tobytes(order="C"))
    except OSError as e:
        raise TensorFileError(f"{path}: cannot write tensor: {e}") from e
    logger.info("[io] Wrote n=%d tensor to %s", T.n, path)


def read_tensor(path: Path) -> Tensor3:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise TensorFileError(f"{path}: cannot read tensor: {e}") from e
    if len(data) < _HEADER.size:
        raise TensorFileError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, n = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise TensorFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise TensorFileError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 8 * n ** 3
    if len(data) != expected:
        raise TensorFileError(f"{path}: expected {expected} bytes for n={n}, found {len(data)}")
    check_dimension(n)
    flat = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    return Tensor3.from_flat(flat.astype(np.float64), n)


def write_sidecar(meta: Dict[str, Any], path: Path) -> None:
    path = Path(path)
    try:
        path.write_text(json.dumps(meta, indent=2), encoding="utf-8")
    except OSError as e:
        raise TensorFileError(f"{path}: cannot write sidecar: {e}") from e


def read_sidecar(path: Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        meta = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise TensorFileError(f"{path}: cannot read sidecar: {e}") from e
    missing = {"n", "tau", "sigma", "seed", "v"} - set(meta)
    if missing:
        raise TensorFileError(f"{path}: sidecar missing fields {sorted(missing)}")
    return meta
