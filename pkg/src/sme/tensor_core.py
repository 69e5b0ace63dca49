"""Minimal dense linear algebra used by the energy model.

All arrays are float64, row-major. Shapes in play are tiny (d, p <= ~100),
so plain numpy without any BLAS tuning is plenty.

Tensor3 mode convention: mode 1 indexes output coordinates (p), mode 2
indexes the entity-embedding coordinates (d), mode 3 indexes the
relation-embedding coordinates (d). mode3_contract pairs a vector with
mode 3 and returns the resulting p x d matrix.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError


def as_vector(x, length: int | None = None) -> np.ndarray:
    """Coerce to a contiguous float64 1-d array, optionally checking length."""
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a vector, got ndim={v.ndim}")
    if length is not None and v.shape[0] != length:
        raise ShapeError(f"expected length {length}, got {v.shape[0]}")
    return v


def as_matrix(x, shape: tuple[int, int] | None = None) -> np.ndarray:
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 2:
        raise ShapeError(f"expected a matrix, got ndim={v.ndim}")
    if shape is not None and v.shape != shape:
        raise ShapeError(f"expected shape {shape}, got {v.shape}")
    return v


def as_tensor3(x, shape: tuple[int, int, int] | None = None) -> np.ndarray:
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 3:
        raise ShapeError(f"expected a 3-mode tensor, got ndim={v.ndim}")
    if shape is not None and v.shape != shape:
        raise ShapeError(f"expected shape {shape}, got {v.shape}")
    return v


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product; m is (p, d), v has length d."""
    m = as_matrix(m)
    v = as_vector(v)
    if m.shape[1] != v.shape[0]:
        raise ShapeError(f"matvec: {m.shape} x ({v.shape[0]},)")
    return m @ v


def dot(a: np.ndarray, b: np.ndarray) -> float:
    """Plain inner product of two equal-length vectors."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise ShapeError(f"dot: {a.shape} vs {b.shape}")
    return float(a @ b)


def mode3_contract(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Contract a (p, d, d) tensor with a length-d vector along mode 3.

    Returns the (p, d) matrix M with M[i, j] = sum_k t[i, j, k] * v[k].
    """
    t = as_tensor3(t)
    v = as_vector(v)
    if t.shape[2] != v.shape[0]:
        raise ShapeError(f"mode3_contract: {t.shape} x ({v.shape[0]},)")
    return t @ v
