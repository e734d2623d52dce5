"""Input validation helpers.

Small checks shared by the operator, solver and certificate layers.  They
normalize array inputs to float64/complex128, enforce shape contracts and
raise the package's typed exceptions instead of bare asserts.
"""

from __future__ import annotations

import math

import numpy as np

from .exceptions import ConfigError, DimensionMismatch, NotSymmetric

_HERMITIAN_TOL = 1e-10


def as_vector(x, n: int | None = None, name: str = "x") -> np.ndarray:
    """Coerce to a 1-d float64/complex128 vector, optionally of length n."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be 1-d, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {n}")
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    return np.ascontiguousarray(arr, dtype=dtype)


def as_square_matrix(X, n: int | None = None, name: str = "X") -> np.ndarray:
    arr = np.asarray(X)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionMismatch(f"{name} has side {arr.shape[0]}, expected {n}")
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    return np.ascontiguousarray(arr, dtype=dtype)


def check_hermitian(X, n: int | None = None, name: str = "X") -> np.ndarray:
    """Validate symmetry/Hermitianity up to round-off and return the array."""
    arr = as_square_matrix(X, n=n, name=name)
    scale = max(1.0, float(np.max(np.abs(arr))) if arr.size else 1.0)
    if float(np.max(np.abs(arr - arr.conj().T))) > _HERMITIAN_TOL * scale:
        raise NotSymmetric(f"{name} is not symmetric/Hermitian within tolerance")
    return arr


def check_measurements(b, m: int, name: str = "b") -> np.ndarray:
    """Validate a real measurement vector of length m with finite entries."""
    arr = np.asarray(b, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != m:
        raise DimensionMismatch(f"{name} must have length {m}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{name} contains non-finite entries")
    return arr


def check_q(q) -> float:
    """Validate the residual norm exponent: finite and at least 1."""
    qf = float(q)
    if math.isinf(qf) or math.isnan(qf) or qf < 1.0:
        raise ConfigError(f"q must satisfy 1 <= q < inf, got {q}")
    return qf


def check_ell(ell) -> int:
    if ell not in (1, 2):
        raise ConfigError(f"ell must be 1 (amplitude) or 2 (intensity), got {ell}")
    return int(ell)


def check_positive_int(value, name: str, minimum: int = 1) -> int:
    iv = int(value)
    if iv < minimum:
        raise ConfigError(f"{name} must be >= {minimum}, got {value}")
    return iv
