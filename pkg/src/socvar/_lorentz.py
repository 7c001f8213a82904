"""Array-level primitives for the Lorentz cone, shared across modules.

Vectors live in R^{m+1} and are split as (x0, xr) with scalar head x0 and
tail xr of length m >= 1.  Everything here works on plain float arrays; the
public geometric API lives in :mod:`socvar.soc_geometry`.
"""
from __future__ import annotations

import numpy as np

SQRT2 = float(np.sqrt(2.0))


def as_vec(x) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 2:
        raise ValueError(f"expected a vector of length >= 2, got shape {v.shape}")
    return v


def split(x: np.ndarray) -> tuple[float, np.ndarray]:
    return float(x[0]), np.asarray(x[1:], dtype=float)


def hat(x: np.ndarray) -> np.ndarray:
    """The involution (x0, xr) -> (-x0, xr)."""
    out = np.array(x, dtype=float)
    out[0] = -out[0]
    return out


def in_soc(x, tol: float = 0.0) -> bool:
    x0, xr = split(as_vec(x))
    scale = max(1.0, float(np.linalg.norm(x)))
    return float(np.linalg.norm(xr)) <= x0 + tol * scale


def in_neg_soc(x, tol: float = 0.0) -> bool:
    return in_soc(-as_vec(x), tol)


def project_soc(x) -> np.ndarray:
    """Euclidean projection onto the cone {(x0, xr) : ||xr|| <= x0}.

    Closed form; the branch boundaries agree so no tolerance is needed, and
    the third branch is only taken when ||xr|| > |x0| >= 0, avoiding any
    division by zero.
    """
    x = as_vec(x)
    x0, xr = split(x)
    nr = float(np.linalg.norm(xr))
    if nr <= x0:
        return x.copy()
    if nr <= -x0:
        return np.zeros_like(x)
    coef = 0.5 * (x0 + nr)
    out = np.empty_like(x)
    out[0] = coef
    out[1:] = (coef / nr) * xr
    return out


def project_neg_soc(x) -> np.ndarray:
    return -project_soc(-as_vec(x))


def dist_soc(x) -> float:
    """Distance to the cone: 0 on it, ||x|| on -Q, (sqrt2/2)(||xr|| - x0) else."""
    x0, xr = split(as_vec(x))
    nr = float(np.linalg.norm(xr))
    if nr <= x0:
        return 0.0
    if nr <= -x0:
        return float(np.hypot(x0, nr))
    return (SQRT2 / 2.0) * (nr - x0)


def soc_margin(x) -> float:
    """x0 - ||xr||; nonnegative exactly on the cone."""
    x0, xr = split(as_vec(x))
    return x0 - float(np.linalg.norm(xr))
