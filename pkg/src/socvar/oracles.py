"""Smooth-map oracles for the constraint map and perturbation maps.

A :class:`SmoothMapOracle` exposes value, Jacobian, and Hessian tensor of a
twice differentiable map R^n -> R^d at a point.  :class:`QuadraticMap` is
the concrete polynomial implementation used for file ingestion; its
derivatives are exact.  ``verify_oracle`` cross-checks any oracle against
central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np


@runtime_checkable
class SmoothMapOracle(Protocol):
    n: int  # domain dimension
    d: int  # range dimension

    def value(self, x: np.ndarray) -> np.ndarray: ...

    def jacobian(self, x: np.ndarray) -> np.ndarray: ...  # (d, n)

    def hessian(self, x: np.ndarray) -> np.ndarray: ...  # (d, n, n)


@dataclass(frozen=True)
class QuadraticMap:
    """Component-wise quadratic map: value_i = c_i + g_i.x + x.H_i.x / 2.

    ``H`` stores the exact Hessians, so jacobian/hessian are polynomials
    with no truncation error.
    """

    c: np.ndarray  # (d,)
    g: np.ndarray  # (d, n)
    H: np.ndarray  # (d, n, n), each symmetric

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).copy()
        g = np.asarray(self.g, dtype=float).copy()
        H = np.asarray(self.H, dtype=float).copy()
        if g.ndim != 2 or H.shape != (g.shape[0], g.shape[1], g.shape[1]) or c.shape != (g.shape[0],):
            raise ValueError("inconsistent quadratic map dimensions")
        H = 0.5 * (H + np.transpose(H, (0, 2, 1)))
        for a in (c, g, H):
            a.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "H", H)

    @property
    def n(self) -> int:
        return self.g.shape[1]

    @property
    def d(self) -> int:
        return self.g.shape[0]

    def value(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.c + self.g @ x + 0.5 * np.einsum("dij,i,j->d", self.H, x, x)

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.g + np.einsum("dij,j->di", self.H, x)

    def hessian(self, x) -> np.ndarray:
        return np.array(self.H)

    def shifted_to(self, x, target) -> "QuadraticMap":
        """Copy with the constant adjusted so that value(x) == target."""
        x = np.asarray(x, dtype=float)
        target = np.asarray(target, dtype=float)
        return QuadraticMap(self.c + (target - self.value(x)), self.g, self.H)


def fd_jacobian(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of a vector map."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def verify_oracle(phi: SmoothMapOracle, points, tol: float = 1e-6) -> None:
    """Raise AssertionError when derivatives disagree with finite differences."""
    for x in points:
        x = np.asarray(x, dtype=float)
        J = phi.jacobian(x)
        J_fd = fd_jacobian(phi.value, x)
        scale = max(1.0, float(np.abs(J).max()))
        if np.abs(J - J_fd).max() > tol * scale:
            raise AssertionError(f"jacobian mismatch at {x}: {np.abs(J - J_fd).max():.3e}")
        Hh = phi.hessian(x)
        H_fd = fd_jacobian(phi.jacobian, x, h=1e-5)
        scale = max(1.0, float(np.abs(Hh).max()))
        if np.abs(Hh - H_fd).max() > 1e-4 * scale:
            raise AssertionError(f"hessian mismatch at {x}: {np.abs(Hh - H_fd).max():.3e}")


def hessian_contraction(phi: SmoothMapOracle, x, lam) -> np.ndarray:
    """The n-by-n matrix sum_i lam_i * Hessian_i(x)."""
    lam = np.asarray(lam, dtype=float)
    return np.einsum("d,dij->ij", lam, phi.hessian(np.asarray(x, dtype=float)))


def quadratic_in_direction(phi: SmoothMapOracle, x, v) -> np.ndarray:
    """The range-space vector with components v . Hessian_i(x) . v."""
    v = np.asarray(v, dtype=float)
    return np.einsum("dij,i,j->d", phi.hessian(np.asarray(x, dtype=float)), v, v)
