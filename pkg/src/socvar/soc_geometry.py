"""Exact geometry of the Lorentz cone Q in R^{m+1}.

Provides the (x0, xr) point type with its hat involution, classification of
points relative to Q, the closed-form Euclidean projector, the piecewise
distance formulas for Q and for the planar reduction psi(x) =
(||xr||^2 - x0^2, -x0), and tangent/normal cones as :class:`ConeSet` values.

Classification uses a relative tolerance with scale max(1, ||x||); boundary
detection takes precedence over interior because the downstream formulas
are discontinuous across classes.  All operations are pure and dimension
generic in m >= 1.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _lorentz
from .cone_sets import ConeSet, all_space, halfspace, neg_soc, ray, soc, zero

DEFAULT_TOL = 1e-9
SQRT2 = _lorentz.SQRT2


class OutsideConeError(ValueError):
    """The operation requires a point of Q but received one outside."""


class PointClass(enum.Enum):
    INTERIOR = "interior"
    BOUNDARY_NONZERO = "boundary_nonzero"
    ORIGIN = "origin"
    OUTSIDE = "outside"

    def in_cone(self) -> bool:
        return self is not PointClass.OUTSIDE


@dataclass(frozen=True)
class SocVector:
    """A point of R^{m+1} split as scalar head x0 and tail xr (length m)."""

    x0: float
    xr: np.ndarray

    def __post_init__(self):
        xr = np.asarray(self.xr, dtype=float).copy()
        if xr.ndim != 1 or xr.size < 1:
            raise ValueError("tail must be a vector of length >= 1")
        xr.setflags(write=False)
        object.__setattr__(self, "x0", float(self.x0))
        object.__setattr__(self, "xr", xr)

    @staticmethod
    def from_array(a) -> "SocVector":
        a = _lorentz.as_vec(a)
        return SocVector(a[0], a[1:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([[self.x0], self.xr])

    @property
    def m(self) -> int:
        return self.xr.size

    @property
    def dim(self) -> int:
        return self.xr.size + 1

    def norm(self) -> float:
        return float(np.hypot(self.x0, np.linalg.norm(self.xr)))

    def tail_norm(self) -> float:
        return float(np.linalg.norm(self.xr))

    def hat(self) -> "SocVector":
        return SocVector(-self.x0, self.xr)

    def __neg__(self) -> "SocVector":
        return SocVector(-self.x0, -self.xr)

    def __add__(self, other: "SocVector") -> "SocVector":
        return SocVector(self.x0 + other.x0, self.xr + other.xr)

    def __sub__(self, other: "SocVector") -> "SocVector":
        return SocVector(self.x0 - other.x0, self.xr - other.xr)

    def scale(self, t: float) -> "SocVector":
        return SocVector(t * self.x0, t * self.xr)

    def dot(self, other: "SocVector") -> float:
        return float(self.x0 * other.x0 + self.xr @ other.xr)


@dataclass(frozen=True)
class ReductionImage:
    """The pair psi(x) = (||xr||^2 - x0^2, -x0); in R^2_- exactly on Q."""

    p1: float
    p2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p1, self.p2])


def reduction(x: SocVector) -> ReductionImage:
    return ReductionImage(x.tail_norm() ** 2 - x.x0 ** 2, -x.x0)


def classify(x: SocVector, tol: float = DEFAULT_TOL) -> PointClass:
    """Classify a point relative to Q.

    Origin when ||x|| <= tol; boundary when | x0 - ||xr|| | <= tol * scale
    (taking precedence over interior); interior when ||xr|| < x0; outside
    otherwise.  scale = max(1, ||x||).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    nx = x.norm()
    nr = x.tail_norm()
    scale = max(1.0, nx)
    if nx <= tol:
        return PointClass.ORIGIN
    if abs(x.x0 - nr) <= tol * scale:
        return PointClass.BOUNDARY_NONZERO
    if nr < x.x0:
        return PointClass.INTERIOR
    return PointClass.OUTSIDE


def project(x: SocVector) -> SocVector:
    """Closed-form Euclidean projection onto Q."""
    return SocVector.from_array(_lorentz.project_soc(x.as_array()))


def project_neg(x: SocVector) -> SocVector:
    """Euclidean projection onto -Q (polar of Q); used by the Moreau split."""
    return SocVector.from_array(_lorentz.project_neg_soc(x.as_array()))


def dist_to_Q(x: SocVector) -> float:
    """Piecewise distance: 0 on Q, ||x|| on -Q, (sqrt2/2)(||xr|| - x0) else."""
    return _lorentz.dist_soc(x.as_array())


def dist_to_R2minus(p: ReductionImage) -> float:
    """Distance of a reduction image to R^2_-, by the four-branch formula.

    The branches are indexed by the position of the underlying point x:
    on Q both components are nonpositive; on -Q only p2 = -x0 sticks out;
    outside both cones p1 > 0, and p2 enters only when x0 < 0.
    """
    if p.p1 <= 0.0 and p.p2 <= 0.0:  # x in Q
        return 0.0
    if p.p1 <= 0.0:  # x in -Q
        return p.p2
    if p.p2 <= 0.0:  # x outside both cones, x0 >= 0
        return p.p1
    return float(np.hypot(p.p1, p.p2))  # x outside both cones, x0 < 0


def tangent_cone_Q(x: SocVector, tol: float = DEFAULT_TOL) -> ConeSet:
    """Tangent cone to Q: the whole space inside, Q at the vertex, and the
    halfspace with outer normal hat(x) at nonzero boundary points."""
    cls = classify(x, tol)
    if cls is PointClass.OUTSIDE:
        raise OutsideConeError("tangent cone requested at a point outside Q")
    if cls is PointClass.INTERIOR:
        return all_space(x.dim)
    if cls is PointClass.ORIGIN:
        return soc(x.dim)
    return halfspace(x.hat().as_array())


def normal_cone_Q(x: SocVector, tol: float = DEFAULT_TOL) -> ConeSet:
    """Normal cone to Q: {0} inside, -Q at the vertex, the ray through
    hat(x) at nonzero boundary points."""
    cls = classify(x, tol)
    if cls is PointClass.OUTSIDE:
        raise OutsideConeError("normal cone requested at a point outside Q")
    if cls is PointClass.INTERIOR:
        return zero(x.dim)
    if cls is PointClass.ORIGIN:
        return neg_soc(x.dim)
    return ray(x.hat().as_array())
