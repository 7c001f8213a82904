"""Second-order epi-derivative of the indicator of Q and the graphical
derivative of its normal-cone map.

The closed forms: with K = T_Q(x) cap {y}^perp the critical cone of Q at x
for y in N_Q(x), the second-order epi-derivative of the indicator is 0 for
x interior or at the vertex, (||y||/||x||)(||vr||^2 - v0^2) at nonzero
boundary points, and +infinity off K.  The graphical derivative of N_Q is
N_K(v) in the first two classes and its translate by
(||y||/||x||)(-v0, vr) at nonzero boundary points.

``recovery_sequence`` builds the feasible boundary curve that realizes the
epi-limit from above for critical directions that leave the cone, with the
step length pinned by the positive root of a quartic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cone_sets, soc_geometry
from .cone_sets import ConeSet, Empty, Intersect, Hyperplane, Translate, simplify
from .soc_geometry import PointClass, SocVector

MEMBER_TOL = 1e-10


class InvalidNormalError(ValueError):
    """y is not a normal vector to Q at x."""


class NoRootError(RuntimeError):
    """The quartic root-find failed; signals a defect, not a valid state."""


@dataclass(frozen=True)
class ExtendedReal:
    """A finite real or an explicit +infinity tag (never a float sentinel)."""

    value: float | None  # None encodes +infinity

    @staticmethod
    def of(x: float) -> "ExtendedReal":
        return ExtendedReal(float(x))

    @staticmethod
    def infinity() -> "ExtendedReal":
        return ExtendedReal(None)

    @property
    def is_infinite(self) -> bool:
        return self.value is None

    def finite(self) -> float:
        if self.value is None:
            raise ValueError("infinite value")
        return self.value

    def __repr__(self):
        return "+inf" if self.value is None else f"{self.value!r}"


@dataclass(frozen=True)
class CriticalConeQ:
    """The critical cone K = T_Q(x) cap {y}^perp with its structured form."""

    x: SocVector
    y: SocVector
    representation: ConeSet


def _check_normal(x: SocVector, y: SocVector, tol: float = MEMBER_TOL) -> PointClass:
    cls = soc_geometry.classify(x)
    if cls is PointClass.OUTSIDE:
        raise soc_geometry.OutsideConeError("base point lies outside Q")
    ncone = soc_geometry.normal_cone_Q(x)
    if not cone_sets.membership(ncone, y.as_array(), tol):
        raise InvalidNormalError("y is not in the normal cone to Q at x")
    return cls


def critical_cone_Q(x: SocVector, y: SocVector) -> CriticalConeQ:
    """Structured representation of T_Q(x) cap {y}^perp."""
    cls = _check_normal(x, y)
    n = x.dim
    ya = y.as_array()
    if cls is PointClass.INTERIOR:
        rep: ConeSet = cone_sets.all_space(n)
    elif cls is PointClass.ORIGIN:
        if y.norm() <= MEMBER_TOL:
            rep = cone_sets.soc(n)
        else:
            rep = simplify(Intersect(cone_sets.soc(n), Hyperplane(ya)))
    else:
        xh = x.hat().as_array()
        if y.norm() <= MEMBER_TOL:
            rep = cone_sets.halfspace(xh)
        else:
            rep = cone_sets.hyperplane(xh)
    return CriticalConeQ(x, y, rep)


def epi_second_derivative(x: SocVector, y: SocVector, v: SocVector) -> ExtendedReal:
    """Second-order epi-derivative of the indicator of Q at x for y, at v."""
    cls = _check_normal(x, y)
    K = critical_cone_Q(x, y)
    if not cone_sets.membership(K.representation, v.as_array(), MEMBER_TOL):
        return ExtendedReal.infinity()
    if cls is PointClass.BOUNDARY_NONZERO:
        factor = y.norm() / x.norm()
        return ExtendedReal.of(factor * (v.tail_norm() ** 2 - v.x0 ** 2))
    return ExtendedReal.of(0.0)


def second_order_quotient(x: SocVector, y: SocVector, v: SocVector, t: float) -> ExtendedReal:
    """(ind_Q(x + t v) - ind_Q(x) - t <y, v>) / (t^2 / 2).

    The indicator is decided at machine precision (relative band 1e-14):
    any looser band would leak into the quotient as an O(band/t^2) error.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    step = x + v.scale(t)
    margin = step.x0 - step.tail_norm()
    if margin < -1e-14 * max(1.0, step.norm()):
        return ExtendedReal.infinity()
    return ExtendedReal.of(-2.0 * y.dot(v) / t)


def _quartic_coeffs(x0: float, v0: float, c4: float, t: float) -> np.ndarray:
    return np.array([
        c4 * c4 + 16.0 * x0 * x0 * v0 * v0,
        32.0 * x0 ** 3 * v0,
        16.0 * (x0 ** 4 - t * t * x0 * x0 * v0 * v0),
        -32.0 * t * t * x0 ** 3 * v0,
        -16.0 * t * t * x0 ** 4,
    ])


def _positive_quartic_root(x0: float, v0: float, c4: float, t: float,
                           max_iter: int = 200) -> float:
    """Positive root of the step-length quartic, by bisection.

    The polynomial is negative at 0; for v0 < 0 it is positive at
    -x0/v0, and the admissible roots always satisfy alpha <= t.
    """
    coeffs = _quartic_coeffs(x0, v0, c4, t)

    def p(a: float) -> float:
        return float(np.polyval(coeffs, a))

    hi = -x0 / v0 if v0 < 0 else 10.0 * t
    if p(hi) <= 0:
        grow = hi
        for _ in range(200):
            grow *= 2.0
            if p(grow) > 0:
                hi = grow
                break
        else:
            raise NoRootError("no sign change located for the step quartic")
    lo = 0.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if p(mid) > 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    # Newton polish
    dcoeffs = np.polyder(coeffs)
    for _ in range(5):
        d = float(np.polyval(dcoeffs, root))
        if d == 0:
            break
        root -= p(root) / d
    if not (root > 0):
        raise NoRootError("quartic root-finder returned a nonpositive root")
    return float(root)


def recovery_sequence(x: SocVector, y: SocVector, v: SocVector, t: float) -> SocVector:
    """Direction v_t with x + t*v_t on bd Q and ||t*v_t|| = t.

    Requires x on bd Q minus the vertex and v on the boundary of the
    critical cone but outside Q.  Inputs are rescaled internally to unit
    norm (degree-2 homogeneity of the epi-derivative makes this harmless);
    the returned direction approximates v/||v|| as t -> 0.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    cls = _check_normal(x, y)
    if cls is not PointClass.BOUNDARY_NONZERO:
        raise ValueError("recovery sequence requires a nonzero boundary base point")
    sx = x.norm()
    xu = x.scale(1.0 / sx)
    vu = v.scale(1.0 / v.norm())
    t_eff = t / sx
    if soc_geometry.classify(vu).in_cone():
        raise ValueError("direction already lies in Q; a constant sequence recovers it")
    if abs(vu.dot(xu.hat())) > 1e-8:
        raise ValueError("direction is not on the boundary of the critical cone")
    c4 = vu.tail_norm() ** 2 - vu.x0 ** 2
    if abs(c4) <= 1e-14:
        # v on bd(-Q): the quartic factors as (a^2 - t^2)(v0 a + x0)^2,
        # so the admissible root is exactly t and no tilt is needed
        alpha, beta = t_eff, 0.0
    else:
        alpha = _positive_quartic_root(xu.x0, vu.x0, c4, t_eff)
        beta = alpha * alpha * c4 / (4.0 * xu.x0 * (xu.x0 + alpha * vu.x0))
    step = vu.scale(alpha) - xu.hat().scale(beta)
    # round-off can leave the point one ulp outside; increasing the tilt
    # strictly increases the cone margin, so nudge until it is clean
    for _ in range(8):
        probe = xu + step
        if probe.x0 - probe.tail_norm() >= 0.0:
            break
        beta = beta * (1.0 + 1e-13) + 1e-18
        step = vu.scale(alpha) - xu.hat().scale(beta)
    return step.scale(1.0 / t_eff)


def graphical_derivative_NQ(x: SocVector, y: SocVector, v: SocVector) -> ConeSet:
    """DN_Q(x, y)(v): N_K(v) with a curvature translate at boundary points."""
    cls = _check_normal(x, y)
    K = critical_cone_Q(x, y)
    va = v.as_array()
    if not cone_sets.membership(K.representation, va, MEMBER_TOL):
        return Empty(x.dim)
    nk = cone_sets.normal_cone_of(K.representation, va, MEMBER_TOL)
    if cls is not PointClass.BOUNDARY_NONZERO:
        return nk
    shift = (y.norm() / x.norm()) * v.hat().as_array()
    return simplify(Translate(shift, nk))


def pdc_failure_witness(x: SocVector) -> tuple[SocVector, SocVector, np.ndarray]:
    """A triple (y, v, w) with w in DN_Q(x, y)(v) but outside N_K(v).

    Witnesses exist exactly in the nonpolyhedral regime m >= 2: for m = 1
    the cone is polyhedral, the projector direction condition holds, and
    the two sets coincide for every admissible (y, v).
    """
    if soc_geometry.classify(x) is not PointClass.BOUNDARY_NONZERO:
        raise ValueError("witness requires a nonzero boundary point of Q")
    if x.m < 2:
        raise ValueError("no witness exists for m = 1: the cone is polyhedral there")
    y = x.hat()
    # a tail direction orthogonal to xr spans the part of K not aligned with x
    xr = x.xr
    basis = np.eye(x.m)
    overlaps = np.abs(basis @ xr)
    k = int(np.argmin(overlaps))
    vr = basis[k] - (float(basis[k] @ xr) / float(xr @ xr)) * xr
    vr = vr / np.linalg.norm(vr)
    v = SocVector(0.0, vr)
    w = v.hat().as_array() * (y.norm() / x.norm())
    K = critical_cone_Q(x, y)
    nk = cone_sets.normal_cone_of(K.representation, v.as_array())
    assert cone_sets.membership(graphical_derivative_NQ(x, y, v), w, MEMBER_TOL)
    assert not cone_sets.membership(nk, w, 1e-6)
    return y, v, w
