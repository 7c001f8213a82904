"""A small closed algebra of convex sets with decidable membership.

The leaves are the handful of convex cones (plus singletons) that the
second-order analysis of a Lorentz-cone constraint system produces:
the zero cone, the whole space, the cone itself and its negative,
halfspaces and hyperplanes through the origin, rays, finitely generated
cones, and singletons.  Nodes combine them by linear images, preimages,
Minkowski sums, intersections, and translations.

Membership is decided in closed form on leaves and by small structured
solves on nodes (nonnegative least squares for finitely generated cones,
accelerated projected gradient for images of the Lorentz cone, alternating
projections for Minkowski sums).  Trees outside the fragment produced by
this package raise :class:`UnsupportedSet` instead of guessing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space, orth
from scipy.optimize import nnls

from . import _lorentz

DEFAULT_TOL = 1e-8


class UnsupportedSet(Exception):
    """The set tree falls outside the supported decidable fragment."""


class NotMemberError(ValueError):
    """A point expected to belong to a set does not."""


def _vec(a) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    out.setflags(write=False)
    return out


def _mat(a) -> np.ndarray:
    out = np.asarray(a, dtype=float).copy()
    if out.ndim != 2:
        raise ValueError("expected a matrix")
    out.setflags(write=False)
    return out


def _scale(v: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(v)))


# ---------------------------------------------------------------------------
# the algebraic tree
# ---------------------------------------------------------------------------


class ConeSet:
    """Base class; every subclass knows its ambient dimension."""

    def dim(self) -> int:
        raise NotImplementedError

    def membership(self, v, tol: float = DEFAULT_TOL) -> bool:
        return membership(self, v, tol)

    def to_json(self) -> dict:
        return to_json(self)

    def __repr__(self) -> str:  # compact structural form, mostly for tests
        return _repr(self)


@dataclass(frozen=True, repr=False)
class Zero(ConeSet):
    n: int

    def dim(self):
        return self.n


@dataclass(frozen=True, repr=False)
class All(ConeSet):
    n: int

    def dim(self):
        return self.n


@dataclass(frozen=True, repr=False)
class Empty(ConeSet):
    n: int

    def dim(self):
        return self.n


@dataclass(frozen=True, repr=False)
class Soc(ConeSet):
    n: int  # ambient dimension m+1

    def dim(self):
        return self.n


@dataclass(frozen=True, repr=False)
class NegSoc(ConeSet):
    n: int

    def dim(self):
        return self.n


@dataclass(frozen=True, repr=False)
class Halfspace(ConeSet):
    """{v : <normal, v> <= 0}; the zero normal denotes the whole space."""

    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normal", _vec(self.normal))

    def dim(self):
        return self.normal.size


@dataclass(frozen=True, repr=False)
class Hyperplane(ConeSet):
    """{v : <normal, v> = 0}."""

    normal: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "normal", _vec(self.normal))

    def dim(self):
        return self.normal.size


@dataclass(frozen=True, repr=False)
class Ray(ConeSet):
    """{t * direction : t >= 0}; zero direction normalizes to Zero."""

    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "direction", _vec(self.direction))

    def dim(self):
        return self.direction.size


@dataclass(frozen=True, repr=False)
class FinitelyGenerated(ConeSet):
    """Nonnegative combinations of the columns of ``generators``."""

    generators: np.ndarray  # (n, k)

    def __post_init__(self):
        object.__setattr__(self, "generators", _mat(self.generators))

    def dim(self):
        return self.generators.shape[0]


@dataclass(frozen=True, repr=False)
class Singleton(ConeSet):
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _vec(self.point))

    def dim(self):
        return self.point.size


@dataclass(frozen=True, repr=False)
class LinearImage(ConeSet):
    """{M c : c in child}; M maps child dim to row dim."""

    matrix: np.ndarray
    child: ConeSet

    def __post_init__(self):
        object.__setattr__(self, "matrix", _mat(self.matrix))
        if self.matrix.shape[1] != self.child.dim():
            raise ValueError("linear image: matrix columns must match child dimension")

    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, repr=False)
class Preimage(ConeSet):
    """{v : M v in child}; decidable membership by construction."""

    matrix: np.ndarray
    child: ConeSet

    def __post_init__(self):
        object.__setattr__(self, "matrix", _mat(self.matrix))
        if self.matrix.shape[0] != self.child.dim():
            raise ValueError("preimage: matrix rows must match child dimension")

    def dim(self):
        return self.matrix.shape[1]


@dataclass(frozen=True, repr=False)
class Sum(ConeSet):
    left: ConeSet
    right: ConeSet

    def __post_init__(self):
        if self.left.dim() != self.right.dim():
            raise ValueError("sum: mismatched ambient dimensions")

    def dim(self):
        return self.left.dim()


@dataclass(frozen=True, repr=False)
class Intersect(ConeSet):
    left: ConeSet
    right: ConeSet

    def __post_init__(self):
        if self.left.dim() != self.right.dim():
            raise ValueError("intersect: mismatched ambient dimensions")

    def dim(self):
        return self.left.dim()


@dataclass(frozen=True, repr=False)
class Translate(ConeSet):
    point: np.ndarray
    child: ConeSet

    def __post_init__(self):
        object.__setattr__(self, "point", _vec(self.point))
        if self.point.size != self.child.dim():
            raise ValueError("translate: mismatched ambient dimensions")

    def dim(self):
        return self.point.size


# convenience constructors used throughout the package
def zero(n: int) -> ConeSet:
    return Zero(n)


def all_space(n: int) -> ConeSet:
    return All(n)


def soc(n: int) -> ConeSet:
    return Soc(n)


def neg_soc(n: int) -> ConeSet:
    return NegSoc(n)


def halfspace(a) -> ConeSet:
    return simplify(Halfspace(a))


def hyperplane(a) -> ConeSet:
    return simplify(Hyperplane(a))


def ray(d) -> ConeSet:
    return simplify(Ray(d))


def span(vectors) -> ConeSet:
    """The linear span of the given vectors as a finitely generated cone."""
    V = np.atleast_2d(np.asarray(vectors, dtype=float))
    B = orth(V.T)
    if B.size == 0:
        return Zero(V.shape[1])
    return FinitelyGenerated(np.hstack([B, -B]))


def _repr(s: ConeSet) -> str:
    if isinstance(s, Zero):
        return f"Zero({s.n})"
    if isinstance(s, All):
        return f"All({s.n})"
    if isinstance(s, Empty):
        return f"Empty({s.n})"
    if isinstance(s, Soc):
        return f"Soc({s.n})"
    if isinstance(s, NegSoc):
        return f"NegSoc({s.n})"
    if isinstance(s, Halfspace):
        return f"Halfspace({np.array2string(s.normal, precision=6)})"
    if isinstance(s, Hyperplane):
        return f"Hyperplane({np.array2string(s.normal, precision=6)})"
    if isinstance(s, Ray):
        return f"Ray({np.array2string(s.direction, precision=6)})"
    if isinstance(s, FinitelyGenerated):
        return f"FinitelyGenerated(k={s.generators.shape[1]})"
    if isinstance(s, Singleton):
        return f"Singleton({np.array2string(s.point, precision=6)})"
    if isinstance(s, LinearImage):
        return f"LinearImage({s.matrix.shape}, {_repr(s.child)})"
    if isinstance(s, Preimage):
        return f"Preimage({s.matrix.shape}, {_repr(s.child)})"
    if isinstance(s, Sum):
        return f"Sum({_repr(s.left)}, {_repr(s.right)})"
    if isinstance(s, Intersect):
        return f"Intersect({_repr(s.left)}, {_repr(s.right)})"
    if isinstance(s, Translate):
        return f"Translate({np.array2string(s.point, precision=6)}, {_repr(s.child)})"
    return object.__repr__(s)


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------

_LEAF_TOL = 1e-12


def _soc_slice(n: int, a: np.ndarray, negative: bool) -> ConeSet | None:
    """Simplify (+-Q) intersect {a}^perp when the normal sits in +-Q.

    Q cap {a}^perp is {0} for a interior to either cone, the full cone for
    a = 0, and a single extreme ray when a is a nonzero boundary point:
    the ray through hat(a) for a in -Q, through (a0, -ar) for a in Q.
    """
    na = float(np.linalg.norm(a))
    if na <= _LEAF_TOL:
        return NegSoc(n) if negative else Soc(n)
    m = _lorentz.soc_margin(a)
    mneg = _lorentz.soc_margin(-a)
    btol = 1e-12 * max(1.0, na)
    if m > btol or mneg > btol:  # interior of Q or of -Q
        return Zero(n)
    if abs(mneg) <= btol:  # a on bd(-Q)\{0}
        r = _lorentz.hat(a)
    elif abs(m) <= btol:  # a on bd(Q)\{0}
        r = -_lorentz.hat(a)
    else:
        return None  # normal outside both cones: keep the node
    if negative:
        r = -r
    return simplify(Ray(r))


def simplify(s: ConeSet) -> ConeSet:
    """Structurally simplify a tree; idempotent, never changes the set."""
    if isinstance(s, (Zero, All, Empty, Soc, NegSoc)):
        return s
    if isinstance(s, Singleton):
        if float(np.linalg.norm(s.point)) <= _LEAF_TOL:
            return Zero(s.point.size)
        return s
    if isinstance(s, Halfspace):
        if float(np.linalg.norm(s.normal)) <= _LEAF_TOL:
            return All(s.normal.size)
        return s
    if isinstance(s, Hyperplane):
        if float(np.linalg.norm(s.normal)) <= _LEAF_TOL:
            return All(s.normal.size)
        return s
    if isinstance(s, Ray):
        if float(np.linalg.norm(s.direction)) <= _LEAF_TOL:
            return Zero(s.direction.size)
        return s
    if isinstance(s, FinitelyGenerated):
        G = s.generators
        keep = [j for j in range(G.shape[1]) if np.linalg.norm(G[:, j]) > _LEAF_TOL]
        if not keep:
            return Zero(G.shape[0])
        if len(keep) == 1:
            return Ray(G[:, keep[0]])
        if len(keep) != G.shape[1]:
            return FinitelyGenerated(G[:, keep])
        return s
    if isinstance(s, Translate):
        child = simplify(s.child)
        if float(np.linalg.norm(s.point)) <= _LEAF_TOL:
            return child
        if isinstance(child, Singleton):
            return Singleton(s.point + child.point)
        if isinstance(child, Zero):
            return Singleton(s.point)
        if isinstance(child, Empty):
            return child
        if isinstance(child, Translate):
            return simplify(Translate(s.point + child.point, child.child))
        if isinstance(child, All):
            return child
        return Translate(s.point, child)
    if isinstance(s, LinearImage):
        child = simplify(s.child)
        M = s.matrix
        n = M.shape[0]
        if np.linalg.norm(M) <= _LEAF_TOL or isinstance(child, Zero):
            return Zero(n)
        if isinstance(child, Empty):
            return Empty(n)
        if isinstance(child, Singleton):
            return Singleton(M @ child.point)
        if isinstance(child, Ray):
            return simplify(Ray(M @ child.direction))
        if isinstance(child, FinitelyGenerated):
            return simplify(FinitelyGenerated(M @ child.generators))
        if isinstance(child, All):
            B = orth(M)
            if B.shape[1] == n:
                return All(n)
            return FinitelyGenerated(np.hstack([B, -B]))
        if isinstance(child, Hyperplane):
            B = null_space(child.normal.reshape(1, -1))
            return simplify(LinearImage(M @ B, All(B.shape[1])))
        if isinstance(child, Halfspace):
            a = child.normal
            K = null_space(M)
            if K.size and float(np.linalg.norm(K.T @ a)) > 1e-12 * float(np.linalg.norm(a)):
                # the kernel escapes the halfspace, so the image is the full range
                return simplify(LinearImage(M, All(M.shape[1])))
            pin = np.linalg.pinv(M)
            rng_set = simplify(LinearImage(M, All(M.shape[1])))
            return simplify(Intersect(rng_set, Halfspace(pin.T @ a)))
        if isinstance(child, Translate):
            return simplify(Translate(M @ child.point, LinearImage(M, child.child)))
        return LinearImage(M, child)
    if isinstance(s, Preimage):
        child = simplify(s.child)
        M = s.matrix
        n = M.shape[1]
        if isinstance(child, All):
            return All(n)
        if isinstance(child, Empty):
            return Empty(n)
        if isinstance(child, Zero):
            K = null_space(M)
            if K.size == 0:
                return Zero(n)
            return FinitelyGenerated(np.hstack([K, -K]))
        if isinstance(child, Halfspace):
            return simplify(Halfspace(M.T @ child.normal))
        if isinstance(child, Hyperplane):
            return simplify(Hyperplane(M.T @ child.normal))
        if isinstance(child, Singleton):
            u0, *_ = np.linalg.lstsq(M, child.point, rcond=None)
            if np.linalg.norm(M @ u0 - child.point) > 1e-10 * _scale(child.point):
                return Empty(n)
            K = null_space(M)
            flat: ConeSet = Zero(n) if K.size == 0 else FinitelyGenerated(np.hstack([K, -K]))
            return simplify(Translate(u0, flat))
        if np.linalg.matrix_rank(M, tol=1e-12 * max(1.0, float(np.linalg.norm(M)))) == 1:
            # rank-one map into a cone: the preimage is the whole space, a
            # halfspace, or a hyperplane depending on which signs of the
            # image direction lie in the child
            try:
                if membership(child, np.zeros(M.shape[0]), 1e-12):
                    U, sv, Vt = np.linalg.svd(M)
                    gdir = sv[0] * U[:, 0]
                    u = Vt[0]
                    plus = membership(child, gdir, 1e-12)
                    minus = membership(child, -gdir, 1e-12)
                    if plus and minus:
                        return All(n)
                    if plus:
                        return Halfspace(-u)
                    if minus:
                        return Halfspace(u)
                    return Hyperplane(u)
            except UnsupportedSet:
                pass
        return Preimage(M, child)
    if isinstance(s, Sum):
        a, b = simplify(s.left), simplify(s.right)
        if isinstance(a, Empty) or isinstance(b, Empty):
            return Empty(s.dim())
        if isinstance(a, All) or isinstance(b, All):
            return All(s.dim())
        if isinstance(a, Zero):
            return b
        if isinstance(b, Zero):
            return a
        if isinstance(a, Singleton):
            return simplify(Translate(a.point, b))
        if isinstance(b, Singleton):
            return simplify(Translate(b.point, a))
        gens_a = _as_generators(a)
        gens_b = _as_generators(b)
        if gens_a is not None and gens_b is not None:
            return simplify(FinitelyGenerated(np.hstack([gens_a, gens_b])))
        return Sum(a, b)
    if isinstance(s, Intersect):
        a, b = simplify(s.left), simplify(s.right)
        if isinstance(a, Empty) or isinstance(b, Empty):
            return Empty(s.dim())
        if isinstance(a, All):
            return b
        if isinstance(b, All):
            return a
        if isinstance(a, Zero):
            a, b = b, a
        if isinstance(b, Zero):
            z = np.zeros(s.dim())
            return b if membership(a, z, 1e-10) else Empty(s.dim())
        if isinstance(a, Hyperplane) and isinstance(b, (Soc, NegSoc)):
            a, b = b, a
        if isinstance(a, (Soc, NegSoc)) and isinstance(b, Hyperplane):
            out = _soc_slice(s.dim(), b.normal, isinstance(a, NegSoc))
            if out is not None:
                return out
        if isinstance(a, Hyperplane) and isinstance(b, Halfspace):
            a, b = b, a
        if isinstance(a, Halfspace) and isinstance(b, Hyperplane):
            na, nb = a.normal, b.normal
            cross = na / np.linalg.norm(na) - nb / np.linalg.norm(nb) * np.sign(nb @ na)
            if np.linalg.norm(cross) <= 1e-12 and abs(nb @ na) > 0:
                return b
        if isinstance(a, Hyperplane) and isinstance(b, Hyperplane):
            na, nb = a.normal, b.normal
            c = abs(na @ nb) / (np.linalg.norm(na) * np.linalg.norm(nb))
            if abs(c - 1.0) <= 1e-12:
                return a
        if isinstance(a, (Hyperplane, Halfspace)) and isinstance(b, (FinitelyGenerated, Ray)):
            a, b = b, a
        if isinstance(a, (FinitelyGenerated, Ray)) and isinstance(b, (Hyperplane, Halfspace)):
            gens = _as_generators(a)
            na = b.normal / np.linalg.norm(b.normal)
            prods = gens.T @ na
            scale = np.maximum(1.0, np.linalg.norm(gens, axis=0))
            if isinstance(b, Hyperplane) and np.all(np.abs(prods) <= 1e-12 * scale):
                return a  # the generated cone already lies in the hyperplane
            if isinstance(b, Halfspace) and np.all(prods <= 1e-12 * scale):
                return a
            if isinstance(b, Halfspace) and gens.shape[1] > 1 and \
                    all(membership(a, -gens[:, j], 1e-12) for j in range(gens.shape[1])):
                # linear span sliced by a halfspace: polyhedral closed form
                B = orth(gens)
                b_s = B @ (B.T @ na)
                if np.linalg.norm(b_s) <= 1e-12:
                    return a
                B0 = null_space(np.vstack([_complement_rows(B), b_s.reshape(1, -1)]))
                cols = [B0, -B0] if B0.size else []
                cols.append((-b_s / np.linalg.norm(b_s)).reshape(-1, 1))
                return simplify(FinitelyGenerated(np.hstack(cols)))
        if isinstance(a, Ray) and not isinstance(b, Ray):
            a, b = b, a
        if isinstance(b, Ray) and not isinstance(a, (Translate, Preimage, LinearImage, Sum)):
            # for a cone C: Ray(d) cap C is the ray if d lies in C, else {0}
            return b if membership(a, b.direction, 1e-10) else Zero(s.dim())
        return Intersect(a, b)
    raise UnsupportedSet(f"cannot simplify {type(s).__name__}")


def _as_generators(s: ConeSet) -> np.ndarray | None:
    if isinstance(s, Ray):
        return s.direction.reshape(-1, 1)
    if isinstance(s, FinitelyGenerated):
        return s.generators
    return None


def _complement_rows(B: np.ndarray) -> np.ndarray:
    """Rows spanning the orthogonal complement of range(B) (possibly empty)."""
    C = null_space(B.T)
    if C.size == 0:
        return np.zeros((0, B.shape[0]))
    return C.T


def _fg_span_basis(s: FinitelyGenerated) -> np.ndarray | None:
    """Orthonormal basis when the generated cone is a linear span, else None.

    Decided once per instance (every negated generator must be a
    nonnegative combination) and cached; span projections then avoid the
    active-set solve entirely.
    """
    cached = getattr(s, "_span_basis", "unset")
    if not isinstance(cached, str):
        return cached
    G = s.generators
    out: np.ndarray | None = orth(G)
    for j in range(G.shape[1]):
        _, resid = nnls(G, -G[:, j], maxiter=max(100 * G.shape[1], 300))
        if resid > 1e-10 * max(1.0, float(np.linalg.norm(G[:, j]))):
            out = None
            break
    object.__setattr__(s, "_span_basis", out)
    return out


# ---------------------------------------------------------------------------
# projections (exact on leaves, iterative on supported nodes)
# ---------------------------------------------------------------------------


def project(s: ConeSet, v, tol: float = 1e-12) -> np.ndarray:
    """Euclidean projection of v onto the set; may be iterative on nodes."""
    v = np.asarray(v, dtype=float)
    s = simplify(s)
    if isinstance(s, Zero):
        return np.zeros_like(v)
    if isinstance(s, All):
        return v.copy()
    if isinstance(s, Empty):
        raise UnsupportedSet("projection onto the empty set")
    if isinstance(s, Soc):
        return _lorentz.project_soc(v)
    if isinstance(s, NegSoc):
        return _lorentz.project_neg_soc(v)
    if isinstance(s, Halfspace):
        a = s.normal
        t = float(a @ v)
        if t <= 0:
            return v.copy()
        return v - (t / float(a @ a)) * a
    if isinstance(s, Hyperplane):
        a = s.normal
        return v - (float(a @ v) / float(a @ a)) * a
    if isinstance(s, Ray):
        d = s.direction
        t = max(0.0, float(v @ d) / float(d @ d))
        return t * d
    if isinstance(s, Singleton):
        return s.point.copy()
    if isinstance(s, FinitelyGenerated):
        B = _fg_span_basis(s)
        if B is not None:
            return B @ (B.T @ v)
        coef, _ = nnls(s.generators, v, maxiter=max(100 * s.generators.shape[1], 300))
        return s.generators @ coef
    if isinstance(s, Translate):
        return s.point + project(s.child, v - s.point, tol)
    if isinstance(s, Intersect):
        return _project_dykstra(s, v, tol)
    if isinstance(s, LinearImage):
        c = _best_preimage(s.matrix, s.child, v, tol)
        return s.matrix @ c
    raise UnsupportedSet(f"projection onto {type(s).__name__} is not supported")


def _project_dykstra(s: Intersect, v: np.ndarray, tol: float, max_iter: int = 2000) -> np.ndarray:
    x = v.copy()
    p = np.zeros_like(v)
    q = np.zeros_like(v)
    for _ in range(max_iter):
        y = project(s.left, x + p, tol)
        p = x + p - y
        x_new = project(s.right, y + q, tol)
        q = y + q - x_new
        if np.linalg.norm(x_new - x) <= tol * _scale(v):
            x = x_new
            break
        x = x_new
    return x


def _best_preimage(M: np.ndarray, child: ConeSet, v: np.ndarray, tol: float) -> np.ndarray:
    """argmin_{c in child} ||M c - v|| for the structured children we build."""
    child = simplify(child)
    if isinstance(child, Zero):
        return np.zeros(M.shape[1])
    if isinstance(child, Singleton):
        return child.point.copy()
    if isinstance(child, All):
        c, *_ = np.linalg.lstsq(M, v, rcond=None)
        return c
    if isinstance(child, Ray):
        w = M @ child.direction
        nw2 = float(w @ w)
        if nw2 <= _LEAF_TOL:
            return np.zeros(M.shape[1])
        t = max(0.0, float(v @ w) / nw2)
        return t * child.direction
    if isinstance(child, FinitelyGenerated):
        A = M @ child.generators
        coef, _ = nnls(A, v, maxiter=max(100 * A.shape[1], 300))
        return child.generators @ coef
    if isinstance(child, Hyperplane):
        B = null_space(child.normal.reshape(1, -1))
        c, *_ = np.linalg.lstsq(M @ B, v, rcond=None)
        return B @ c
    if isinstance(child, Translate):
        base = child.point
        inner = _best_preimage(M, child.child, v - M @ base, tol)
        return base + inner
    # general convex child with a computable projection: FISTA
    return _fista_preimage(M, child, v, tol)


def _fista_preimage(M: np.ndarray, child: ConeSet, v: np.ndarray, tol: float,
                    max_iter: int = 4000) -> np.ndarray:
    L = float(np.linalg.norm(M, 2)) ** 2
    if L <= _LEAF_TOL:
        return np.zeros(M.shape[1])
    c = project(child, np.linalg.lstsq(M, v, rcond=None)[0], tol)
    y = c.copy()
    t_k = 1.0
    f_prev = np.inf
    for _ in range(max_iter):
        grad = M.T @ (M @ y - v)
        c_new = project(child, y - grad / L, tol)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_k * t_k))
        y = c_new + ((t_k - 1.0) / t_new) * (c_new - c)
        c, t_k = c_new, t_new
        f = float(np.linalg.norm(M @ c - v))
        if abs(f_prev - f) <= 1e-14 * max(1.0, f):
            break
        f_prev = f
    return c


def distance(s: ConeSet, v, tol: float = 1e-12) -> float:
    s = simplify(s)
    v = np.asarray(v, dtype=float)
    if isinstance(s, Sum):
        _, _, gap = _sum_closest(s, v, tol)
        return gap
    if isinstance(s, Preimage):
        raise UnsupportedSet("distance to a preimage node is not supported")
    return float(np.linalg.norm(project(s, v, tol) - v))


def _sum_closest(s: Sum, v: np.ndarray, tol: float,
                 max_iter: int = 3000) -> tuple[np.ndarray, np.ndarray, float]:
    """Alternating projections to the pair (A, v - B); returns (a, b, gap)."""
    a = project(s.left, v, tol)
    b = project(s.right, v - a, tol)
    gap = float(np.linalg.norm(v - a - b))
    for _ in range(max_iter):
        a = project(s.left, v - b, tol)
        b = project(s.right, v - a, tol)
        new_gap = float(np.linalg.norm(v - a - b))
        if abs(gap - new_gap) <= 1e-15 * max(1.0, new_gap) or new_gap <= tol:
            gap = new_gap
            break
        gap = new_gap
    return a, b, gap


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------


def membership(s: ConeSet, v, tol: float = DEFAULT_TOL) -> bool:
    """Decide v in S with residual tolerance tol * max(1, ||v||)."""
    v = np.asarray(v, dtype=float)
    s = simplify(s)
    if v.size != s.dim():
        raise ValueError(f"dimension mismatch: point has {v.size}, set has {s.dim()}")
    eps = tol * _scale(v)
    if isinstance(s, Empty):
        return False
    if isinstance(s, All):
        return True
    if isinstance(s, Zero):
        return float(np.linalg.norm(v)) <= eps
    if isinstance(s, Soc):
        return _lorentz.soc_margin(v) >= -eps
    if isinstance(s, NegSoc):
        return _lorentz.soc_margin(-v) >= -eps
    if isinstance(s, Halfspace):
        a = s.normal
        return float(a @ v) <= eps * float(np.linalg.norm(a))
    if isinstance(s, Hyperplane):
        a = s.normal
        return abs(float(a @ v)) <= eps * float(np.linalg.norm(a))
    if isinstance(s, Translate):
        return membership(s.child, v - s.point, tol)
    if isinstance(s, (Ray, Singleton, FinitelyGenerated)):
        return float(np.linalg.norm(project(s, v) - v)) <= eps
    if isinstance(s, Intersect):
        return membership(s.left, v, tol) and membership(s.right, v, tol)
    if isinstance(s, Preimage):
        return membership(s.child, s.matrix @ v, tol)
    if isinstance(s, LinearImage):
        c = _best_preimage(s.matrix, s.child, v, min(tol, 1e-10))
        return float(np.linalg.norm(s.matrix @ c - v)) <= eps
    if isinstance(s, Sum):
        _, _, gap = _sum_closest(s, v, min(tol, 1e-10))
        return gap <= eps
    raise UnsupportedSet(f"membership on {type(s).__name__} is not supported")


# ---------------------------------------------------------------------------
# polarity and normal cones
# ---------------------------------------------------------------------------


def polar(s: ConeSet) -> ConeSet:
    """Polar cone S* = {w : <w, s> <= 0 for all s in S}.

    Exact on leaves and on sums, linear images, and preimages; for
    intersections it returns the sum of the polars, which is exact for
    every tree this package constructs (one factor is always polyhedral).
    """
    s = simplify(s)
    n = s.dim()
    if isinstance(s, Zero):
        return All(n)
    if isinstance(s, All):
        return Zero(n)
    if isinstance(s, Soc):
        return NegSoc(n)
    if isinstance(s, NegSoc):
        return Soc(n)
    if isinstance(s, Halfspace):
        return Ray(s.normal)
    if isinstance(s, Hyperplane):
        return FinitelyGenerated(np.column_stack([s.normal, -s.normal]))
    if isinstance(s, Ray):
        return Halfspace(s.direction)
    if isinstance(s, FinitelyGenerated):
        G = s.generators
        out: ConeSet = All(n)
        for j in range(G.shape[1]):
            out = Intersect(out, Halfspace(G[:, j]))
        return simplify(out)
    if isinstance(s, Singleton):
        if float(np.linalg.norm(s.point)) <= _LEAF_TOL:
            return All(n)
        raise UnsupportedSet("polar of a set that is not a cone")
    if isinstance(s, Sum):
        return simplify(Intersect(polar(s.left), polar(s.right)))
    if isinstance(s, Intersect):
        return simplify(Sum(polar(s.left), polar(s.right)))
    if isinstance(s, LinearImage):
        return simplify(Preimage(s.matrix.T, polar(s.child)))
    if isinstance(s, Preimage):
        return simplify(LinearImage(s.matrix.T, polar(s.child)))
    if isinstance(s, Translate):
        raise UnsupportedSet("polar of a translated set")
    raise UnsupportedSet(f"polar of {type(s).__name__}")


def normal_cone_of(s: ConeSet, v, tol: float = DEFAULT_TOL) -> ConeSet:
    """Normal cone N_S(v) = S* cap {v}^perp for a convex cone S containing v."""
    v = np.asarray(v, dtype=float)
    s = simplify(s)
    if not membership(s, v, tol):
        raise NotMemberError(f"point {v} is not in the set")
    n = s.dim()
    nv = float(np.linalg.norm(v))
    eps = tol * max(1.0, nv)
    if isinstance(s, All):
        return Zero(n)
    if isinstance(s, Zero):
        return All(n)
    if isinstance(s, Soc):
        return _normal_cone_soc(v, eps, negative=False)
    if isinstance(s, NegSoc):
        return _normal_cone_soc(v, eps, negative=True)
    if isinstance(s, Halfspace):
        a = s.normal
        if abs(float(a @ v)) <= eps * float(np.linalg.norm(a)):
            return Ray(a)
        return Zero(n)
    if isinstance(s, Hyperplane):
        return span([s.normal])
    if isinstance(s, Ray):
        d = s.direction
        if nv <= eps:
            return Halfspace(d)
        return Hyperplane(d)
    if isinstance(s, Translate):
        return normal_cone_of(s.child, v - s.point, tol)
    if isinstance(s, Preimage):
        inner = normal_cone_of(s.child, s.matrix @ v, tol)
        return simplify(LinearImage(s.matrix.T, inner))
    # generic convex cone in the fragment
    return simplify(Intersect(polar(s), Hyperplane(v)))


def _normal_cone_soc(v: np.ndarray, eps: float, negative: bool) -> ConeSet:
    w = -v if negative else v
    n = v.size
    if float(np.linalg.norm(w)) <= eps:
        return Soc(n) if negative else NegSoc(n)
    if _lorentz.soc_margin(w) > eps:
        return Zero(n)
    r = _lorentz.hat(w)
    return simplify(Ray(-r if negative else r))


# ---------------------------------------------------------------------------
# sampling and probabilistic set equality
# ---------------------------------------------------------------------------


def sample(s: ConeSet, rng: np.random.Generator, count: int) -> list[np.ndarray]:
    """Generate points of the set, mixing interior, boundary, and 0 where apt."""
    s = simplify(s)
    n = s.dim()
    if isinstance(s, Empty):
        return []
    if isinstance(s, Zero):
        return [np.zeros(n)] * min(count, 1)
    if isinstance(s, Singleton):
        return [s.point.copy()]
    out: list[np.ndarray] = []
    try:
        if membership(s, np.zeros(n), 1e-10):
            out.append(np.zeros(n))
    except UnsupportedSet:
        pass
    while len(out) < count:
        out.append(_sample_one(s, rng))
    return out[:count]


def _sample_one(s: ConeSet, rng: np.random.Generator) -> np.ndarray:
    n = s.dim()
    if isinstance(s, All):
        return rng.standard_normal(n)
    if isinstance(s, Zero):
        return np.zeros(n)
    if isinstance(s, Singleton):
        return s.point.copy()
    if isinstance(s, Soc):
        xr = rng.standard_normal(n - 1)
        nr = float(np.linalg.norm(xr))
        f = rng.choice([1.0, 1.0 + abs(rng.standard_normal())])
        return np.concatenate([[nr * f], xr]) * abs(rng.standard_normal() + 0.5)
    if isinstance(s, NegSoc):
        return -_sample_one(Soc(n), rng)
    if isinstance(s, Halfspace):
        g = rng.standard_normal(n)
        a = s.normal
        t = float(a @ g)
        if t > 0:
            off = 0.0 if rng.random() < 0.3 else abs(rng.standard_normal())
            g = g - ((t + off) / float(a @ a)) * a
        return g
    if isinstance(s, Hyperplane):
        g = rng.standard_normal(n)
        a = s.normal
        return g - (float(a @ g) / float(a @ a)) * a
    if isinstance(s, Ray):
        return abs(rng.standard_normal()) * s.direction
    if isinstance(s, FinitelyGenerated):
        k = s.generators.shape[1]
        coef = np.abs(rng.standard_normal(k)) * (rng.random(k) < 0.7)
        return s.generators @ coef
    if isinstance(s, Translate):
        return s.point + _sample_one(s.child, rng)
    if isinstance(s, LinearImage):
        return s.matrix @ _sample_one(s.child, rng)
    if isinstance(s, Sum):
        return _sample_one(s.left, rng) + _sample_one(s.right, rng)
    if isinstance(s, Intersect):
        for _ in range(200):
            cand = _sample_one(s.left, rng)
            if membership(s.right, cand, DEFAULT_TOL):
                return cand
            cand = project(s, cand) if _projectable(s) else None
            if cand is not None and membership(s, cand, 1e-6):
                return cand
        return np.zeros(n)
    if isinstance(s, Preimage):
        child = simplify(s.child)
        if isinstance(child, Zero):
            K = null_space(s.matrix)
            if K.size == 0:
                return np.zeros(n)
            return K @ rng.standard_normal(K.shape[1])
        if isinstance(child, Ray):
            u, *_ = np.linalg.lstsq(s.matrix, child.direction, rcond=None)
            if np.linalg.norm(s.matrix @ u - child.direction) <= 1e-9:
                K = null_space(s.matrix)
                w = K @ rng.standard_normal(K.shape[1]) if K.size else 0.0
                return abs(rng.standard_normal()) * u + w
        for _ in range(400):
            cand = rng.standard_normal(n) * abs(rng.standard_normal() + 0.5)
            if membership(s, cand, DEFAULT_TOL):
                return cand
        return np.zeros(n)
    raise UnsupportedSet(f"sampling from {type(s).__name__}")


def _projectable(s: ConeSet) -> bool:
    try:
        project(s, np.zeros(s.dim()))
        return True
    except UnsupportedSet:
        return False


def _structural_equal(a: ConeSet, b: ConeSet, tol: float = 1e-10) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, (Zero, All, Empty, Soc, NegSoc)):
        return a.dim() == b.dim()
    if isinstance(a, (Halfspace, Hyperplane)):
        na, nb = a.normal, b.normal
        na = na / np.linalg.norm(na)
        nb = nb / np.linalg.norm(nb)
        if isinstance(a, Hyperplane):
            return min(np.linalg.norm(na - nb), np.linalg.norm(na + nb)) <= tol
        return bool(np.linalg.norm(na - nb) <= tol)
    if isinstance(a, Ray):
        da = a.direction / np.linalg.norm(a.direction)
        db = b.direction / np.linalg.norm(b.direction)
        return bool(np.linalg.norm(da - db) <= tol)
    if isinstance(a, Singleton):
        return bool(np.linalg.norm(a.point - b.point) <= tol)
    return False


def equal_sets(a: ConeSet, b: ConeSet, samples: int = 60, tol: float = 1e-6,
               seed: int = 0) -> bool:
    """Probabilistic set equality: structural when both simplify to equal
    leaves, otherwise mutual membership of generated points plus random
    probes tested against both sets."""
    a, b = simplify(a), simplify(b)
    if a.dim() != b.dim():
        raise ValueError("equal_sets: mismatched ambient dimensions")
    if _structural_equal(a, b):
        return True
    rng = np.random.default_rng(seed)
    for p in sample(a, rng, samples):
        if not membership(b, p, tol):
            return False
    for p in sample(b, rng, samples):
        if not membership(a, p, tol):
            return False
    n = a.dim()
    for _ in range(samples):
        probe = rng.standard_normal(n) * (10.0 ** rng.integers(-2, 2))
        if membership(a, probe, tol) != membership(b, probe, tol):
            return False
    return True


# ---------------------------------------------------------------------------
# canonical JSON form (tagged union, stable field names)
# ---------------------------------------------------------------------------


def to_json(s: ConeSet) -> dict:
    if isinstance(s, Zero):
        return {"set": "zero", "dim": s.n}
    if isinstance(s, All):
        return {"set": "all", "dim": s.n}
    if isinstance(s, Empty):
        return {"set": "empty", "dim": s.n}
    if isinstance(s, Soc):
        return {"set": "soc", "dim": s.n}
    if isinstance(s, NegSoc):
        return {"set": "neg_soc", "dim": s.n}
    if isinstance(s, Halfspace):
        return {"set": "halfspace", "normal": s.normal.tolist()}
    if isinstance(s, Hyperplane):
        return {"set": "hyperplane", "normal": s.normal.tolist()}
    if isinstance(s, Ray):
        return {"set": "ray", "direction": s.direction.tolist()}
    if isinstance(s, FinitelyGenerated):
        return {"set": "finitely_generated", "generators": s.generators.T.tolist()}
    if isinstance(s, Singleton):
        return {"set": "singleton", "point": s.point.tolist()}
    if isinstance(s, LinearImage):
        return {"set": "linear_image", "matrix": s.matrix.tolist(), "child": to_json(s.child)}
    if isinstance(s, Preimage):
        return {"set": "preimage", "matrix": s.matrix.tolist(), "child": to_json(s.child)}
    if isinstance(s, Sum):
        return {"set": "sum", "left": to_json(s.left), "right": to_json(s.right)}
    if isinstance(s, Intersect):
        return {"set": "intersect", "left": to_json(s.left), "right": to_json(s.right)}
    if isinstance(s, Translate):
        return {"set": "translate", "point": s.point.tolist(), "child": to_json(s.child)}
    raise UnsupportedSet(f"serialization of {type(s).__name__}")
