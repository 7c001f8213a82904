"""Graphical derivative of the normal-cone map of the constraint set.

For a stationary pair (x, xstar) of Gamma = {x : Phi(x) in Q} under metric
subregularity, a pair (v, v*) is tangent to the graph of N_Gamma exactly
when v is critical and

    v* in (Hess<lam,Phi>(x) + curvature(x;lam)) v + N_K(v)

for some lam among the argmin multipliers of the direction-v linear cone
program.  This module assembles that set, the membership predicate for
tangent pairs, the closed form at xstar = 0, and a numerical tangent
sampler used to cross-validate the formula.

Metric subregularity is asserted, never proven: results carry an explicit
``mscq_verified`` flag so formal values are labelled as such downstream.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import cone_sets, conic_lp, constraint_system, soc_geometry
from .cone_sets import ConeSet, Empty, LinearImage, Sum, Translate, simplify
from .conic_lp import ArgminSet, LpOutcome, LpStatus
from .constraint_system import StationaryPair
from .oracles import SmoothMapOracle
from .soc_geometry import SocVector


@dataclass(frozen=True)
class GraphDerivativeResult:
    direction: np.ndarray
    critical: bool
    argmin_multipliers: LpOutcome | None
    affine_part: ConeSet
    normal_part: ConeSet
    full_set: ConeSet
    mscq_verified: bool = False
    kappa: float | None = None
    ball_caveat: str | None = None
    # the argmin description after intersection with the multiplier ball
    admissible_multipliers: ArgminSet | None = None

    def contains(self, w, tol: float = 1e-8) -> bool:
        return cone_sets.membership(self.full_set, w, tol)

    def to_json(self) -> dict:
        out = {
            "direction": np.asarray(self.direction).tolist(),
            "critical": self.critical,
            "affine_part": cone_sets.to_json(self.affine_part),
            "normal_part": cone_sets.to_json(self.normal_part),
            "full_set": cone_sets.to_json(self.full_set),
            "mscq_verified": self.mscq_verified,
        }
        if self.argmin_multipliers is not None:
            out["lp_status"] = self.argmin_multipliers.status.value
            out["lp_value"] = self.argmin_multipliers.value
        if self.kappa is not None:
            out["kappa"] = self.kappa
        if self.ball_caveat is not None:
            out["ball_caveat"] = self.ball_caveat
        return out


def _second_order_map(phi: SmoothMapOracle, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix T with T lam = (Hess<lam,Phi>(x) + curvature(x;lam)) v;
    linear in lam, so the columns are the unit-multiplier images."""
    d = phi.d
    cols = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        cols.append(constraint_system.second_order_matrix(phi, x, e) @ v)
    return np.column_stack(cols)


class _PairEvaluator:
    """Per-pair precomputation so that direction sweeps stay cheap.

    Everything that does not depend on the direction (Jacobian, Hessian
    tensor, curvature correction, multiplier classification, cone leaves)
    is computed once; the per-direction work is a cached cone LP, a small
    cone assembly memoized on the direction of J v, and membership tests.
    """

    def __init__(self, phi: SmoothMapOracle, pair: StationaryPair):
        self.phi = phi
        self.pair = pair
        self.x = np.asarray(pair.x, dtype=float)
        self.xstar = np.asarray(pair.xstar, dtype=float)
        self.n = self.x.size
        self.val = SocVector.from_array(phi.value(self.x))
        self.cls = soc_geometry.classify(self.val)
        self.J = phi.jacobian(self.x)
        self.G = self.J.T
        self.H = phi.hessian(self.x)
        self.d = self.J.shape[0]
        self.boundary = self.cls is soc_geometry.PointClass.BOUNDARY_NONZERO
        if self.boundary:
            Jhat = self.J.copy()
            Jhat[0] = -Jhat[0]
            self.curv = -(Jhat.T @ self.J) / self.val.x0  # lam0 coefficient
        else:
            self.curv = None
        self.ncone = soc_geometry.normal_cone_Q(self.val)
        self.ms = constraint_system.validate_pair(phi, pair)
        self.lam_any = self.ms.a_multiplier()
        self._tangent_leaf = constraint_system._tangent_to_normal_leaf(
            self.ncone, self.lam_any, self.d)
        self._nk_cache: dict[bytes, ConeSet] = {}
        self._hatval = self.val.hat().as_array()

    def critical(self, v: np.ndarray, tol: float = 1e-9) -> bool:
        jv = self.J @ v
        if self.cls is soc_geometry.PointClass.ORIGIN:
            ok = float(np.linalg.norm(jv[1:])) <= jv[0] + tol * max(1.0, float(np.linalg.norm(jv)))
        elif self.boundary:
            ok = float(self._hatval @ jv) <= tol * max(1.0, float(np.linalg.norm(jv)))
        else:
            ok = True
        if not ok:
            return False
        return abs(float(self.xstar @ v)) <= tol * max(
            1.0, float(np.linalg.norm(self.xstar)) * float(np.linalg.norm(v)))

    def objective(self, v: np.ndarray) -> np.ndarray:
        c = -np.einsum("dij,i,j->d", self.H, v, v)
        scale = float(np.abs(self.H).max()) * float(v @ v)
        if self.boundary:
            c[0] += float(v @ self.curv @ v)
            scale = max(scale, float(np.abs(self.curv).max()) * float(v @ v))
        return conic_lp.clean_objective(c, scale)

    def lp(self, v: np.ndarray) -> LpOutcome:
        prog = conic_lp.SocLinearProgram(self.objective(v), self.G, self.xstar, self.ncone)
        return conic_lp.solve_cone_lp(prog)

    def second_map(self, v: np.ndarray) -> np.ndarray:
        T = np.einsum("dij,j->id", self.H, v)
        if self.boundary:
            T = T.copy()
            T[:, 0] += self.curv @ v
        return T

    def normal_to_critical(self, v: np.ndarray) -> ConeSet:
        jv = self.J @ v
        nrm = float(np.linalg.norm(jv))
        if nrm <= 1e-13:
            u = np.zeros_like(jv)
        else:
            u = jv / nrm
            for t in u:
                if abs(t) > 1e-12:
                    u = u * np.sign(t)
                    break
        key = np.round(u, 13).tobytes()
        hit = self._nk_cache.get(key)
        if hit is None:
            inner = simplify(cone_sets.Intersect(self._tangent_leaf,
                                                 cone_sets.Hyperplane(jv)))
            hit = simplify(LinearImage(self.G, inner))
            self._nk_cache[key] = hit
        return hit


_EVAL_CACHE: dict[tuple, _PairEvaluator] = {}


def _evaluator(phi: SmoothMapOracle, pair: StationaryPair) -> _PairEvaluator:
    key = (id(phi), np.round(pair.x, 14).tobytes(), np.round(pair.xstar, 14).tobytes())
    hit = _EVAL_CACHE.get(key)
    if hit is None or hit.phi is not phi:
        if len(_EVAL_CACHE) > 256:
            _EVAL_CACHE.clear()
        hit = _PairEvaluator(phi, pair)
        _EVAL_CACHE[key] = hit
    return hit


def _restrict_to_ball(argmin: ArgminSet, radius: float, tol: float = 1e-9):
    """Intersect the argmin description with the closed ball of the given
    radius; the neighborhood form of the formula guarantees this loses
    nothing when the modulus is genuine."""
    if argmin.kind == "empty":
        return argmin, None
    if argmin.kind == "singleton":
        if float(np.linalg.norm(argmin.point)) <= radius + tol:
            return argmin, None
        return ArgminSet("empty"), ("argmin multiplier norm exceeds kappa*||xstar||; "
                                    "the supplied modulus may be too small")
    if argmin.kind == "ray":
        base = np.zeros_like(argmin.direction) if argmin.point is None else argmin.point
        nb = float(np.linalg.norm(base))
        if nb > radius + tol:
            return ArgminSet("empty"), "argmin ray base exceeds the multiplier ball"
        if radius <= tol:
            return ArgminSet("singleton", point=base), None
        return argmin, None  # representatives are drawn inside the ball downstream
    if radius <= tol:
        # zero multiplier ball: only the zero multiplier survives (the
        # argmin always contains it when xstar = 0)
        return ArgminSet("singleton", point=np.zeros(argmin.feasible.dim())), None
    return argmin, None


def graphical_derivative(phi: SmoothMapOracle, pair: StationaryPair, v,
                         kappa: float | None = None,
                         mscq_verified: bool = False) -> GraphDerivativeResult:
    """DN_Gamma(x, xstar)(v) as a structured set.

    When ``kappa`` is supplied the multiplier search is intersected with the
    ball of radius kappa*||xstar||, matching the neighborhood form of the
    formula.  Results are formal unless the caller vouches for metric
    subregularity (``mscq_verified``).
    """
    v = np.asarray(v, dtype=float)
    ev = _evaluator(phi, pair)
    n = ev.n

    if not ev.critical(v):
        empty = Empty(n)
        return GraphDerivativeResult(v, False, None, empty, empty, empty,
                                     mscq_verified, kappa, None)

    lp = ev.lp(v)
    caveat = None
    argmin = lp.argmin
    if kappa is not None:
        argmin, caveat = _restrict_to_ball(argmin, kappa * float(np.linalg.norm(ev.xstar)))

    if lp.status is not LpStatus.OPTIMAL or argmin.kind == "empty":
        empty = Empty(n)
        return GraphDerivativeResult(v, True, lp, empty, empty, empty,
                                     mscq_verified, kappa,
                                     caveat or f"argmin multipliers unavailable "
                                               f"(lp status {lp.status.value})",
                                     argmin)

    T = ev.second_map(v)
    if argmin.kind == "singleton":
        affine: ConeSet = simplify(cone_sets.Singleton(T @ argmin.point))
    elif argmin.kind == "ray":
        base = np.zeros(ev.d) if argmin.point is None else argmin.point
        affine = simplify(Translate(T @ base, cone_sets.Ray(T @ argmin.direction)))
    else:
        affine = simplify(LinearImage(T, argmin.as_cone_set(ev.d)))

    normal_part = ev.normal_to_critical(v)
    full = simplify(Sum(affine, normal_part))
    return GraphDerivativeResult(v, True, lp, affine, normal_part, full,
                                 mscq_verified, kappa, caveat, argmin)


def graphical_derivative_zero_star(phi: SmoothMapOracle, x):
    """The closed-form map v -> DN_Gamma(x, 0)(v) = J^T[N_Q(Phi(x)) cap {Jv}^perp]."""
    x = np.asarray(x, dtype=float)
    val = constraint_system.require_feasible(phi, x)
    J = phi.jacobian(x)
    ncone = soc_geometry.normal_cone_Q(val)
    n = x.size

    def mapping(v) -> ConeSet:
        v = np.asarray(v, dtype=float)
        if not conic_lp.direction_is_critical(phi, x, np.zeros(n), v):
            return Empty(n)
        inner = simplify(cone_sets.Intersect(ncone, cone_sets.Hyperplane(J @ v)))
        return simplify(LinearImage(J.T, inner))

    return mapping


# ---------------------------------------------------------------------------
# tangent cone to the graph
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Stratum:
    """A relative-interior piece of the critical cone with its constant
    normal cone (when constant) for display purposes."""

    label: str
    face: ConeSet
    normal: ConeSet | None  # None when the normal cone varies over the face

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "face": cone_sets.to_json(self.face),
            "normal": None if self.normal is None else cone_sets.to_json(self.normal),
        }


@dataclass(frozen=True)
class GraphTangentCone:
    """Membership predicate for tangent pairs (v, v*) of gph N_Gamma, plus
    an explicit stratified description when the critical cone is polyhedral."""

    phi: SmoothMapOracle
    pair: StationaryPair
    kappa: float | None = None
    mscq_verified: bool = False
    strata: tuple[Stratum, ...] = field(default_factory=tuple)

    def derivative(self, v) -> GraphDerivativeResult:
        return graphical_derivative(self.phi, self.pair, v, self.kappa,
                                    self.mscq_verified)

    def contains(self, v, vstar, tol: float = 1e-8) -> bool:
        res = self.derivative(v)
        if not res.critical:
            return False
        return cone_sets.membership(res.full_set, np.asarray(vstar, dtype=float), tol)

    def to_json(self) -> dict:
        return {
            "mscq_verified": self.mscq_verified,
            "kappa": self.kappa,
            "strata": [s.to_json() for s in self.strata],
        }


def _stratify(phi: SmoothMapOracle, pair: StationaryPair) -> tuple[Stratum, ...]:
    """Explicit strata for the polyhedral critical-cone shapes that occur in
    two variables; other shapes fall back to the predicate only."""
    K = constraint_system.critical_cone(phi, pair)
    n = phi.n
    samples = _face_representatives(K, n)
    out = []
    for label, reps, face in samples:
        normals = []
        for r in reps:
            try:
                normals.append(graphical_derivative(phi, pair, r).full_set)
            except Exception:
                normals = []
                break
        const = None
        if normals and all(cone_sets.equal_sets(normals[0], s, samples=25) for s in normals[1:]):
            const = normals[0]
        out.append(Stratum(label, face, const))
    return tuple(out)


def _face_representatives(K: ConeSet, n: int):
    K = simplify(K)
    if isinstance(K, cone_sets.All):
        rng = np.random.default_rng(5)
        return [("interior", [rng.standard_normal(n) for _ in range(2)], K)]
    if isinstance(K, cone_sets.Halfspace):
        a = K.normal / np.linalg.norm(K.normal)
        B = [b for b in np.eye(n)]
        inter = [b - (a @ b) * a - 0.5 * a for b in B][:2]
        bd = [b - (a @ b) * a for b in B if np.linalg.norm(b - (a @ b) * a) > 1e-9][:2]
        return [("interior", inter, K),
                ("boundary", bd, cone_sets.hyperplane(a))]
    if isinstance(K, cone_sets.Hyperplane):
        a = K.normal / np.linalg.norm(K.normal)
        reps = [b - (a @ b) * a for b in np.eye(n)]
        reps = [r for r in reps if np.linalg.norm(r) > 1e-9][:2]
        return [("lineality", reps, K)]
    if isinstance(K, cone_sets.Ray):
        return [("ray", [K.direction], K), ("vertex", [np.zeros(n)], cone_sets.zero(n))]
    if isinstance(K, cone_sets.Zero):
        return [("vertex", [np.zeros(n)], K)]
    if isinstance(K, cone_sets.Preimage):
        # polyhedral only when the inner slice is; probe with samples
        rng = np.random.default_rng(9)
        reps = cone_sets.sample(K, rng, 3)
        return [("sampled", reps, K)]
    rng = np.random.default_rng(9)
    return [("sampled", cone_sets.sample(K, rng, 3), K)]


def tangent_cone_graph(phi: SmoothMapOracle, pair: StationaryPair,
                       kappa: float | None = None,
                       mscq_verified: bool = False) -> GraphTangentCone:
    """The tangent cone to gph N_Gamma at the pair, as a predicate over
    (v, v*) plus explicit strata where the critical cone is polyhedral."""
    constraint_system.validate_pair(phi, pair)
    strata = _stratify(phi, pair)
    return GraphTangentCone(phi, pair, kappa, mscq_verified, strata)


# ---------------------------------------------------------------------------
# numerical tangent sampling (test oracle)
# ---------------------------------------------------------------------------


def sample_tangent_oracle(phi: SmoothMapOracle, pair: StationaryPair,
                          graph_sampler, samples: int = 100,
                          t_min: float = 1e-6, t_max: float = 1e-3,
                          seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Difference quotients of graph points near the reference pair.

    ``graph_sampler(rng, radius)`` must return a point (x, xstar) of
    gph N_Gamma within the given radius of the reference pair; an analytic
    description of N_Gamma for the instance provides it.  Returned pairs
    (v, v*) are candidate tangent vectors to cross-validate the formula.
    """
    x0 = np.asarray(pair.x, dtype=float)
    s0 = np.asarray(pair.xstar, dtype=float)
    rng = np.random.default_rng(seed)
    out = [(np.zeros_like(x0), np.zeros_like(s0))]  # cones contain 0
    ts = np.exp(rng.uniform(np.log(t_min), np.log(t_max), size=samples))
    for t in ts:
        gx, gs = graph_sampler(rng, t)
        out.append(((np.asarray(gx) - x0) / t, (np.asarray(gs) - s0) / t))
    return out
