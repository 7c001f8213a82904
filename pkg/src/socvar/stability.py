"""Isolated calmness of perturbed variational systems over the constraint set.

The solution map S(p) = {x : p in f(x) + N_Gamma(x)} is isolatedly calm at
a reference pair exactly when no nonzero direction v solves

    0 in Df(x) v + (Hess<lam,Phi>(x) + curvature(x;lam)) v + N_K(v)

with lam ranging over the direction's argmin multipliers inside the ball
of radius kappa * ||p - f(x)||.  The search enumerates the faces of the
critical cone: on polyhedral faces with a stable argmin the inclusion is a
linear-algebra feasibility and the verdict is exact; genuinely curved
cone faces fall back to a deterministic sphere sweep with local polish,
and the sampling resolution is reported.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space, orth
from scipy.optimize import minimize

from . import cone_sets, constraint_system, graph_derivative
from .cone_sets import ConeSet, simplify
from .constraint_system import StationaryPair
from .oracles import SmoothMapOracle

WITNESS_TOL = 1e-8


def negate_set(s: ConeSet) -> ConeSet:
    """The reflection -S of a set in the algebra."""
    s = simplify(s)
    n = s.dim()
    if isinstance(s, (cone_sets.Zero, cone_sets.All, cone_sets.Empty,
                      cone_sets.Hyperplane)):
        return s
    if isinstance(s, cone_sets.Soc):
        return cone_sets.NegSoc(n)
    if isinstance(s, cone_sets.NegSoc):
        return cone_sets.Soc(n)
    if isinstance(s, cone_sets.Halfspace):
        return cone_sets.Halfspace(-s.normal)
    if isinstance(s, cone_sets.Ray):
        return cone_sets.Ray(-s.direction)
    if isinstance(s, cone_sets.FinitelyGenerated):
        return cone_sets.FinitelyGenerated(-s.generators)
    if isinstance(s, cone_sets.Singleton):
        return cone_sets.Singleton(-s.point)
    return simplify(cone_sets.LinearImage(-np.eye(n), s))


@dataclass(frozen=True)
class VariationalSystem:
    """p in f(x) + N_Gamma(x) with reference pair (p_bar, x_bar)."""

    f: SmoothMapOracle       # R^n -> R^n perturbation map
    phi: SmoothMapOracle     # constraint map into R^{m+1}
    p_bar: np.ndarray
    x_bar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_bar", np.asarray(self.p_bar, dtype=float))
        object.__setattr__(self, "x_bar", np.asarray(self.x_bar, dtype=float))

    def stationary_pair(self) -> StationaryPair:
        return StationaryPair(self.x_bar, self.p_bar - self.f.value(self.x_bar))

    def validate(self) -> None:
        constraint_system.validate_pair(self.phi, self.stationary_pair())


@dataclass(frozen=True)
class CalmnessWitness:
    v: np.ndarray
    lam: np.ndarray
    normal_element: np.ndarray
    residual: float

    def to_json(self) -> dict:
        return {"v": self.v.tolist(), "lam": self.lam.tolist(),
                "normal_element": self.normal_element.tolist(),
                "residual": self.residual}


@dataclass(frozen=True)
class CalmnessVerdict:
    calm: bool
    witness: CalmnessWitness | None
    search_report: list[dict] = field(default_factory=list)
    kappa: float = 0.0
    kappa_source: str = "user"

    def to_json(self) -> dict:
        return {
            "verdict": "calm" if self.calm else "not_calm",
            "witness": None if self.witness is None else self.witness.to_json(),
            "kappa": self.kappa,
            "kappa_source": self.kappa_source,
            "search_report": self.search_report,
        }


class _InclusionProbe:
    """Residual of the calmness inclusion at a direction, with witness parts."""

    def __init__(self, sys: VariationalSystem, kappa: float):
        self.sys = sys
        self.kappa = kappa
        self.pair = sys.stationary_pair()
        self.Df = sys.f.jacobian(sys.x_bar)
        self._cache: dict[bytes, tuple] = {}

    def parts(self, v: np.ndarray):
        key = np.asarray(v, dtype=float).tobytes()
        if key in self._cache:
            return self._cache[key]
        res = graph_derivative.graphical_derivative(self.sys.phi, self.pair, v,
                                                    kappa=self.kappa)
        out = None
        if res.critical and not isinstance(res.full_set, cone_sets.Empty):
            out = res
        self._cache[key] = out
        return out

    def residual(self, v: np.ndarray) -> tuple[float, CalmnessWitness | None]:
        v = np.asarray(v, dtype=float)
        nv = float(np.linalg.norm(v))
        if nv <= 1e-12:
            return math.inf, None
        v = v / nv
        res = self.parts(v)
        if res is None:
            return math.inf, None
        target = -(self.Df @ v)
        best = (math.inf, None)
        admissible = res.admissible_multipliers
        if admissible is None or admissible.kind == "empty":
            return math.inf, None
        radius = self.kappa * float(np.linalg.norm(self.pair.xstar))
        if radius <= 1e-12:
            reps = [np.zeros(self.sys.phi.d)]
        else:
            reps = admissible.representatives()
            reps = [lam for lam in reps
                    if float(np.linalg.norm(lam)) <= radius + 1e-9] or reps[:1]
        for lam in reps:
            Mv = constraint_system.second_order_matrix(self.sys.phi, self.sys.x_bar, lam) @ v
            w = target - Mv
            try:
                nrm_el = cone_sets.project(res.normal_part, w)
            except cone_sets.UnsupportedSet:
                continue
            r = float(np.linalg.norm(self.Df @ v + Mv + nrm_el))
            if r < best[0]:
                best = (r, CalmnessWitness(v, np.asarray(lam, dtype=float), nrm_el, r))
        return best


def _faces_of(K: ConeSet, n: int):
    """(label, basis of the face's span or None-for-curved, face set, exactness)."""
    K = simplify(K)
    if isinstance(K, cone_sets.Zero):
        return []
    if isinstance(K, cone_sets.All):
        return [("space", np.eye(n), K, True)]
    if isinstance(K, cone_sets.Hyperplane):
        return [("lineality", null_space(K.normal.reshape(1, -1)), K, True)]
    if isinstance(K, cone_sets.Halfspace):
        return [("interior", np.eye(n), K, True),
                ("boundary", null_space(K.normal.reshape(1, -1)),
                 cone_sets.hyperplane(K.normal), True)]
    if isinstance(K, cone_sets.Ray):
        return [("ray", K.direction.reshape(-1, 1), K, True)]
    if isinstance(K, cone_sets.FinitelyGenerated):
        G = K.generators
        if all(cone_sets.membership(K, -G[:, j], 1e-10) for j in range(G.shape[1])):
            return [("lineality", orth(G), K, True)]
        faces = [("ray[%d]" % j, G[:, j].reshape(-1, 1),
                  cone_sets.ray(G[:, j]), True) for j in range(G.shape[1])]
        faces.append(("relative-interior", orth(G), K, False))
        return faces
    # curved piece (preimage of the cone or a cone slice)
    return [("curved", None, K, False)]


def _probe_points(label: str, B: np.ndarray | None, K: ConeSet, n: int):
    if B is None:
        rng = np.random.default_rng(13)
        return [p for p in cone_sets.sample(K, rng, 4) if np.linalg.norm(p) > 1e-9]
    pts = []
    for j in range(B.shape[1]):
        pts += [B[:, j], -B[:, j]]
    if label == "interior" and isinstance(K, cone_sets.Halfspace):
        a = K.normal / np.linalg.norm(K.normal)
        pts = [p - (a @ p) * a - 0.5 * a for p in pts]
    pts = [p for p in pts if np.linalg.norm(p) > 1e-9 and cone_sets.membership(K, p, 1e-9)]
    return [p / np.linalg.norm(p) for p in pts]


def _exact_face_search(probe: _InclusionProbe, label, B, face, n):
    """Exact feasibility on a face with a stable singleton argmin.

    Returns ("witness", w), ("none", report) when provably no witness on
    the face, or ("fallback", reason) when exactness assumptions fail.
    """
    pts = _probe_points(label, B, face, n)
    if not pts:
        return "none", {"face": label, "method": "empty-face"}
    lams, normals = [], []
    for p in pts[:4]:
        res = probe.parts(p)
        if res is None:
            return "fallback", "direction rejected on face"
        adm = res.admissible_multipliers
        if adm is None or adm.kind != "singleton":
            return "fallback", "argmin not a stable singleton"
        lams.append(adm.point)
        normals.append(res.normal_part)
    lam0 = lams[0]
    if any(np.linalg.norm(l - lam0) > 1e-8 * max(1.0, np.linalg.norm(lam0)) for l in lams[1:]):
        return "fallback", "argmin varies over face"
    if any(not cone_sets.equal_sets(normals[0], s, samples=25) for s in normals[1:]):
        return "fallback", "normal cone varies over face"
    N_face = normals[0]
    A = probe.Df + constraint_system.second_order_matrix(probe.sys.phi, probe.sys.x_bar, lam0)

    candidates: list[np.ndarray] = []
    if B is None:
        return "fallback", "no linear parametrization"
    AB = A @ B
    Kker = null_space(AB)
    for j in range(Kker.shape[1]):
        candidates += [B @ Kker[:, j], -(B @ Kker[:, j])]
    R = orth(AB)
    if R.size:
        y = constraint_system._nonzero_cone_kernel_element(negate_set(N_face), R)
        if y is not None:
            w, *_ = np.linalg.lstsq(AB, y, rcond=None)
            if np.linalg.norm(AB @ w - y) <= 1e-9 * max(1.0, np.linalg.norm(y)):
                candidates += [B @ w, -(B @ w)]
    for cand in candidates:
        if np.linalg.norm(cand) <= 1e-10 or not cone_sets.membership(face, cand, 1e-9):
            continue
        r, wit = probe.residual(cand)
        if r <= WITNESS_TOL and wit is not None:
            return "witness", wit
    return "none", {"face": label, "method": "exact-linear"}


def _sampled_face_search(probe: _InclusionProbe, face: ConeSet, n: int,
                         samples: int = 1000):
    """Deterministic low-discrepancy sphere sweep with local polish."""
    from scipy.stats import qmc
    eng = qmc.Sobol(d=n, scramble=False)
    best: tuple[float, CalmnessWitness | None] = (math.inf, None)
    pts = eng.random_base2(max(6, math.ceil(math.log2(max(samples, 64)))))
    for p in pts:
        u = 2.0 * p - 1.0
        nu = np.linalg.norm(u)
        if nu < 1e-9:
            continue
        u = u / nu
        if not cone_sets.membership(face, u, 1e-9):
            continue
        r, wit = probe.residual(u)
        if r < best[0]:
            best = (r, wit)
        if r <= WITNESS_TOL:
            return best
    if best[1] is not None and best[0] < 1e-2:
        res = minimize(lambda w: probe.residual(w)[0], best[1].v,
                       method="Nelder-Mead",
                       options={"maxiter": 200, "xatol": 1e-12, "fatol": 1e-14})
        r, wit = probe.residual(res.x)
        if r < best[0]:
            best = (r, wit)
    return best


def check_isolated_calmness(sys: VariationalSystem, kappa: float,
                            kappa_source: str = "user") -> CalmnessVerdict:
    """Decide the isolated-calmness criterion by stratified witness search."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    sys.validate()
    pair = sys.stationary_pair()
    K = constraint_system.critical_cone(sys.phi, pair)
    n = sys.x_bar.size
    probe = _InclusionProbe(sys, kappa)
    report: list[dict] = []
    fallback_faces: list[ConeSet] = []

    for label, B, face, exact in _faces_of(K, n):
        if exact and B is not None:
            state, payload = _exact_face_search(probe, label, B, face, n)
            if state == "witness":
                report.append({"face": label, "method": "exact-linear", "witness": True})
                return CalmnessVerdict(False, payload, report, kappa, kappa_source)
            if state == "none":
                report.append(payload)
                continue
            report.append({"face": label, "method": "exact-failed", "reason": payload})
            fallback_faces.append(face)
        else:
            fallback_faces.append(face)
            report.append({"face": label, "method": "deferred-to-sampling"})

    for face in fallback_faces:
        r, wit = _sampled_face_search(probe, face, n)
        report.append({"face": repr(face), "method": "sampled(1024)",
                       "min_residual": r if math.isfinite(r) else None})
        if r <= WITNESS_TOL and wit is not None:
            return CalmnessVerdict(False, wit, report, kappa, kappa_source)

    return CalmnessVerdict(True, None, report, kappa, kappa_source)


class ImplicitSet:
    """{v : u in Df(x) v + DN_Gamma(x, xstar)(v)} as a membership predicate."""

    def __init__(self, sys: VariationalSystem, u, kappa: float | None = None):
        self.sys = sys
        self.u = np.asarray(u, dtype=float)
        self.kappa = kappa
        self._pair = sys.stationary_pair()
        self._Df = sys.f.jacobian(sys.x_bar)

    def contains(self, v, tol: float = 1e-8) -> bool:
        v = np.asarray(v, dtype=float)
        res = graph_derivative.graphical_derivative(self.sys.phi, self._pair, v,
                                                    kappa=self.kappa)
        if not res.critical:
            return False
        return cone_sets.membership(res.full_set, self.u - self._Df @ v, tol)


def ds_graphical_derivative(sys: VariationalSystem, u,
                            kappa: float | None = None) -> ImplicitSet:
    """Graphical derivative of the solution map at the reference pair, in
    implicit form; at u = 0 this is the set whose triviality is calmness."""
    sys.validate()
    return ImplicitSet(sys, u, kappa)
