"""The constraint set Gamma = {x : Phi(x) in Q} and its variational objects.

Tangent and normal cones to Gamma, the critical cone of a stationary pair,
Lagrange-multiplier sets with their three-way classification (Slater body,
boundary singleton, ray), the curvature matrix that corrects the Hessian
contraction at nonzero boundary images, the normal cone to the critical
cone, the three constraint-qualification certificates, a numeric metric-
subregularity probe, and a second-order sufficiency check.

Multiplier existence is exact where the algebra allows it (the kernel of
the adjoint Jacobian against -Q is classified through the Lorentz form);
Slater detection maximizes the margin -lam0 - ||lam_r|| over the affine
multiplier slice via :mod:`socvar.conic_lp`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import math

import numpy as np
from scipy.linalg import null_space, orth
from scipy.optimize import minimize

from . import cone_sets, conic_lp, epi2, soc_geometry
from .cone_sets import (ConeSet, Empty, FinitelyGenerated, Halfspace, Hyperplane,
                        Intersect, LinearImage, NegSoc, Preimage, Ray, Singleton,
                        Soc, Zero, simplify)
from .oracles import SmoothMapOracle, hessian_contraction
from .soc_geometry import PointClass, SocVector

MULT_TOL = 1e-9


class NotFeasibleError(ValueError):
    """The point violates Phi(x) in Q."""


class InvalidStationaryPairError(ValueError):
    """No multiplier certifies xstar in N_Gamma(x); never silently repaired."""


class GridTooCoarseError(RuntimeError):
    """A penalty solve inside the subregularity probe failed to converge."""


def _phi_vec(phi: SmoothMapOracle, x) -> SocVector:
    return SocVector.from_array(phi.value(np.asarray(x, dtype=float)))


def require_feasible(phi: SmoothMapOracle, x, tol: float = 1e-8) -> SocVector:
    val = _phi_vec(phi, x)
    if soc_geometry.dist_to_Q(val) > tol * max(1.0, val.norm()):
        raise NotFeasibleError(f"Phi(x) is outside the cone at x = {np.asarray(x)}")
    return val


# ---------------------------------------------------------------------------
# stationary pairs and multiplier sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StationaryPair:
    """(x, xstar) with xstar in N_Gamma(x), certified by a multiplier."""

    x: np.ndarray
    xstar: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "xstar", np.asarray(self.xstar, dtype=float))


@dataclass(frozen=True)
class MultiplierSet:
    """Tagged description of Lambda(x, xstar).

    kind "empty": no multiplier.
    kind "singleton": the unique multiplier ``point``.
    kind "ray": {t * generator : t >= 0}; implies xstar = 0.  A zero
        generator encodes the degenerate ray {0}.
    kind "slater_body": the full set {particular + basis mu} cap N, with a
        strictly interior witness stored in ``interior_point``.
    """

    kind: str
    point: np.ndarray | None = None
    generator: np.ndarray | None = None
    particular: np.ndarray | None = None
    basis: np.ndarray | None = None
    cone: ConeSet | None = None
    interior_point: np.ndarray | None = None

    def is_empty(self) -> bool:
        return self.kind == "empty"

    def a_multiplier(self) -> np.ndarray:
        if self.kind == "singleton":
            return self.point.copy()
        if self.kind == "ray":
            return self.generator.copy()
        if self.kind == "slater_body":
            return self.interior_point.copy()
        raise ValueError("empty multiplier set")

    def as_cone_set(self, dim: int) -> ConeSet:
        if self.kind == "empty":
            return Empty(dim)
        if self.kind == "singleton":
            return Singleton(self.point)
        if self.kind == "ray":
            return cone_sets.ray(self.generator)
        flat: ConeSet = (Zero(dim) if self.basis.size == 0
                         else FinitelyGenerated(np.hstack([self.basis, -self.basis])))
        return simplify(Intersect(self.cone, cone_sets.Translate(self.particular, flat)))

    def representatives(self, count: int = 5, seed: int = 0) -> list[np.ndarray]:
        if self.kind == "empty":
            return []
        if self.kind == "singleton":
            return [self.point.copy()]
        if self.kind == "ray":
            return [t * self.generator for t in (0.0, 0.5, 1.0, 3.0)][:count]
        rng = np.random.default_rng(seed)
        pts = [self.interior_point.copy()]
        pts += cone_sets.sample(self.as_cone_set(self.particular.size), rng, count - 1)
        return pts[:count]

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.point is not None:
            out["point"] = self.point.tolist()
        if self.generator is not None:
            out["generator"] = self.generator.tolist()
        if self.particular is not None:
            out["particular"] = self.particular.tolist()
            out["basis"] = self.basis.T.tolist()
            out["interior_point"] = self.interior_point.tolist()
        return out


_MS_CACHE: dict[tuple, MultiplierSet] = {}


def multiplier_set(phi: SmoothMapOracle, pair: StationaryPair,
                   tol: float = MULT_TOL) -> MultiplierSet:
    """Solve J^T lam = xstar over lam in N_Q(Phi(x)) and classify the set.

    Content-cached on (Phi(x), J(x), xstar): the classification is pure in
    those values.
    """
    x, xstar = pair.x, pair.xstar
    key = (np.round(phi.value(x), 14).tobytes(),
           np.round(phi.jacobian(x), 14).tobytes(),
           np.round(xstar, 14).tobytes(), tol)
    hit = _MS_CACHE.get(key)
    if hit is not None:
        return hit
    if len(_MS_CACHE) > 2048:
        _MS_CACHE.clear()
    out = _multiplier_set_impl(phi, pair, tol)
    _MS_CACHE[key] = out
    return out


def _multiplier_set_impl(phi: SmoothMapOracle, pair: StationaryPair,
                         tol: float) -> MultiplierSet:
    x, xstar = pair.x, pair.xstar
    val = require_feasible(phi, x)
    cls = soc_geometry.classify(val)
    J = phi.jacobian(x)
    G = J.T  # (n, m+1)
    d = val.dim
    scale = max(1.0, float(np.linalg.norm(xstar)))

    if cls is PointClass.INTERIOR:
        if np.linalg.norm(xstar) <= tol * scale:
            return MultiplierSet("singleton", point=np.zeros(d))
        return MultiplierSet("empty")

    if cls is PointClass.BOUNDARY_NONZERO:
        dirn = val.hat().as_array()
        w = G @ dirn
        if np.linalg.norm(w) <= tol:
            if np.linalg.norm(xstar) <= tol * scale:
                return MultiplierSet("ray", generator=dirn)
            return MultiplierSet("empty")
        t = float(w @ xstar) / float(w @ w)
        if t < -tol or np.linalg.norm(t * w - xstar) > tol * scale:
            return MultiplierSet("empty")
        return MultiplierSet("singleton", point=max(t, 0.0) * dirn)

    # Phi(x) = 0: the affine slice of -Q
    lam_p, *_ = np.linalg.lstsq(G, xstar, rcond=None)
    if np.linalg.norm(G @ lam_p - xstar) > tol * scale:
        return MultiplierSet("empty")
    Z = null_space(G)
    structure = conic_lp.subspace_negsoc_structure(Z) if Z.size else ("trivial", None)
    margin, lam_best = conic_lp.affine_negsoc_margin(lam_p, Z, structure) if Z.size \
        else (-float(lam_p[0]) - float(np.linalg.norm(lam_p[1:])), lam_p)
    if margin > tol:
        return MultiplierSet("slater_body", particular=lam_p, basis=Z,
                             cone=NegSoc(d), interior_point=lam_best)
    if margin < -tol:
        return MultiplierSet("empty")
    if np.linalg.norm(xstar) <= tol * scale:
        kind, witness = structure
        if kind in ("ray", "full"):  # "full" cannot occur here: it implies Slater
            return MultiplierSet("ray", generator=witness)
        return MultiplierSet("ray", generator=np.zeros(d))
    lam_bd = _boundary_singleton_polish(G, xstar, lam_best)
    return MultiplierSet("singleton", point=lam_bd)


def _boundary_singleton_polish(G: np.ndarray, xstar: np.ndarray,
                               lam0: np.ndarray) -> np.ndarray:
    """Refine the unique boundary multiplier: solve the affine system plus
    the boundary equation lam0 + ||lam_r|| = 0 by least squares."""
    from scipy.optimize import least_squares

    def resid(lam):
        return np.concatenate([G @ lam - xstar, [lam[0] + np.linalg.norm(lam[1:])]])

    sol = least_squares(resid, lam0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return sol.x


def validate_pair(phi: SmoothMapOracle, pair: StationaryPair,
                  tol: float = MULT_TOL) -> MultiplierSet:
    ms = multiplier_set(phi, pair, tol)
    if ms.is_empty():
        raise InvalidStationaryPairError(
            "xstar is not a normal vector to the constraint set at x")
    return ms


# ---------------------------------------------------------------------------
# first-order cones of Gamma
# ---------------------------------------------------------------------------


def tangent_cone_Gamma(phi: SmoothMapOracle, x, tol: float = 1e-8) -> ConeSet:
    """{v : J v in T_Q(Phi(x))}; closed-form leaf except at Phi(x) = 0,
    where it stays a decidable preimage of the cone.  Valid under metric
    subregularity of the constraint map (see ``probe_mscq``)."""
    val = require_feasible(phi, x, tol)
    cls = soc_geometry.classify(val)
    n = phi.n
    J = phi.jacobian(np.asarray(x, dtype=float))
    if cls is PointClass.INTERIOR:
        return cone_sets.all_space(n)
    if cls is PointClass.ORIGIN:
        return simplify(Preimage(J, Soc(val.dim)))
    return cone_sets.halfspace(J.T @ val.hat().as_array())


def normal_cone_Gamma(phi: SmoothMapOracle, x, tol: float = 1e-8) -> ConeSet:
    """J^T N_Q(Phi(x)), simplified to a leaf where possible."""
    val = require_feasible(phi, x, tol)
    J = phi.jacobian(np.asarray(x, dtype=float))
    return simplify(LinearImage(J.T, soc_geometry.normal_cone_Q(val)))


def critical_cone(phi: SmoothMapOracle, pair: StationaryPair,
                  tol: float = MULT_TOL) -> ConeSet:
    """T_Gamma(x) cap {xstar}^perp, simplified using a known multiplier.

    At Phi(x) = 0 the cone rewrites as {v : J v in Q cap {lam}^perp} for
    any multiplier lam, which collapses the hyperplane into the cone slice.
    """
    x, xstar = pair.x, pair.xstar
    val = require_feasible(phi, x)
    cls = soc_geometry.classify(val)
    T = tangent_cone_Gamma(phi, x)
    if np.linalg.norm(xstar) <= tol:
        return T
    ms = validate_pair(phi, pair, tol)
    if cls is PointClass.ORIGIN:
        J = phi.jacobian(x)
        lam = ms.a_multiplier()
        slice_cone = simplify(Intersect(Soc(val.dim), Hyperplane(lam)))
        return simplify(Preimage(J, slice_cone))
    return simplify(Intersect(T, Hyperplane(xstar)))


# ---------------------------------------------------------------------------
# curvature and the normal cone to the critical cone
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureTerm:
    matrix: np.ndarray  # (n, n) symmetric

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))


def curvature_term(phi: SmoothMapOracle, x, lam) -> CurvatureTerm:
    """-(lam0/Phi0(x)) * Jhat^T J at nonzero boundary images, else zero.

    Symmetrized explicitly; the quadratic form it enters is unaffected.
    """
    x = np.asarray(x, dtype=float)
    lam = np.asarray(lam, dtype=float)
    val = _phi_vec(phi, x)
    n = phi.n
    if soc_geometry.classify(val) is not PointClass.BOUNDARY_NONZERO or abs(lam[0]) == 0.0:
        return CurvatureTerm(np.zeros((n, n)))
    J = phi.jacobian(x)
    Jhat = J.copy()
    Jhat[0] = -Jhat[0]
    M = -(lam[0] / val.x0) * (Jhat.T @ J)
    return CurvatureTerm(0.5 * (M + M.T))


def second_order_matrix(phi: SmoothMapOracle, x, lam) -> np.ndarray:
    """Hess<lam, Phi>(x) + curvature(x; lam); the matrix in the graphical
    derivative formula, linear in lam."""
    return hessian_contraction(phi, x, lam) + curvature_term(phi, x, lam).matrix


def normal_cone_to_critical(phi: SmoothMapOracle, pair: StationaryPair,
                            lam, v, tol: float = MULT_TOL) -> ConeSet:
    """N_{K(x,xstar)}(v) = J^T [ T_{N_Q(Phi(x))}(lam) cap {J v}^perp ]."""
    x = pair.x
    val = require_feasible(phi, x)
    lam = np.asarray(lam, dtype=float)
    v = np.asarray(v, dtype=float)
    ncone = soc_geometry.normal_cone_Q(val)
    if not cone_sets.membership(ncone, lam, 1e-8):
        raise cone_sets.NotMemberError("lam is not a multiplier-cone element")
    if not conic_lp.direction_is_critical(phi, x, pair.xstar, v, 1e-8):
        raise cone_sets.NotMemberError("direction lies outside the critical cone")
    J = phi.jacobian(x)
    tangent_in_normal = _tangent_to_normal_leaf(ncone, lam, val.dim)
    inner = simplify(Intersect(tangent_in_normal, Hyperplane(J @ v)))
    return simplify(LinearImage(J.T, inner))


def _tangent_to_normal_leaf(ncone: ConeSet, lam: np.ndarray, dim: int) -> ConeSet:
    """Tangent cone to the normal-cone leaf at a point lam of it."""
    ncone = simplify(ncone)
    nl = float(np.linalg.norm(lam))
    if isinstance(ncone, Zero):
        return Zero(dim)
    if isinstance(ncone, Ray):
        if nl <= 1e-12:
            return ncone
        return cone_sets.span([ncone.direction])
    if isinstance(ncone, NegSoc):
        if nl <= 1e-12:
            return ncone
        if _neg_interior(lam):
            return cone_sets.all_space(dim)
        from ._lorentz import hat
        return cone_sets.halfspace(hat(lam))
    raise cone_sets.UnsupportedSet("unexpected normal-cone leaf")


def _neg_interior(lam: np.ndarray) -> bool:
    return -float(lam[0]) - float(np.linalg.norm(lam[1:])) > 1e-12 * max(1.0, float(np.linalg.norm(lam)))


# ---------------------------------------------------------------------------
# constraint qualifications
# ---------------------------------------------------------------------------


def _nonzero_cone_kernel_element(S: ConeSet, W: np.ndarray) -> np.ndarray | None:
    """A nonzero element of S cap range(W), or None; S a structured leaf.

    W has orthonormal columns.  Subspace-vs-subspace cases are rank
    computations; the Lorentz cases use the exact quadratic-form split.
    """
    S = simplify(S)
    if W.size == 0:
        return None
    if isinstance(S, Zero):
        return None
    if isinstance(S, cone_sets.All):
        return W[:, 0].copy()
    if isinstance(S, Halfspace):
        # a halfspace through 0 meets any nontrivial subspace off the origin
        w = W[:, 0]
        return w if float(S.normal @ w) <= 0 else -w
    if isinstance(S, Hyperplane):
        B = null_space((W.T @ S.normal).reshape(1, -1))
        return (W @ B[:, 0]) if B.size else None
    if isinstance(S, Ray):
        d = S.direction
        r = d - W @ (W.T @ d)
        if np.linalg.norm(r) <= 1e-10 * max(1.0, np.linalg.norm(d)):
            return d.copy()
        return None
    if isinstance(S, FinitelyGenerated):
        G = S.generators
        if all(cone_sets.membership(S, -G[:, j], 1e-10) for j in range(G.shape[1])):
            # the cone is a linear span: pure subspace intersection
            B = orth(G)
            K = null_space(np.hstack([B, -W]))
            for j in range(K.shape[1]):
                cand = B @ K[: B.shape[1], j]
                if np.linalg.norm(cand) > 1e-10:
                    return cand
            return None
        return _sampled_cone_kernel(S, W)
    if isinstance(S, (Soc, NegSoc)):
        kind, witness = conic_lp.subspace_negsoc_structure(W)
        if kind == "trivial":
            return None
        return -witness if isinstance(S, Soc) else witness
    return _sampled_cone_kernel(S, W)


def _sampled_cone_kernel(S: ConeSet, W: np.ndarray) -> np.ndarray | None:
    from scipy.stats import qmc
    k = W.shape[1]
    if k == 1:
        for s in (1.0, -1.0):
            if cone_sets.membership(S, s * W[:, 0], 1e-9):
                return s * W[:, 0]
        return None
    eng = qmc.Sobol(d=k, scramble=False)
    pts = eng.random_base2(9) * 2.0 - 1.0
    for p in pts:
        nrm = np.linalg.norm(p)
        if nrm < 1e-9:
            continue
        cand = W @ (p / nrm)
        if cone_sets.membership(S, cand, 1e-9):
            return cand
    return None


def check_rcq(phi: SmoothMapOracle, x, tol: float = 1e-10) -> bool:
    """N_Q(Phi(x)) cap ker J^T = {0}; the metric-regularity qualification."""
    val = require_feasible(phi, x)
    W = null_space(phi.jacobian(np.asarray(x, dtype=float)).T)
    if W.size == 0:
        return True
    return _nonzero_cone_kernel_element(soc_geometry.normal_cone_Q(val), W) is None


def check_dual_cq(phi: SmoothMapOracle, pair: StationaryPair, lam_bar,
                  tol: float = 1e-10) -> bool:
    """DN_Q(Phi(x), lam)(0) cap ker J^T = {0}: multiplier uniqueness plus
    the error-bound estimate.  The derivative at 0 is the polar of the
    critical cone of Q at Phi(x) for lam."""
    x = pair.x
    val = require_feasible(phi, x)
    lam_bar = np.asarray(lam_bar, dtype=float)
    K = epi2.critical_cone_Q(val, SocVector.from_array(lam_bar))
    S = cone_sets.polar(K.representation)
    W = null_space(phi.jacobian(x).T)
    if W.size == 0:
        return True
    return _nonzero_cone_kernel_element(S, W) is None


def check_srcq(phi: SmoothMapOracle, pair: StationaryPair, lam_bar,
               tol: float = 1e-10) -> bool:
    """J R^n - T_Q(Phi(x)) cap {lam}^perp = R^{m+1}, decided by polarity:
    the difference set is everything iff its polar cone is trivial."""
    x = pair.x
    val = require_feasible(phi, x)
    lam_bar = np.asarray(lam_bar, dtype=float)
    J = phi.jacobian(x)
    T = soc_geometry.tangent_cone_Q(val)
    slice_cone = simplify(Intersect(T, Hyperplane(lam_bar)))
    # polar of (slice - range(J)) = polar(slice) cap ker(J^T)
    S = cone_sets.polar(slice_cone)
    W = null_space(J.T)
    if W.size == 0:
        return True
    return _nonzero_cone_kernel_element(S, W) is None


# ---------------------------------------------------------------------------
# metric subregularity probe
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MscqReport:
    kappa_hat: float
    points: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"kappa_hat": self.kappa_hat, "points": self.points}


def _dist_to_gamma(phi: SmoothMapOracle, x0: np.ndarray, violation_tol: float = 1e-10):
    """Penalty-descent estimate of dist(x0; Gamma); returns (dist, y)."""
    from ._lorentz import dist_soc, project_soc

    def objective(y, rho):
        r = phi.value(y)
        pr = project_soc(r)
        gap = r - pr
        return float(np.linalg.norm(y - x0) ** 2 + rho * float(gap @ gap))

    def gradient(y, rho):
        r = phi.value(y)
        gap = r - project_soc(r)
        return 2.0 * (y - x0) + 2.0 * rho * (phi.jacobian(y).T @ gap)

    def restore(y):
        # Gauss-Newton steps toward the cone: the penalty stages leave an
        # O(1/rho) violation that this drives to the tolerance
        for _ in range(40):
            r = phi.value(y)
            gap = r - project_soc(r)
            if np.linalg.norm(gap) < 0.1 * violation_tol:
                break
            step, *_ = np.linalg.lstsq(phi.jacobian(y), -gap, rcond=None)
            ns = float(np.linalg.norm(step))
            if ns > 1.0:
                step = step / ns
            y = y + step
        return y

    y = x0.copy()
    for k in range(9):
        rho = 10.0 ** k
        res = minimize(objective, y, args=(rho,), jac=gradient, method="L-BFGS-B",
                       options={"maxiter": 400, "ftol": 1e-18, "gtol": 1e-14})
        y = res.x
        if k >= 4:
            cand = restore(y)
            if dist_soc(phi.value(cand)) < violation_tol:
                return float(np.linalg.norm(cand - x0)), cand
    y = restore(y)
    if dist_soc(phi.value(y)) >= violation_tol:
        raise GridTooCoarseError(f"penalty solve stalled at {x0} "
                                 f"(violation {dist_soc(phi.value(y)):.2e})")
    return float(np.linalg.norm(y - x0)), y


def probe_mscq(phi: SmoothMapOracle, x_bar, radius: float, grid: int) -> tuple[float, MscqReport]:
    """Empirical subregularity modulus on a grid around a feasible point.

    For each off-cone grid point the feasible distance is estimated by
    quadratic-penalty descent (an upper bound once the violation is driven
    below 1e-10) and divided by dist(Phi(x); Q).  This falsifies candidate
    moduli; it proves nothing.
    """
    if radius <= 0 or grid < 2:
        raise ValueError("radius must be positive and grid >= 2")
    x_bar = np.asarray(x_bar, dtype=float)
    require_feasible(phi, x_bar)
    axes = [np.linspace(x_bar[i] - radius, x_bar[i] + radius, grid)
            for i in range(x_bar.size)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, x_bar.size)
    kappa = 0.0
    rows: list[dict] = []
    for p in mesh:
        denom = soc_geometry.dist_to_Q(_phi_vec(phi, p))
        if denom <= 1e-12:
            continue  # already feasible: the 0/0 ratio is skipped
        dist, _ = _dist_to_gamma(phi, p)
        ratio = dist / denom
        kappa = max(kappa, ratio)
        rows.append({"x": p.tolist(), "dist_gamma": dist,
                     "dist_cone": denom, "ratio": ratio})
    return kappa, MscqReport(kappa_hat=kappa, points=rows)


# ---------------------------------------------------------------------------
# second-order sufficiency
# ---------------------------------------------------------------------------


def check_sosc(phi: SmoothMapOracle, objective, x_bar, lam_bar,
               samples: int = 1000, tol_pd: float = 1e-8) -> bool:
    """Positive definiteness of the Lagrangian Hessian on the cone
    {u : J u in Q cap {lam}^perp}; vacuously true when the cone is {0}.

    objective must expose gradient(x) and hessian(x) of the scalar cost.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    lam_bar = np.asarray(lam_bar, dtype=float)
    H = np.asarray(objective.hessian(x_bar), dtype=float) + \
        hessian_contraction(phi, x_bar, lam_bar)
    H = 0.5 * (H + H.T)
    J = phi.jacobian(x_bar)
    d = J.shape[0]
    slice_cone = simplify(Intersect(Soc(d), Hyperplane(lam_bar)))
    if isinstance(slice_cone, Zero):
        return True
    if isinstance(slice_cone, (Ray, Soc)):
        if isinstance(slice_cone, Ray):
            u1, *_ = np.linalg.lstsq(J, slice_cone.direction, rcond=None)
            feas_dir = np.linalg.norm(J @ u1 - slice_cone.direction) <= 1e-9
            K = null_space(J)
            cols = [u1] if feas_dir else []
            if K.size:
                cols += [K[:, j] for j in range(K.shape[1])]
            if not cols:
                return True
            B = orth(np.column_stack(cols))
            # the quadratic form is even, so the halfline constraint on the
            # u1 coefficient never binds on the sphere of the span
            evals = np.linalg.eigvalsh(B.T @ H @ B)
            return bool(evals.min() > tol_pd)
        # full cone slice: deterministic sphere sweep with local polish
        cone = simplify(Preimage(J, slice_cone))
        return _min_form_on_cone(H, cone, samples, tol_pd)
    raise cone_sets.UnsupportedSet("unexpected cone slice in the sufficiency check")


def _min_form_on_cone(H: np.ndarray, cone: ConeSet, samples: int, tol_pd: float) -> bool:
    from scipy.stats import qmc
    n = H.shape[0]
    if n == 1:
        for s in (1.0, -1.0):
            if cone_sets.membership(cone, np.array([s]), 1e-9):
                if s * s * H[0, 0] <= tol_pd:
                    return False
        return True
    eng = qmc.Sobol(d=n, scramble=False)
    best, best_u = np.inf, None
    for p in eng.random_base2(max(6, math.ceil(math.log2(max(samples, 64))))):
        u = p * 2.0 - 1.0
        nrm = np.linalg.norm(u)
        if nrm < 1e-9:
            continue
        u = u / nrm
        for s in (1.0, -1.0):
            if cone_sets.membership(cone, s * u, 1e-9):
                q = float(u @ H @ u)
                if q < best:
                    best, best_u = q, s * u
    if best_u is None:
        return True  # no unit direction found: the cone is {0} at sampling resolution
    res = minimize(lambda u: float(u @ H @ u) / max(float(u @ u), 1e-16), best_u,
                   method="Nelder-Mead", options={"maxiter": 400, "xatol": 1e-12})
    u = res.x / np.linalg.norm(res.x)
    if cone_sets.membership(cone, u, 1e-8) or cone_sets.membership(cone, -u, 1e-8):
        best = min(best, float(u @ H @ u))
    return bool(best > tol_pd)
