"""Linear conic programs over multiplier sets of a Lorentz-cone constraint.

The primal problem minimizes a linear functional of the multiplier over
{lambda in N : J^T lambda = xstar} where N is one of the three normal-cone
leaves (zero, a ray, or -Q).  The zero and ray cases close in a line; the
-Q case is solved by parametrizing the affine slice, classifying its
recession structure exactly through the Lorentz quadratic form on the
kernel, and polishing an active-boundary KKT system.

``solve_dual_lp`` produces the approximate dual certificate: a vector z
with dist(J z + <v, Hess v>; Q) <= eps whose dual objective is within eps
of the primal value.  Exact duality holds in the Slater case; the ray case
with a degenerate objective genuinely needs the slack.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize

from . import _lorentz, cone_sets, soc_geometry
from .cone_sets import (ConeSet, FinitelyGenerated, Intersect, NegSoc, Ray,
                        Singleton, Translate, Zero, simplify)
from .oracles import SmoothMapOracle, quadratic_in_direction
from .soc_geometry import PointClass, SocVector

FEAS_TOL = 1e-9
RECESSION_DELTA = 1e-9
Z_NORM_CAP = 1e6


class DirectionNotCriticalError(ValueError):
    """The direction lies outside the critical cone; the argmin set is undefined."""


class CertificateFailedError(RuntimeError):
    """No dual certificate found within the iteration/norm budget."""


class LpStatus(Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"
    # bounded infimum that is not attained; outside the paper's three-way
    # split but possible for slices of the cone, so reported honestly
    UNATTAINED = "unattained"


@dataclass(frozen=True)
class SocLinearProgram:
    """min c.lam  s.t.  G lam = b,  lam in cone (one of Zero/Ray/NegSoc)."""

    c: np.ndarray          # (d,)
    G: np.ndarray          # (n, d); rows are the adjoint constraint
    b: np.ndarray          # (n,)
    cone: ConeSet          # Zero(d) | Ray | NegSoc(d)

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "G", np.asarray(self.G, dtype=float))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float))


@dataclass(frozen=True)
class ArgminSet:
    """Structured argmin description: empty, a point, a ray, or the whole
    feasible set (degenerate objective)."""

    kind: str  # "empty" | "singleton" | "ray" | "full_feasible"
    point: np.ndarray | None = None
    direction: np.ndarray | None = None
    feasible: ConeSet | None = None

    def as_cone_set(self, dim: int) -> ConeSet:
        if self.kind == "empty":
            return cone_sets.Empty(dim)
        if self.kind == "singleton":
            return Singleton(self.point)
        if self.kind == "ray":
            base = np.zeros(dim) if self.point is None else self.point
            return simplify(Translate(base, Ray(self.direction)))
        return self.feasible

    def representatives(self, rng: np.random.Generator | None = None,
                        count: int = 5) -> list[np.ndarray]:
        if self.kind == "empty":
            return []
        if self.kind == "singleton":
            return [self.point.copy()]
        if self.kind == "ray":
            base = np.zeros_like(self.direction) if self.point is None else self.point
            return [base + t * self.direction for t in (0.0, 0.5, 1.0, 2.0)][:count]
        rng = rng or np.random.default_rng(0)
        return cone_sets.sample(self.feasible, rng, count)


@dataclass(frozen=True)
class DualCertificate:
    z: np.ndarray
    eps: float
    cone_residual: float   # dist(J z + <v, Hess v>; Q)
    gap_residual: float    # primal value - dual objective (>= -eps required)


@dataclass(frozen=True)
class LpOutcome:
    status: LpStatus
    value: float
    argmin: ArgminSet
    dual_certificate: DualCertificate | None = None


# ---------------------------------------------------------------------------
# exact structure of a subspace against -Q
# ---------------------------------------------------------------------------


def subspace_negsoc_structure(Z: np.ndarray, tol: float = 1e-11):
    """Classify range(Z) cap (-Q) via the Lorentz form on the subspace.

    Returns ("trivial", None), ("ray", unit generator), or
    ("full", interior unit witness).  Z must have orthonormal columns; the
    classification reads off the top eigenvalue of Z^T diag(1,-I) Z, which
    is exact because a totally isotropic subspace of the Lorentz form is at
    most one-dimensional.
    """
    if Z.size == 0:
        return "trivial", None
    d = Z.shape[0]
    J = np.diag([1.0] + [-1.0] * (d - 1))
    S = Z.T @ J @ Z
    S = 0.5 * (S + S.T)
    w, V = np.linalg.eigh(S)
    lmax = float(w[-1])
    lam = Z @ V[:, -1]
    if lam[0] > 0:
        lam = -lam
    nl = float(np.linalg.norm(lam))
    if nl > 0:
        lam = lam / nl
    if lmax > tol:
        return "full", lam
    if lmax >= -tol and nl > tol:
        return "ray", lam
    return "trivial", None


def _margin(lam: np.ndarray) -> float:
    return -float(lam[0]) - float(np.linalg.norm(lam[1:]))


def _smooth_margin_factory(lam_p: np.ndarray, Z: np.ndarray):
    eps2 = 1e-30

    def f(mu):
        lam = lam_p + Z @ mu
        return -lam[0] - math.sqrt(float(lam[1:] @ lam[1:]) + eps2)

    def grad(mu):
        lam = lam_p + Z @ mu
        nr = math.sqrt(float(lam[1:] @ lam[1:]) + eps2)
        g = np.zeros_like(lam)
        g[0] = -1.0
        g[1:] = -lam[1:] / nr
        return Z.T @ g

    return f, grad


def affine_negsoc_margin(lam_p: np.ndarray, Z: np.ndarray,
                         structure=None) -> tuple[float, np.ndarray]:
    """Maximize -lam0 - ||lam_r|| over the affine slice lam_p + range(Z).

    Returns (margin, argmax point).  When the kernel meets int(-Q) the
    margin is unbounded above; a point with margin > 1 is returned, which
    is all any Slater test needs.
    """
    if Z.size == 0:
        return _margin(lam_p), lam_p.copy()
    if structure is None:
        structure = subspace_negsoc_structure(Z)
    kind, witness = structure
    if kind == "full":
        t = (2.0 + abs(_margin(lam_p))) / _margin(witness)
        lam = lam_p + t * witness
        return _margin(lam), lam
    f, grad = _smooth_margin_factory(lam_p, Z)
    best_val, best_mu = -np.inf, np.zeros(Z.shape[1])
    starts = [np.zeros(Z.shape[1])]
    if kind == "ray":
        pull = Z.T @ witness
        starts += [t * pull for t in (1.0, 10.0, 100.0)]
    rng = np.random.default_rng(7)
    starts += [rng.standard_normal(Z.shape[1]) for _ in range(3)]
    for mu0 in starts:
        res = minimize(lambda m: -f(m), mu0, jac=lambda m: -grad(m),
                       method="L-BFGS-B", options={"maxiter": 400, "ftol": 1e-16,
                                                   "gtol": 1e-12})
        if -res.fun > best_val:
            best_val, best_mu = -res.fun, res.x
    return best_val, lam_p + Z @ best_mu


def _min_objective_over_recession(g: np.ndarray, Z: np.ndarray, witness: np.ndarray) -> float:
    """min g.mu over {mu : ||mu|| <= 1, Z mu in -Q}; negative means unbounded LP."""
    k = Z.shape[1]
    margin, _ = _smooth_margin_factory(np.zeros(Z.shape[0]), Z)
    cons = [
        {"type": "ineq", "fun": lambda m: 1.0 - float(m @ m)},
        {"type": "ineq", "fun": margin},
    ]
    best = 0.0
    starts = [Z.T @ witness, -g / max(np.linalg.norm(g), 1e-12)]
    rng = np.random.default_rng(11)
    starts += [rng.standard_normal(k) for _ in range(3)]
    for mu0 in starts:
        res = minimize(lambda m: float(g @ m), mu0, constraints=cons,
                       method="SLSQP", options={"maxiter": 300, "ftol": 1e-14})
        if res.x is None:
            continue
        mu = res.x
        lam = Z @ mu
        if _margin(lam) >= -1e-10 and float(np.linalg.norm(mu)) <= 1.0 + 1e-9:
            best = min(best, float(g @ mu))
    return best


def _kkt_polish(lam_p: np.ndarray, Z: np.ndarray, g: np.ndarray,
                mu0: np.ndarray, iters: int = 40) -> np.ndarray:
    """Newton on the active-boundary stationarity system
    g + nu * grad(lam0 + ||lam_r||) = 0,  lam0 + ||lam_r|| = 0."""
    k = Z.shape[1]
    mu = mu0.copy()
    nu = max(1.0, float(np.linalg.norm(g)))
    for _ in range(iters):
        lam = lam_p + Z @ mu
        nr = float(np.linalg.norm(lam[1:]))
        if nr <= 1e-14:
            break
        u = np.zeros_like(lam)
        u[0] = 1.0
        u[1:] = lam[1:] / nr
        gradF = Z.T @ u
        r = np.concatenate([g + nu * gradF, [lam[0] + nr]])
        if np.linalg.norm(r) <= 1e-13 * max(1.0, np.linalg.norm(g)):
            break
        # Jacobian of the system in (mu, nu)
        P = (np.eye(lam.size - 1) - np.outer(lam[1:] / nr, lam[1:] / nr)) / nr
        d_gradF = nu * (Z[1:, :].T @ P @ Z[1:, :])
        Jtop = np.hstack([d_gradF, gradF.reshape(-1, 1)])
        Jbot = np.hstack([gradF.reshape(1, -1), [[0.0]]])
        Jmat = np.vstack([Jtop, Jbot])
        try:
            step = np.linalg.lstsq(Jmat, -r, rcond=None)[0]
        except np.linalg.LinAlgError:
            break
        mu = mu + step[:k]
        nu = max(0.0, nu + step[k])
    return mu


def _feasible_conset(lam_p: np.ndarray, Z: np.ndarray, d: int) -> ConeSet:
    flat: ConeSet = Zero(d) if Z.size == 0 else FinitelyGenerated(np.hstack([Z, -Z]))
    return simplify(Intersect(NegSoc(d), Translate(lam_p, flat)))


def _solve_negsoc(prog: SocLinearProgram, tol: float) -> LpOutcome:
    c, G, b = prog.c, prog.G, prog.b
    d = c.size
    lam_p, *_ = np.linalg.lstsq(G, b, rcond=None)
    if np.linalg.norm(G @ lam_p - b) > tol * max(1.0, np.linalg.norm(b)):
        return LpOutcome(LpStatus.INFEASIBLE, math.inf, ArgminSet("empty"))
    Z = null_space(G)
    if Z.size == 0:
        if _margin(lam_p) >= -tol:
            return LpOutcome(LpStatus.OPTIMAL, float(c @ lam_p), ArgminSet("singleton", point=lam_p))
        return LpOutcome(LpStatus.INFEASIBLE, math.inf, ArgminSet("empty"))

    structure = subspace_negsoc_structure(Z)
    feas_margin, lam_feas = affine_negsoc_margin(lam_p, Z, structure)
    if feas_margin < -tol:
        return LpOutcome(LpStatus.INFEASIBLE, math.inf, ArgminSet("empty"))
    if feas_margin < 0:
        lam_feas = _lorentz.project_neg_soc(lam_feas)

    g = Z.T @ c
    if np.linalg.norm(g) <= 1e-12 * max(1.0, np.linalg.norm(c)):
        value = float(c @ lam_feas)
        return LpOutcome(LpStatus.OPTIMAL, value,
                         ArgminSet("full_feasible", feasible=_feasible_conset(lam_p, Z, d)))

    kind, witness = structure
    ray_gain = None
    if kind == "ray":
        ray_gain = float(c @ witness)
        if ray_gain < -RECESSION_DELTA:
            return LpOutcome(LpStatus.UNBOUNDED, -math.inf, ArgminSet("empty"))
    elif kind == "full":
        if _min_objective_over_recession(g, Z, witness) < -RECESSION_DELTA:
            return LpOutcome(LpStatus.UNBOUNDED, -math.inf, ArgminSet("empty"))

    # bounded: minimize the reduced linear objective over the slice
    value, mu_best, hit_cap = _minimize_reduced(lam_p, Z, g, lam_feas)
    if hit_cap:
        return LpOutcome(LpStatus.UNATTAINED, float(c @ lam_p + g @ mu_best), ArgminSet("empty"))
    mu_best = _kkt_polish(lam_p, Z, g, mu_best)
    lam_star = lam_p + Z @ mu_best
    if _margin(lam_star) < -1e-8 * max(1.0, np.linalg.norm(lam_star)):
        lam_star = _lorentz.project_neg_soc(lam_star)
    # vertex candidate
    if np.linalg.norm(b) <= tol and 0.0 < float(c @ lam_star):
        lam_star = np.zeros(d)
    value = float(c @ lam_star)

    argmin: ArgminSet = ArgminSet("singleton", point=lam_star)
    if kind == "ray" and ray_gain is not None and abs(ray_gain) <= RECESSION_DELTA:
        # objective flat along the recession ray: the argmin extends with it
        argmin = ArgminSet("ray", point=lam_star, direction=witness)
        if np.linalg.norm(lam_star) <= 1e-10:
            argmin = ArgminSet("ray", point=None, direction=witness)
    return LpOutcome(LpStatus.OPTIMAL, value, argmin)


def _minimize_reduced(lam_p, Z, g, lam_feas, caps=(1e2, 1e4)) -> tuple[float, np.ndarray, bool]:
    margin, margin_grad = _smooth_margin_factory(lam_p, Z)
    mu_start = Z.T @ (lam_feas - lam_p)
    prev_val = None
    mu_best = mu_start
    for cap in caps:
        cons = [{"type": "ineq", "fun": margin, "jac": margin_grad},
                {"type": "ineq", "fun": lambda m: cap * cap - float(m @ m),
                 "jac": lambda m: -2.0 * m}]
        res = minimize(lambda m: float(g @ m), mu_start, jac=lambda m: g,
                       constraints=cons, method="SLSQP",
                       options={"maxiter": 500, "ftol": 1e-16})
        mu_best = res.x if res.x is not None else mu_start
        val = float(g @ mu_best)
        at_cap = float(np.linalg.norm(mu_best)) >= 0.98 * cap
        if not at_cap:
            return val, mu_best, False
        if prev_val is not None and val > prev_val - 1e-10 * max(1.0, abs(val)):
            return val, mu_best, True
        prev_val = val
        mu_start = mu_best
    return float(g @ mu_best), mu_best, True


_LP_CACHE: dict[tuple, LpOutcome] = {}


def _cone_key(cone: ConeSet) -> bytes:
    if isinstance(cone, Zero):
        return b"zero"
    if isinstance(cone, NegSoc):
        return b"negsoc"
    if isinstance(cone, Ray):
        return b"ray" + np.round(cone.direction, 14).tobytes()
    return repr(cone).encode()


def solve_cone_lp(prog: SocLinearProgram, tol: float = FEAS_TOL) -> LpOutcome:
    """Solve the structured cone LP (cached on the normalized objective:
    positive scaling of c scales the value and fixes the argmin)."""
    cone = simplify(prog.cone)
    s = float(np.linalg.norm(prog.c))
    c_hat = prog.c / s if s > 0 else prog.c
    key = (_cone_key(cone), np.round(prog.G, 14).tobytes(),
           np.round(prog.b, 14).tobytes(), np.round(c_hat, 14).tobytes(), tol)
    hit = _LP_CACHE.get(key)
    if hit is None:
        if len(_LP_CACHE) > 4096:
            _LP_CACHE.clear()
        hit = _solve_cone_lp_impl(SocLinearProgram(c_hat, prog.G, prog.b, cone), tol)
        _LP_CACHE[key] = hit
    value = hit.value * s if math.isfinite(hit.value) else hit.value
    if s == 0:
        value = hit.value
    return LpOutcome(hit.status, value, hit.argmin, hit.dual_certificate)


def _solve_cone_lp_impl(prog: SocLinearProgram, tol: float) -> LpOutcome:
    cone = prog.cone
    c, G, b = prog.c, prog.G, prog.b
    d = c.size
    scale_b = max(1.0, float(np.linalg.norm(b)))
    if isinstance(cone, Zero):
        if np.linalg.norm(b) <= tol * scale_b:
            return LpOutcome(LpStatus.OPTIMAL, 0.0, ArgminSet("singleton", point=np.zeros(d)))
        return LpOutcome(LpStatus.INFEASIBLE, math.inf, ArgminSet("empty"))
    if isinstance(cone, Ray):
        dirn = cone.direction
        w = G @ dirn
        gain = float(c @ dirn)
        if np.linalg.norm(w) <= tol:
            if np.linalg.norm(b) > tol * scale_b:
                return LpOutcome(LpStatus.INFEASIBLE, math.inf, ArgminSet("empty"))
            if gain < -RECESSION_DELTA:
                return LpOutcome(LpStatus.UNBOUNDED, -math.inf, ArgminSet("empty"))
            if gain <= RECESSION_DELTA:
                return LpOutcome(LpStatus.OPTIMAL, 0.0, ArgminSet("ray", direction=dirn))
            return LpOutcome(LpStatus.OPTIMAL, 0.0,
                             ArgminSet("singleton", point=np.zeros(d)))
        t = float(w @ b) / float(w @ w)
        if t < -tol or np.linalg.norm(t * w - b) > tol * scale_b:
            return LpOutcome(LpStatus.INFEASIBLE, math.inf, ArgminSet("empty"))
        t = max(t, 0.0)
        lam = t * dirn
        return LpOutcome(LpStatus.OPTIMAL, float(c @ lam), ArgminSet("singleton", point=lam))
    if isinstance(cone, NegSoc):
        return _solve_negsoc(prog, tol)
    raise cone_sets.UnsupportedSet(f"cone LP over {type(cone).__name__}")


# ---------------------------------------------------------------------------
# assembly from the constraint map
# ---------------------------------------------------------------------------


def clean_objective(c: np.ndarray, scale: float) -> np.ndarray:
    """Zero out floating noise relative to the assembly scale so that
    genuinely degenerate objectives are recognized as such."""
    c = np.asarray(c, dtype=float).copy()
    thr = 5e-14 * max(1.0, scale)
    c[np.abs(c) <= thr] = 0.0
    return c


def lp_objective_vector(phi: SmoothMapOracle, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Coefficients of lam -> -<v, (Hess<lam,Phi>(x) + curvature(x;lam)) v>."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    q = quadratic_in_direction(phi, x, v)
    ctilde = -q
    scale = float(np.abs(phi.hessian(x)).max()) * float(v @ v)
    val = SocVector.from_array(phi.value(x))
    if soc_geometry.classify(val) is PointClass.BOUNDARY_NONZERO:
        J = phi.jacobian(x)
        Jhat = J.copy()
        Jhat[0] = -Jhat[0]
        C = Jhat.T @ J
        h = -float(v @ C @ v) / val.x0
        ctilde[0] -= h
        scale = max(scale, float(np.abs(C).max()) * float(v @ v) / abs(val.x0))
    return clean_objective(ctilde, scale)


def direction_is_critical(phi: SmoothMapOracle, x, xstar, v, tol: float = 1e-9) -> bool:
    """v in K(x, xstar): Jacobian image tangent to Q and orthogonal to xstar."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    xstar = np.asarray(xstar, dtype=float)
    T = soc_geometry.tangent_cone_Q(SocVector.from_array(phi.value(x)))
    jv = phi.jacobian(x) @ v
    if not cone_sets.membership(T, jv, tol):
        return False
    return abs(float(xstar @ v)) <= tol * max(1.0, float(np.linalg.norm(xstar)) * float(np.linalg.norm(v)))


def multiplier_program(phi: SmoothMapOracle, x, xstar, v) -> SocLinearProgram:
    x = np.asarray(x, dtype=float)
    cone = soc_geometry.normal_cone_Q(SocVector.from_array(phi.value(x)))
    return SocLinearProgram(
        c=lp_objective_vector(phi, x, v),
        G=phi.jacobian(x).T,
        b=np.asarray(xstar, dtype=float),
        cone=cone,
    )


def solve_multiplier_lp(phi: SmoothMapOracle, pair, v,
                        tol: float = FEAS_TOL) -> LpOutcome:
    """Argmin multipliers for the direction v (the set entering the
    graphical-derivative formula); rejects non-critical directions."""
    x, xstar = np.asarray(pair.x, dtype=float), np.asarray(pair.xstar, dtype=float)
    if not direction_is_critical(phi, x, xstar, v):
        raise DirectionNotCriticalError("direction lies outside the critical cone")
    return solve_cone_lp(multiplier_program(phi, x, xstar, v), tol)


# ---------------------------------------------------------------------------
# approximate dual certificates
# ---------------------------------------------------------------------------


def _search_dual_point(A, q, b, target, alpha, cap):
    """max b.z s.t. margin(A z + q + alpha e0) >= 0, ||z|| <= cap."""
    n = A.shape[1]
    qa = q.copy()
    qa[0] += alpha
    eps2 = 1e-30

    def margin(z):
        w = A @ z + qa
        return float(w[0]) - math.sqrt(float(w[1:] @ w[1:]) + eps2)

    cons = [{"type": "ineq", "fun": margin},
            {"type": "ineq", "fun": lambda z: cap * cap - float(z @ z)}]
    rng = np.random.default_rng(3)
    best = None
    for z0 in [np.zeros(n)] + [rng.standard_normal(n) for _ in range(4)]:
        if np.linalg.norm(b) == 0:
            res = minimize(lambda z: -margin(z), z0, method="SLSQP",
                           constraints=cons[1:], options={"maxiter": 400, "ftol": 1e-14})
        else:
            res = minimize(lambda z: -float(b @ z), z0, method="SLSQP",
                           constraints=cons, options={"maxiter": 400, "ftol": 1e-14})
        if res.x is None:
            continue
        z = res.x
        if best is None or float(b @ z) > float(b @ best) or \
                (np.linalg.norm(b) == 0 and margin(z) > margin(best)):
            best = z
    return best


def solve_dual_lp(phi: SmoothMapOracle, pair, v, eps: float,
                  tol: float = FEAS_TOL) -> DualCertificate:
    """z_eps with dist(J z + <v,Hess v>; Q) <= eps and dual gap >= -eps.

    Tries the exact dual first (tight in the Slater and singleton cases),
    then the slack-relaxed form needed when the multiplier set is a ray and
    the objective vanishes along it.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    outcome = solve_multiplier_lp(phi, pair, v, tol)
    if outcome.status is not LpStatus.OPTIMAL:
        raise CertificateFailedError(f"primal status {outcome.status.value}")
    x = np.asarray(pair.x, dtype=float)
    b = np.asarray(pair.xstar, dtype=float)
    A = phi.jacobian(x)
    q = quadratic_in_direction(phi, x, np.asarray(v, dtype=float))
    p_star = outcome.value

    for alpha in (0.0, 0.25 * eps, 0.5 * eps):
        for cap in (10.0, 1e3, Z_NORM_CAP):
            z = _search_dual_point(A, q, b, p_star, alpha, cap)
            if z is None:
                continue
            cone_res = _lorentz.dist_soc(A @ z + q)
            gap = float(b @ z) - p_star
            if cone_res <= eps and gap >= -eps:
                return DualCertificate(z=z, eps=eps, cone_residual=cone_res, gap_residual=gap)
    raise CertificateFailedError("no dual point met both tolerances within the norm cap")


# ---------------------------------------------------------------------------
# brute-force oracle (tests only)
# ---------------------------------------------------------------------------


def brute_force_lp_oracle(prog: SocLinearProgram, grid: int = 33,
                          radius: float = 4.0, refine: int = 9) -> float:
    """Best objective over a refined grid of the feasible region.

    Parametrizes the affine slice, scans a cube of side 2*radius in the
    slice coordinates, and zooms ``refine`` times around the incumbent
    (keeping four cells of slack so the minimizer cannot be stranded).
    Intended as an independent check of ``solve_cone_lp`` on small cases.
    """
    cone = simplify(prog.cone)
    c, G, b = prog.c, prog.G, prog.b
    d = c.size
    feas_tol = 1e-9

    if isinstance(cone, Zero):
        return 0.0 if np.linalg.norm(b) <= feas_tol else math.inf

    if isinstance(cone, Ray):
        def feasible_ray(t):
            return np.linalg.norm(t * (G @ cone.direction) - b) <= feas_tol * max(1.0, np.linalg.norm(b))
        best = math.inf
        lo, hi = 0.0, radius
        for _ in range(refine):
            ts = np.linspace(lo, hi, grid)
            vals = [(float(c @ (t * cone.direction)), t) for t in ts if feasible_ray(t)]
            if not vals:
                break
            best, t_best = min(vals)
            w = (hi - lo) / (grid - 1)
            lo, hi = max(0.0, t_best - w), t_best + w
        return best

    lam_p, *_ = np.linalg.lstsq(G, b, rcond=None)
    if np.linalg.norm(G @ lam_p - b) > feas_tol * max(1.0, np.linalg.norm(b)):
        return math.inf
    Z = null_space(G)
    if Z.size == 0:
        return float(c @ lam_p) if _margin(lam_p) >= -feas_tol else math.inf

    k = Z.shape[1]
    center = np.zeros(k)
    width = radius
    best = math.inf
    for _ in range(refine):
        axes = [np.linspace(center[i] - width, center[i] + width, grid) for i in range(k)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)
        lams = lam_p[None, :] + mesh @ Z.T
        margins = -lams[:, 0] - np.linalg.norm(lams[:, 1:], axis=1)
        ok = margins >= -1e-9
        if not np.any(ok):
            width *= 0.5
            continue
        vals = lams[ok] @ c
        j = int(np.argmin(vals))
        best = min(best, float(vals[j]))
        center = mesh[ok][j]
        width = 4.0 * (2.0 * width / (grid - 1))
    return best
