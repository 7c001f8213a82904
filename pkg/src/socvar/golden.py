"""Bundled reference problems and the golden verification suite.

The constraint map is the planar quadratic map into R^3 whose feasible set
is the upper half-plane {x2 >= 0} while the cone image touches every point
class of Q; metric subregularity holds everywhere with modulus sqrt(2),
but metric regularity and nondegeneracy fail at the interesting points.
The perturbation map (x1, x2^2) drives the isolated-calmness cases.

Every expected value here was derived by hand from the closed forms and is
frozen; ``run_golden_suite`` re-computes all of them and reports a
pass/fail table used by the command line and the acceptance tests.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import cone_sets, conic_lp, constraint_system, graph_derivative, stability
from .constraint_system import StationaryPair
from .oracles import QuadraticMap
from .stability import VariationalSystem

SQRT2 = float(np.sqrt(2.0))
KAPPA = SQRT2  # subregularity modulus valid at every feasible point


def constraint_map() -> QuadraticMap:
    """Phi(x) = (sqrt2 x1^2 + x2, x1^2 + x2/sqrt2, x1^2 - x2/sqrt2)."""
    return QuadraticMap(
        c=np.zeros(3),
        g=np.array([[0.0, 1.0], [0.0, 1.0 / SQRT2], [0.0, -1.0 / SQRT2]]),
        H=np.array([
            [[2.0 * SQRT2, 0.0], [0.0, 0.0]],
            [[2.0, 0.0], [0.0, 0.0]],
            [[2.0, 0.0], [0.0, 0.0]],
        ]),
    )


def perturbation_map() -> QuadraticMap:
    """f(x) = (x1, x2^2)."""
    return QuadraticMap(
        c=np.zeros(2),
        g=np.array([[1.0, 0.0], [0.0, 0.0]]),
        H=np.array([
            [[0.0, 0.0], [0.0, 0.0]],
            [[0.0, 0.0], [0.0, 2.0]],
        ]),
    )


@dataclass(frozen=True)
class StationaryCase:
    name: str
    x: np.ndarray
    xstar: np.ndarray
    tangent_member: callable  # explicit (v, vstar) -> bool


def _tcase_vertex_zero(v, vs, tol=1e-9):
    # [R x (0,inf) x {(0,0)}] U [R x {0} x {0} x R_-]
    if v[1] > tol:
        return abs(vs[0]) <= tol and abs(vs[1]) <= tol
    if abs(v[1]) <= tol:
        return abs(vs[0]) <= tol and vs[1] <= tol
    return False


def _tcase_vertex_nonzero(v, vs, tol=1e-9):
    # {v2 = 0, v1* = 0}
    return abs(v[1]) <= tol and abs(vs[0]) <= tol


def _tcase_interior(v, vs, tol=1e-9):
    # R^2 x {(0,0)}
    return abs(vs[0]) <= tol and abs(vs[1]) <= tol


def stationary_cases() -> list[StationaryCase]:
    return [
        StationaryCase("case1", np.array([0.0, 0.0]), np.array([0.0, 0.0]), _tcase_vertex_zero),
        StationaryCase("case2", np.array([0.0, 0.0]), np.array([0.0, -1.0]), _tcase_vertex_nonzero),
        StationaryCase("case3", np.array([1.0, 0.0]), np.array([0.0, 0.0]), _tcase_vertex_zero),
        StationaryCase("case4", np.array([1.0, 0.0]), np.array([0.0, -1.0]), _tcase_vertex_nonzero),
        StationaryCase("case5", np.array([0.0, 1.0]), np.array([0.0, 0.0]), _tcase_interior),
    ]


@dataclass(frozen=True)
class CalmnessCase:
    name: str
    x: np.ndarray
    p: np.ndarray
    calm: bool


def calmness_cases() -> list[CalmnessCase]:
    return [
        CalmnessCase("calm1", np.array([0.0, 0.0]), np.array([0.0, 0.0]), False),
        CalmnessCase("calm2", np.array([0.0, 0.0]), np.array([0.0, -1.0]), True),
        CalmnessCase("calm3", np.array([1.0, 0.0]), np.array([1.0, 0.0]), False),
        CalmnessCase("calm4", np.array([1.0, 0.0]), np.array([1.0, -1.0]), True),
        CalmnessCase("calm5", np.array([0.0, 1.0]), np.array([0.0, 1.0]), True),
    ]


def probe_grid(points_per_axis: int = 10) -> np.ndarray:
    """Deterministic 4-d grid with exact zeros on every axis (10^4 points)."""
    axis = np.array([-2.0, -1.25, -0.75, -0.25, 0.0, 0.25, 0.75, 1.25, 2.0, 3.0])
    axis = axis[:points_per_axis]
    mesh = np.meshgrid(axis, axis, axis, axis, indexing="ij")
    return np.stack(mesh, axis=-1).reshape(-1, 4)


def graph_sampler_factory(x_bar: np.ndarray, xstar_bar: np.ndarray):
    """Points of gph N_Gamma for the reference constraint near a base pair.

    The feasible set is {x2 >= 0}, so the graph is
    {(x, 0) : x2 > 0} union {(x1, 0, 0, s) : s <= 0}.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    xstar_bar = np.asarray(xstar_bar, dtype=float)

    def sampler(rng: np.random.Generator, radius: float):
        if np.linalg.norm(xstar_bar) > 0:
            # normal branch: x2 pinned to 0, the normal component moves
            x = np.array([x_bar[0] + radius * rng.uniform(-1, 1), 0.0])
            s = np.array([0.0, xstar_bar[1] + radius * rng.uniform(-1, 1)])
            return x, s
        if x_bar[1] > 0:
            x = x_bar + radius * rng.uniform(-1, 1, size=2)
            return x, np.zeros(2)
        if rng.random() < 0.5:
            x = np.array([x_bar[0] + radius * rng.uniform(-1, 1),
                          radius * rng.uniform(0.1, 1.0)])
            return x, np.zeros(2)
        x = np.array([x_bar[0] + radius * rng.uniform(-1, 1), 0.0])
        return x, np.array([0.0, -radius * rng.uniform(0.0, 1.0)])

    return sampler


def local_solution_map(p: np.ndarray) -> np.ndarray:
    """The unique solution of p in f(x) + N_Gamma(x) near the calm2 data."""
    p = np.asarray(p, dtype=float)
    if p[1] <= 0:
        return np.array([p[0], 0.0])
    return np.array([p[0], np.sqrt(p[1])])


# ---------------------------------------------------------------------------
# the golden suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckRow:
    name: str
    passed: bool
    detail: str

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _check_tangent_case(phi, case: StationaryCase, grid: np.ndarray) -> CheckRow:
    pair = StationaryPair(case.x, case.xstar)
    cone = graph_derivative.tangent_cone_graph(phi, pair, kappa=KAPPA,
                                               mscq_verified=True)
    mismatches = 0
    for row in grid:
        v, vs = row[:2], row[2:]
        expected = case.tangent_member(v, vs)
        got = cone.contains(v, vs)
        if expected != got:
            mismatches += 1
    return CheckRow(f"tangent-graph {case.name}", mismatches == 0,
                    f"{mismatches} disagreements on {len(grid)} probes")


def _check_multipliers(phi) -> list[CheckRow]:
    rows = []
    pair2 = StationaryPair(np.array([0.0, 0.0]), np.array([0.0, -1.0]))
    lp = conic_lp.solve_multiplier_lp(phi, pair2, np.array([1.0, 0.0]))
    target = np.array([-1.0, 1.0 / SQRT2, 1.0 / SQRT2])
    ok = (lp.status is conic_lp.LpStatus.OPTIMAL and lp.argmin.kind == "singleton"
          and np.linalg.norm(lp.argmin.point - target) <= 1e-10)
    err = (np.linalg.norm(lp.argmin.point - target)
           if lp.argmin.kind == "singleton" else np.inf)
    rows.append(CheckRow("argmin multiplier case2", ok, f"|err| = {err:.2e}"))

    pair5 = StationaryPair(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
    ms = constraint_system.multiplier_set(phi, pair5)
    gen_target = -np.array([SQRT2, -1.0, 1.0])
    if ms.kind == "ray" and np.linalg.norm(ms.generator) > 0:
        g = ms.generator / np.linalg.norm(ms.generator)
        t = gen_target / np.linalg.norm(gen_target)
        cosdist = 1.0 - float(g @ t)
        rows.append(CheckRow("multiplier ray case5", cosdist <= 1e-10,
                             f"cosine distance = {cosdist:.2e}"))
    else:
        rows.append(CheckRow("multiplier ray case5", False, f"kind = {ms.kind}"))
    return rows


def _check_calmness(phi, f) -> list[CheckRow]:
    rows = []
    for case in calmness_cases():
        sys = VariationalSystem(f, phi, case.p, case.x)
        verdict = stability.check_isolated_calmness(sys, KAPPA, kappa_source="paper-estimate")
        rows.append(CheckRow(f"calmness {case.name}", verdict.calm == case.calm,
                             f"got {'calm' if verdict.calm else 'not_calm'}, "
                             f"expected {'calm' if case.calm else 'not_calm'}"))
    return rows


def _check_cq(phi) -> list[CheckRow]:
    rows = []
    ok = not constraint_system.check_rcq(phi, np.array([0.0, 1.0]))
    rows.append(CheckRow("metric regularity fails at (0,1)", ok,
                         "RCQ verdict False as required" if ok else "RCQ unexpectedly True"))
    pair5 = StationaryPair(np.array([0.0, 1.0]), np.array([0.0, 0.0]))
    ms = constraint_system.multiplier_set(phi, pair5)
    lam = ms.a_multiplier()
    d = constraint_system.check_dual_cq(phi, pair5, lam)
    s = constraint_system.check_srcq(phi, pair5, lam)
    rows.append(CheckRow("dual CQ equals SRCQ at (0,1)", (d == s) and not d,
                         f"dual={d}, srcq={s}"))
    return rows


def _check_mscq(phi) -> CheckRow:
    kappa_hat, _ = constraint_system.probe_mscq(phi, np.array([0.5, 0.0]),
                                                radius=0.5, grid=21)
    return CheckRow("subregularity modulus probe", kappa_hat <= SQRT2 + 0.05,
                    f"kappa_hat = {kappa_hat:.6f} (bound sqrt2 = {SQRT2:.6f})")


def run_golden_suite(include_probe: bool = True,
                     grid_points: int | None = None) -> tuple[bool, list[CheckRow], float]:
    """Run every golden check; returns (all_passed, rows, elapsed_seconds)."""
    t0 = time.perf_counter()
    phi = constraint_map()
    f = perturbation_map()
    grid = probe_grid() if grid_points is None else probe_grid()[:grid_points]
    rows: list[CheckRow] = []
    for case in stationary_cases():
        rows.append(_check_tangent_case(phi, case, grid))
    rows += _check_multipliers(phi)
    rows += _check_calmness(phi, f)
    rows += _check_cq(phi)
    if include_probe:
        rows.append(_check_mscq(phi))
    elapsed = time.perf_counter() - t0
    return all(r.passed for r in rows), rows, elapsed
