"""Command-line front end.

Problem files are JSON documents describing the quadratic constraint map
(and optionally the perturbation map and named points); see README.md for
the format reference.  All output is deterministic JSON or aligned text:
no timestamps, fixed key order.

Exit codes: 0 success, 1 negative analysis verdict under --strict,
2 input error, 3 infeasible point, 4 internal defect.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import cone_sets, conic_lp, constraint_system, golden, graph_derivative, stability
from .constraint_system import (InvalidStationaryPairError, NotFeasibleError,
                                StationaryPair)
from .oracles import QuadraticMap
from .soc_geometry import SocVector, classify, normal_cone_Q, tangent_cone_Q
from .stability import VariationalSystem

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_DEFECT = 4


class InputError(Exception):
    pass


def _parse_component(entry, n, what):
    try:
        c = float(entry["c"])
        g = np.asarray(entry["g"], dtype=float)
        H = np.asarray(entry["H"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed {what} component: {exc}") from exc
    if g.shape != (n,) or H.shape != (n, n):
        raise InputError(f"{what} component has inconsistent dimensions")
    asym = float(np.abs(H - H.T).max()) if H.size else 0.0
    if asym > 1e-12:
        print(f"warning: {what} Hessian symmetrized (asymmetry {asym:.2e})",
              file=sys.stderr)
    return c, g, H


def _quadratic_from_entries(entries, n, what) -> QuadraticMap:
    cs, gs, Hs = [], [], []
    for entry in entries:
        c, g, H = _parse_component(entry, n, what)
        cs.append(c)
        gs.append(g)
        Hs.append(H)
    return QuadraticMap(np.array(cs), np.array(gs), np.array(Hs))


class ProblemFile:
    def __init__(self, doc: dict):
        try:
            self.n = int(doc["n"])
            self.m = int(doc["m"])
            phi_entries = doc["phi"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"missing or malformed header: {exc}") from exc
        if len(phi_entries) != self.m + 1:
            raise InputError(f"phi must have m+1 = {self.m + 1} components")
        self.phi = _quadratic_from_entries(phi_entries, self.n, "phi")
        self.f = None
        if "f" in doc:
            if len(doc["f"]) != self.n:
                raise InputError(f"f must have n = {self.n} components")
            self.f = _quadratic_from_entries(doc["f"], self.n, "f")
        self.points: dict[str, dict] = {}
        for p in doc.get("points", []):
            if "name" not in p:
                raise InputError("every named point needs a 'name'")
            self.points[p["name"]] = p

    @staticmethod
    def load(path: str) -> "ProblemFile":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read problem file: {exc}") from exc
        return ProblemFile(doc)


def _vector(text: str, n: int, what: str) -> np.ndarray:
    try:
        v = np.array([float(t) for t in text.split(",")], dtype=float)
    except ValueError as exc:
        raise InputError(f"malformed {what}: {exc}") from exc
    if v.size != n:
        raise InputError(f"{what} must have {n} components")
    return v


def _resolve_point(args, prob: ProblemFile, key: str, what: str):
    if getattr(args, "point", None):
        entry = prob.points.get(args.point)
        if entry is None:
            raise InputError(f"no named point '{args.point}' in the file")
        if key not in entry:
            raise InputError(f"named point '{args.point}' has no '{key}'")
        return np.asarray(entry[key], dtype=float)
    raw = getattr(args, what, None)
    if raw is None:
        raise InputError(f"provide --point or --{what.replace('_', '-')}")
    return _vector(raw, prob.n, what)


def _emit(payload: dict, args) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))


def cmd_classify(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    val = SocVector.from_array(prob.phi.value(x))
    cls = classify(val, args.tol)
    if not cls.in_cone():
        print(json.dumps({"error": "point is infeasible",
                          "phi": val.as_array().tolist(),
                          "class": cls.value}, sort_keys=True))
        return EXIT_INFEASIBLE
    payload = {
        "x": x.tolist(),
        "phi": val.as_array().tolist(),
        "class": cls.value,
        "tangent_cone_gamma": cone_sets.to_json(
            constraint_system.tangent_cone_Gamma(prob.phi, x)),
        "normal_cone_gamma": cone_sets.to_json(
            constraint_system.normal_cone_Gamma(prob.phi, x)),
    }
    _emit(payload, args)
    return EXIT_OK


def cmd_multipliers(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    xstar = _resolve_point(args, prob, "x_star", "xstar")
    pair = StationaryPair(x, xstar)
    ms = constraint_system.multiplier_set(prob.phi, pair)
    payload = {"x": x.tolist(), "x_star": xstar.tolist(),
               "multiplier_set": ms.to_json()}
    _emit(payload, args)
    if args.strict and ms.is_empty():
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_critical_cone(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    xstar = _resolve_point(args, prob, "x_star", "xstar")
    K = constraint_system.critical_cone(prob.phi, StationaryPair(x, xstar))
    _emit({"x": x.tolist(), "x_star": xstar.tolist(),
           "critical_cone": cone_sets.to_json(K)}, args)
    return EXIT_OK


def cmd_gder(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    xstar = _resolve_point(args, prob, "x_star", "xstar")
    v = _vector(args.v, prob.n, "v")
    res = graph_derivative.graphical_derivative(
        prob.phi, StationaryPair(x, xstar), v, kappa=args.kappa,
        mscq_verified=args.kappa is not None)
    payload = res.to_json()
    if not res.mscq_verified:
        payload["caveat"] = "formal value, MSCQ unverified"
    _emit(payload, args)
    return EXIT_OK


def cmd_tangent_graph(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    xstar = _resolve_point(args, prob, "x_star", "xstar")
    cone = graph_derivative.tangent_cone_graph(
        prob.phi, StationaryPair(x, xstar), kappa=args.kappa,
        mscq_verified=args.kappa is not None)
    payload = cone.to_json()
    if not cone.mscq_verified:
        payload["caveat"] = "formal value, MSCQ unverified"
    _emit(payload, args)
    return EXIT_OK


def cmd_check_cq(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    payload: dict = {"x": x.tolist(), "rcq": constraint_system.check_rcq(prob.phi, x)}
    if getattr(args, "xstar", None) is not None or (
            args.point and "x_star" in prob.points.get(args.point, {})):
        xstar = _resolve_point(args, prob, "x_star", "xstar")
        pair = StationaryPair(x, xstar)
        ms = constraint_system.validate_pair(prob.phi, pair)
        lam = ms.a_multiplier()
        payload["x_star"] = xstar.tolist()
        payload["multiplier_kind"] = ms.kind
        payload["dual_cq"] = constraint_system.check_dual_cq(prob.phi, pair, lam)
        payload["srcq"] = constraint_system.check_srcq(prob.phi, pair, lam)
    _emit(payload, args)
    if args.strict and not all(v for k, v in payload.items()
                               if k in ("rcq", "dual_cq", "srcq")):
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_probe_mscq(args) -> int:
    prob = ProblemFile.load(args.file)
    x = _resolve_point(args, prob, "x", "x")
    kappa_hat, report = constraint_system.probe_mscq(prob.phi, x, args.radius, args.grid)
    payload = {"x": x.tolist(), "radius": args.radius, "grid": args.grid,
               "kappa_hat": kappa_hat,
               "points_examined": len(report.points),
               "note": "falsification probe, not a proof"}
    if args.full_report:
        payload["points"] = report.points
    _emit(payload, args)
    return EXIT_OK


def cmd_calmness(args) -> int:
    prob = ProblemFile.load(args.file)
    if prob.f is None:
        raise InputError("the problem file has no perturbation map 'f'")
    x = _resolve_point(args, prob, "x", "x")
    p = _resolve_point(args, prob, "p", "p")
    sys_ = VariationalSystem(prob.f, prob.phi, p, x)
    kappa_source = "user"
    kappa = args.kappa
    if kappa is None:
        kappa_hat, _ = constraint_system.probe_mscq(prob.phi, x, radius=0.25, grid=9)
        kappa = max(kappa_hat * 1.1, 1e-6)
        kappa_source = "probe"
    verdict = stability.check_isolated_calmness(sys_, kappa, kappa_source)
    payload = verdict.to_json()
    if not args.full_report:
        payload.pop("search_report")
    _emit(payload, args)
    if args.strict and not verdict.calm:
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_reproduce_paper(args) -> int:
    passed, rows, elapsed = golden.run_golden_suite()
    if args.json:
        print(json.dumps({"passed": passed,
                          "checks": [r.to_json() for r in rows]}, sort_keys=True))
    else:
        width = max(len(r.name) for r in rows)
        for r in rows:
            mark = "PASS" if r.passed else "FAIL"
            print(f"{r.name:<{width}}  {mark}  {r.detail}")
        print(f"{'total':<{width}}  {'PASS' if passed else 'FAIL'}  "
              f"{sum(r.passed for r in rows)}/{len(rows)} checks, {elapsed:.1f}s")
    return EXIT_OK if passed else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="socvar",
        description="Second-order variational analysis of a Lorentz-cone "
                    "constraint system.")
    ap.add_argument("--tol", type=float, default=1e-9,
                    help="classification tolerance (default 1e-9)")
    ap.add_argument("--json", action="store_true",
                    help="compact machine-readable output")
    ap.add_argument("--strict", action="store_true",
                    help="exit 1 on negative analysis verdicts")
    ap.add_argument("--kappa", type=float, default=None,
                    help="metric subregularity modulus to assert")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        p = sub.add_parser(name, **kwargs)
        p.set_defaults(fn=fn)
        return p

    p = add("classify", cmd_classify, help="point class and first-order cones")
    p.add_argument("file")
    p.add_argument("--point", help="named point from the file")
    p.add_argument("--x", help="comma-separated coordinates")

    for name, fn, needs_xstar in (("multipliers", cmd_multipliers, True),
                                  ("critical-cone", cmd_critical_cone, True),
                                  ("tangent-graph", cmd_tangent_graph, True)):
        p = add(name, fn, help=f"{name.replace('-', ' ')} of a stationary pair")
        p.add_argument("file")
        p.add_argument("--point")
        p.add_argument("--x")
        p.add_argument("--xstar")

    p = add("gder", cmd_gder, help="graphical derivative of the normal-cone map")
    p.add_argument("file")
    p.add_argument("--point")
    p.add_argument("--x")
    p.add_argument("--xstar")
    p.add_argument("-v", required=True, help="direction, comma-separated")

    p = add("check-cq", cmd_check_cq, help="constraint-qualification certificates")
    p.add_argument("file")
    p.add_argument("--point")
    p.add_argument("--x")
    p.add_argument("--xstar")

    p = add("probe-mscq", cmd_probe_mscq, help="empirical subregularity modulus")
    p.add_argument("file")
    p.add_argument("--point")
    p.add_argument("--x")
    p.add_argument("--radius", type=float, default=0.5)
    p.add_argument("--grid", type=int, default=11)
    p.add_argument("--full-report", action="store_true")

    p = add("calmness", cmd_calmness, help="isolated-calmness verdict")
    p.add_argument("file")
    p.add_argument("--point")
    p.add_argument("--x")
    p.add_argument("--p")
    p.add_argument("--full-report", action="store_true")

    add("reproduce-paper", cmd_reproduce_paper,
        help="run the bundled golden verification suite")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NotFeasibleError as exc:
        print(f"infeasible point: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InvalidStationaryPairError as exc:
        print(f"invalid stationary pair: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except conic_lp.DirectionNotCriticalError as exc:
        print(f"direction not critical: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defect channel
        print(f"internal defect: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DEFECT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
