"""Independent numeric oracles shared by the tests.

These deliberately avoid the closed forms they are used to check: distances
come from refined grid minimization, tangent cones from stepping along
sampled directions, normal cones from the variational-inequality pairing.
"""
import numpy as np


def grid_min_distance(point2d, feasible_mask, radius, grid=41, levels=8):
    """min ||p - y|| over feasible y in a 2-d box, by zoomed grid scan."""
    p = np.asarray(point2d, dtype=float)
    center = p.copy()
    width = radius
    best = np.inf
    for _ in range(levels):
        xs = np.linspace(center[0] - width, center[0] + width, grid)
        ys = np.linspace(center[1] - width, center[1] + width, grid)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        ok = feasible_mask(pts)
        if not np.any(ok):
            width *= 0.5
            continue
        d = np.linalg.norm(pts[ok] - p, axis=1)
        j = int(np.argmin(d))
        best = min(best, float(d[j]))
        center = pts[ok][j]
        width = 4.0 * (2.0 * width / (grid - 1))
    return best


def oracle_dist_soc(x):
    """Grid-minimization distance to the Lorentz cone.

    Rotational symmetry around the axis reduces the problem exactly to the
    planar cone {(a, b) : |b| <= a} with the point (x0, ||xr||); the planar
    problem is solved by zoomed grid search.
    """
    x = np.asarray(x, dtype=float)
    p = np.array([x[0], np.linalg.norm(x[1:])])
    r = 2.0 * max(1.0, float(np.linalg.norm(p)))

    def mask(pts):
        return np.abs(pts[:, 1]) <= pts[:, 0]

    return grid_min_distance(p, mask, r)


def oracle_dist_r2minus(p):
    p = np.asarray(p, dtype=float)
    r = 2.0 * max(1.0, float(np.linalg.norm(p)))

    def mask(pts):
        return (pts[:, 0] <= 0) & (pts[:, 1] <= 0)

    return grid_min_distance(p, mask, r)


def sampled_tangent_directions(member, x, rng, count=200, t=1e-7, tol=1e-9):
    """Directions d with x + t d still members, for tangent-cone probing."""
    x = np.asarray(x, dtype=float)
    dirs = []
    for _ in range(count):
        d = rng.standard_normal(x.size)
        d /= np.linalg.norm(d)
        if member(x + t * d, tol):
            dirs.append(d)
    return dirs


def random_soc_point(rng, m, cls="any"):
    """Point of Q (interior / boundary / any) built by construction."""
    xr = rng.standard_normal(m)
    nr = np.linalg.norm(xr)
    if cls == "boundary":
        return np.concatenate([[nr], xr])
    if cls == "interior":
        return np.concatenate([[nr + abs(rng.standard_normal()) + 0.1], xr])
    f = rng.uniform(1.0, 2.0) if rng.random() < 0.7 else 1.0
    return np.concatenate([[nr * f], xr]) * rng.uniform(0.2, 2.0)
