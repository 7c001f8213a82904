import numpy as np
import pytest

from helpers import oracle_dist_soc, oracle_dist_r2minus, sampled_tangent_directions, random_soc_point
from socvar import cone_sets, soc_geometry
from socvar.soc_geometry import (PointClass, SocVector, classify, dist_to_Q,
                                 dist_to_R2minus, normal_cone_Q, project,
                                 project_neg, reduction, tangent_cone_Q)

SQRT2 = np.sqrt(2.0)


def vec(*xs):
    return SocVector.from_array(np.array(xs, dtype=float))


class TestSocVector:
    def test_hat_involution_exact(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            v = SocVector(rng.standard_normal(), rng.standard_normal(rng.integers(1, 6)))
            assert (v.hat().hat().as_array() == v.as_array()).all()

    def test_hat_preserves_norm(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            v = SocVector(rng.standard_normal(), rng.standard_normal(3))
            assert v.hat().norm() == pytest.approx(v.norm(), rel=1e-15)


class TestClassify:
    def test_interior(self):
        assert classify(vec(1, 0, 0)) is PointClass.INTERIOR

    def test_origin(self):
        assert classify(vec(0, 0, 0)) is PointClass.ORIGIN

    def test_boundary_from_map_image(self):
        # the golden map at (1, 0) lands on the boundary off the vertex
        assert classify(vec(SQRT2, 1, 1)) is PointClass.BOUNDARY_NONZERO

    def test_outside(self):
        assert classify(vec(0, 1, 0)) is PointClass.OUTSIDE
        assert classify(vec(-1, 0, 0)) is PointClass.OUTSIDE

    def test_exactly_one_class(self):
        rng = np.random.default_rng(2)
        for _ in range(300):
            x = SocVector.from_array(rng.standard_normal(4))
            assert classify(x) in PointClass

    def test_boundary_precedence_near_tolerance(self):
        x = vec(1.0, 1.0 + 1e-12, 0.0)
        assert classify(x) is PointClass.BOUNDARY_NONZERO

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            classify(vec(1, 0), tol=0.0)


class TestProject:
    def test_idempotent_on_cone(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            q = SocVector.from_array(random_soc_point(rng, 3))
            assert np.allclose(project(q).as_array(), q.as_array(), atol=1e-14)

    def test_polar_case_maps_to_zero(self):
        assert np.allclose(project(vec(-2, 1, 0)).as_array(), 0.0)

    def test_oblique_case_matches_grid_oracle(self):
        # frozen from the grid-minimization oracle: nearest point of Q to
        # (0, 2, 0) is (1, 1, 0)
        p = project(vec(0, 2, 0))
        assert np.allclose(p.as_array(), [1.0, 1.0, 0.0], atol=1e-12)
        assert oracle_dist_soc([0, 2, 0]) == pytest.approx(np.sqrt(2), abs=1e-5)

    def test_projection_is_nearest_point(self):
        rng = np.random.default_rng(4)
        for _ in range(40):
            x = rng.standard_normal(3) * 2
            d_proj = np.linalg.norm(project(SocVector.from_array(x)).as_array() - x)
            assert d_proj == pytest.approx(oracle_dist_soc(x), abs=2e-5)

    def test_moreau_decomposition(self):
        rng = np.random.default_rng(5)
        for _ in range(10_000):
            x = rng.standard_normal(rng.integers(2, 5)) * rng.uniform(0.1, 5)
            xv = SocVector.from_array(x)
            plus = project(xv).as_array()
            minus = project_neg(xv).as_array()
            assert np.abs(plus + minus - x).max() <= 1e-10
            assert abs(plus @ minus) <= 1e-10


class TestSelfDuality:
    def test_nonnegative_pairing_inside(self):
        rng = np.random.default_rng(6)
        for _ in range(2000):
            p = random_soc_point(rng, 3)
            q = random_soc_point(rng, 3)
            assert p @ q >= -1e-12

    def test_nonnegative_pairing_detects_membership(self):
        rng = np.random.default_rng(7)
        qs = [random_soc_point(rng, 2) for _ in range(1000)]
        # include the extreme rays, which decide the dual description
        for u in np.linspace(0, 2 * np.pi, 60, endpoint=False):
            qs.append(np.array([1.0, np.cos(u), np.sin(u)]) / np.sqrt(2))
        for _ in range(200):
            x = rng.standard_normal(3) * 2
            if all(x @ q >= 0 for q in qs):
                assert dist_to_Q(SocVector.from_array(x)) <= 1e-6


class TestDistances:
    def test_zero_on_cone(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            x = random_soc_point(rng, 2)
            # boundary points carry one-ulp construction noise
            assert dist_to_Q(SocVector.from_array(x)) <= 1e-12 * max(1.0, np.linalg.norm(x))
        assert dist_to_Q(vec(2, 1, 0)) == 0.0

    def test_golden_map_negative_axis(self):
        # image of (0, x2) with x2 < 0 lies in -Q at distance -sqrt2*x2
        for x2 in (-0.5, -1.0, -3.0):
            img = vec(x2, x2 / SQRT2, -x2 / SQRT2)
            assert dist_to_Q(img) == pytest.approx(-SQRT2 * x2, rel=1e-14)

    def test_halfway_point(self):
        assert dist_to_Q(vec(0, 1, 0)) == pytest.approx(SQRT2 / 2, rel=1e-14)
        assert oracle_dist_soc([0, 1, 0]) == pytest.approx(SQRT2 / 2, abs=1e-5)

    def test_matches_projection_everywhere(self):
        rng = np.random.default_rng(9)
        for _ in range(10_000):
            m = int(rng.integers(1, 4))
            x = rng.standard_normal(m + 1) * rng.uniform(0.1, 4)
            if rng.random() < 0.3:  # near-boundary points
                b = random_soc_point(rng, m, cls="boundary")
                x = b + 1e-8 * rng.standard_normal(m + 1)
            xv = SocVector.from_array(x)
            d_formula = dist_to_Q(xv)
            d_proj = np.linalg.norm(project(xv).as_array() - x)
            assert abs(d_formula - d_proj) <= 1e-12 * max(1.0, d_proj)

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(10)
        for _ in range(60):
            m = int(rng.integers(1, 4))
            x = rng.standard_normal(m + 1) * 2
            assert dist_to_Q(SocVector.from_array(x)) == pytest.approx(
                oracle_dist_soc(x), abs=1e-4)


class TestReduction:
    def test_image_in_quadrant_iff_in_cone(self):
        rng = np.random.default_rng(11)
        for _ in range(500):
            x = SocVector.from_array(rng.standard_normal(3) * 2)
            p = reduction(x)
            in_q = classify(x).in_cone()
            assert (p.p1 <= 1e-12 and p.p2 <= 1e-12) == in_q

    def test_branch_on_cone(self):
        rng = np.random.default_rng(12)
        for _ in range(50):
            x = SocVector.from_array(random_soc_point(rng, 2))
            assert dist_to_R2minus(reduction(x)) <= 1e-12 * max(1.0, x.norm() ** 2)
        assert dist_to_R2minus(reduction(vec(2, 1, 0))) == 0.0

    def test_branch_negative_cone(self):
        # x in -Q: the distance is -x0
        x = vec(-2, 1, 1)
        assert dist_to_R2minus(reduction(x)) == pytest.approx(2.0, rel=1e-15)

    def test_branch_outside_with_nonnegative_head(self):
        x = vec(1, 2, 0)  # outside both cones, x0 >= 0
        assert dist_to_R2minus(reduction(x)) == pytest.approx(4 - 1, rel=1e-15)

    def test_branch_outside_with_negative_head(self):
        x = vec(-1, 2, 0)
        expect = np.hypot(4 - 1, 1)
        assert dist_to_R2minus(reduction(x)) == pytest.approx(expect, rel=1e-15)

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(60):
            x = SocVector.from_array(rng.standard_normal(3) * 2)
            p = reduction(x)
            assert dist_to_R2minus(p) == pytest.approx(
                oracle_dist_r2minus(p.as_array()), abs=1e-4)


class TestTangentNormalCones:
    def test_interior_tangent_is_everything(self):
        assert isinstance(tangent_cone_Q(vec(5, 1, 1)), cone_sets.All)

    def test_vertex_tangent_is_the_cone(self):
        assert isinstance(tangent_cone_Q(vec(0, 0, 0)), cone_sets.Soc)

    def test_boundary_tangent_halfspace_checked_by_stepping(self):
        x = vec(SQRT2, 1, 1)
        T = tangent_cone_Q(x)
        assert isinstance(T, cone_sets.Halfspace)
        assert np.allclose(T.normal / np.linalg.norm(T.normal),
                           np.array([-SQRT2, 1, 1]) / 2.0)
        rng = np.random.default_rng(14)

        def member(p, tol):
            return p[0] - np.linalg.norm(p[1:]) >= 0.0

        for d in sampled_tangent_directions(member, x.as_array(), rng, count=300):
            assert cone_sets.membership(T, d, 1e-5)

    def test_outside_raises(self):
        with pytest.raises(soc_geometry.OutsideConeError):
            tangent_cone_Q(vec(0, 1, 0))
        with pytest.raises(soc_geometry.OutsideConeError):
            normal_cone_Q(vec(0, 1, 0))

    def test_normal_cone_leaves(self):
        assert isinstance(normal_cone_Q(vec(5, 1, 1)), cone_sets.Zero)
        assert isinstance(normal_cone_Q(vec(0, 0, 0)), cone_sets.NegSoc)
        N = normal_cone_Q(vec(1, 1, 0))
        assert isinstance(N, cone_sets.Ray)
        assert np.allclose(N.direction / np.linalg.norm(N.direction),
                           np.array([-1, 1, 0]) / SQRT2)

    def test_normal_pairs_nonpositively_with_tangents(self):
        x = vec(1, 1, 0)
        N = normal_cone_Q(x)
        rng = np.random.default_rng(15)

        def member(p, tol):
            return p[0] - np.linalg.norm(p[1:]) >= 0.0

        tangents = sampled_tangent_directions(member, x.as_array(), rng, count=300)
        n = N.direction
        assert all(n @ t <= 1e-6 for t in tangents)


class TestPropagationInequality:
    def test_boundary_estimate_for_golden_map(self):
        # near a nonzero boundary image, dist to the cone is controlled by
        # the planar reduction with constant 1/(sqrt2 * Phi0(xbar))
        from socvar.golden import constraint_map
        phi = constraint_map()
        x_bar = np.array([1.0, 0.0])
        phi0 = phi.value(x_bar)[0]
        c = 1.0 / (SQRT2 * phi0)
        rng = np.random.default_rng(16)
        checked = 0
        for _ in range(1000):
            x = x_bar + rng.uniform(-0.15, 0.15, size=2)
            img = SocVector.from_array(phi.value(x))
            lhs = dist_to_Q(img)
            rhs = c * dist_to_R2minus(reduction(img))
            assert lhs <= rhs + 1e-12
            checked += 1
        assert checked == 1000
