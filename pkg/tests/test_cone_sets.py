import numpy as np
import pytest

from socvar import cone_sets
from socvar.cone_sets import (All, Empty, FinitelyGenerated, Halfspace,
                              Hyperplane, Intersect, LinearImage, NegSoc,
                              Preimage, Ray, Singleton, Soc, Sum, Translate,
                              Zero, equal_sets, membership, normal_cone_of,
                              polar, sample, simplify, span, to_json)

SQRT2 = np.sqrt(2.0)


def _leaf_instances(rng, n=3):
    a = rng.standard_normal(n)
    d = rng.standard_normal(n)
    G = rng.standard_normal((n, 3))
    return [Zero(n), All(n), Soc(n), NegSoc(n), Halfspace(a), Hyperplane(a),
            Ray(d), FinitelyGenerated(G)]


class TestMembership:
    def test_all_accepts_everything(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            assert membership(All(2), rng.standard_normal(2))

    def test_ray_sum(self):
        S = Sum(Ray(np.array([0.0, -1.0])), Zero(2))
        assert membership(S, np.array([0.0, -3.0]))
        assert not membership(S, np.array([0.0, 3.0]))
        assert not membership(S, np.array([1.0, -3.0]))

    def test_image_of_cone_slice(self):
        # the normal-to-critical-cone image at the vertex of the golden map:
        # J^T[T_{-Q}(lam) cap {J v}^perp] with J v = 0 and lam a nonzero
        # boundary multiplier; T_{-Q}(lam) is the halfspace of hat(lam) and
        # the image is the full axis {0} x R
        J = np.array([[0.0, 1.0], [0.0, 1 / SQRT2], [0.0, -1 / SQRT2]])
        lam = np.array([-1.0, 1 / SQRT2, 1 / SQRT2])
        lam_hat = np.array([1.0, 1 / SQRT2, 1 / SQRT2])
        inner = Intersect(Halfspace(lam_hat), Hyperplane(np.zeros(3)))
        S = LinearImage(J.T, inner)
        assert membership(S, np.array([0.0, 5.0]))
        assert membership(S, np.array([0.0, -5.0]))
        assert not membership(S, np.array([1.0, 0.0]))

    def test_image_of_negsoc_is_the_normal_cone(self):
        # J^T(-Q) itself is the normal cone of the feasible set: {0} x R_-
        J = np.array([[0.0, 1.0], [0.0, 1 / SQRT2], [0.0, -1 / SQRT2]])
        S = LinearImage(J.T, NegSoc(3))
        assert membership(S, np.array([0.0, -5.0]))
        assert not membership(S, np.array([0.0, 5.0]))
        assert not membership(S, np.array([1.0, 0.0]))

    def test_soc_and_neg_soc(self):
        assert membership(Soc(3), np.array([2.0, 1.0, 1.0]))
        assert not membership(Soc(3), np.array([1.0, 1.0, 1.0]))
        assert membership(NegSoc(3), np.array([-2.0, 1.0, 1.0]))

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError):
            membership(Zero(3), np.zeros(2))

    def test_translate(self):
        S = Translate(np.array([1.0, 0.0]), Ray(np.array([0.0, 1.0])))
        assert membership(S, np.array([1.0, 2.0]))
        assert not membership(S, np.array([0.0, 2.0]))

    def test_preimage(self):
        M = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
        S = Preimage(M, Soc(3))
        assert membership(S, np.array([2.0, 1.0]))
        assert not membership(S, np.array([1.0, 2.0]))

    def test_sum_tolerance_is_relative(self):
        S = Sum(Ray(np.array([1.0, 0.0])), Ray(np.array([0.0, 1.0])))
        v = np.array([1.0, 1.0])
        assert membership(S, v + 5e-9, tol=1e-8)
        assert not membership(S, np.array([-1.0, 0.0]), tol=1e-8)


class TestPolar:
    def test_leaf_polars(self):
        n = 3
        a = np.array([1.0, 2.0, -1.0])
        assert isinstance(polar(All(n)), Zero)
        assert isinstance(polar(Zero(n)), All)
        assert isinstance(polar(Soc(n)), NegSoc)
        assert isinstance(polar(NegSoc(n)), Soc)
        assert isinstance(polar(Halfspace(a)), Ray)
        assert isinstance(polar(Ray(a)), Halfspace)
        assert isinstance(polar(Hyperplane(a)), FinitelyGenerated)

    def test_bipolar_structural(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            for leaf in _leaf_instances(rng):
                back = polar(polar(leaf))
                assert equal_sets(simplify(leaf), back, samples=25), repr(leaf)

    def test_polarity_pairing(self):
        rng = np.random.default_rng(2)
        for leaf in _leaf_instances(rng):
            P = polar(leaf)
            pts = sample(simplify(leaf), rng, 35)
            duals = sample(simplify(P), rng, 30)
            for s in pts:
                for p in duals:
                    assert s @ p <= 1e-10 * max(1.0, np.linalg.norm(s) * np.linalg.norm(p))

    def test_polar_rejects_translates(self):
        with pytest.raises(cone_sets.UnsupportedSet):
            polar(Translate(np.array([1.0, 1.0]), Ray(np.array([1.0, 0.0]))))


class TestNormalCone:
    def test_whole_space(self):
        assert isinstance(normal_cone_of(All(2), np.array([3.0, -1.0])), Zero)

    def test_quadrant_cone_on_a_face(self):
        # R x R_+ at (v1, 0): normals {0} x R_-
        S = FinitelyGenerated(np.array([[1.0, -1.0, 0.0], [0.0, 0.0, 1.0]]))
        N = normal_cone_of(S, np.array([2.5, 0.0]))
        assert membership(N, np.array([0.0, -1.0]))
        assert not membership(N, np.array([0.0, 1.0]))
        assert not membership(N, np.array([1.0, 0.0]))

    def test_axis_line(self):
        # R x {0} at (v1, 0): normals {0} x R
        S = Hyperplane(np.array([0.0, 1.0]))
        N = normal_cone_of(S, np.array([-1.0, 0.0]))
        assert membership(N, np.array([0.0, 7.0]))
        assert membership(N, np.array([0.0, -7.0]))
        assert not membership(N, np.array([1.0, 0.0]))

    def test_halfspace_cases(self):
        a = np.array([0.0, -1.0])
        S = Halfspace(a)
        assert isinstance(normal_cone_of(S, np.array([1.0, 2.0])), Zero)
        N = normal_cone_of(S, np.array([1.0, 0.0]))
        assert isinstance(N, Ray)

    def test_rejects_nonmembers(self):
        with pytest.raises(cone_sets.NotMemberError):
            normal_cone_of(Soc(3), np.array([0.0, 1.0, 0.0]))

    def test_agrees_with_variational_inequality(self):
        rng = np.random.default_rng(3)
        cones = [Soc(3), NegSoc(3), Halfspace(rng.standard_normal(3)),
                 Ray(rng.standard_normal(3)),
                 FinitelyGenerated(rng.standard_normal((3, 2)))]
        for S in cones:
            S = simplify(S)
            pts = sample(S, rng, 6)
            probes = sample(S, rng, 60)
            for v in pts:
                N = normal_cone_of(S, v)
                for w in sample(simplify(N), rng, 12):
                    # w normal iff <w, s - v> <= 0 over the set
                    for s in probes:
                        assert w @ (s - v) <= 1e-8 * max(
                            1.0, np.linalg.norm(w) * np.linalg.norm(s - v))


class TestEqualSets:
    def test_identical_leaves(self):
        assert equal_sets(Zero(2), Zero(2))

    def test_additive_identity(self):
        d = np.array([1.0, -2.0])
        assert equal_sets(Sum(Zero(2), Ray(d)), Ray(d))

    def test_bipolar_halfspace(self):
        a = np.array([2.0, 1.0])
        assert equal_sets(polar(polar(Halfspace(a))), Halfspace(a))

    def test_detects_difference(self):
        assert not equal_sets(Soc(3), NegSoc(3))
        assert not equal_sets(Ray(np.array([1.0, 0.0])), Ray(np.array([0.0, 1.0])))


class TestSumMonotonicity:
    def test_members_stay_members_when_adding_cones(self):
        rng = np.random.default_rng(4)
        for _ in range(40):
            A = simplify(Ray(rng.standard_normal(3)))
            B = simplify(Halfspace(rng.standard_normal(3)))  # contains 0
            v = sample(A, rng, 3)[-1]
            assert membership(Sum(A, B), v, 1e-7)


class TestSimplify:
    def test_zero_ray_normalizes(self):
        assert isinstance(simplify(Ray(np.zeros(3))), Zero)

    def test_soc_hyperplane_slices(self):
        n = 3
        interior = np.array([-2.0, 0.5, 0.0])  # inside -Q
        boundary = np.array([-1.0, 1.0, 0.0])  # on bd(-Q)
        assert isinstance(simplify(Intersect(Soc(n), Hyperplane(interior))), Zero)
        sliced = simplify(Intersect(Soc(n), Hyperplane(boundary)))
        assert isinstance(sliced, Ray)
        assert np.allclose(sliced.direction / np.linalg.norm(sliced.direction),
                           np.array([1.0, 1.0, 0.0]) / SQRT2)

    def test_rank_one_preimage_collapses(self):
        J = np.array([[0.0, 1.0], [0.0, 1 / SQRT2], [0.0, -1 / SQRT2]])
        K = simplify(Preimage(J, Soc(3)))
        assert isinstance(K, Halfspace)
        assert membership(K, np.array([5.0, 1.0]))
        assert not membership(K, np.array([5.0, -1.0]))

    def test_empty_propagates(self):
        assert isinstance(simplify(Sum(Empty(2), All(2))), Empty)

    def test_intersect_with_zero_checks_membership(self):
        flat = Translate(np.array([1.0, 0.0]), span([np.array([0.0, 1.0])]))
        assert isinstance(simplify(Intersect(Zero(2), flat)), Empty)


class TestSerialization:
    def test_tagged_union_forms(self):
        a = np.array([1.0, 2.0])
        assert to_json(Zero(2)) == {"set": "zero", "dim": 2}
        assert to_json(Soc(2)) == {"set": "soc", "dim": 2}
        assert to_json(Halfspace(a)) == {"set": "halfspace", "normal": [1.0, 2.0]}
        j = to_json(Sum(Ray(a), Zero(2)))
        assert j["set"] == "sum" and j["left"]["set"] == "ray"

    def test_round_trips_through_json_module(self):
        import json
        doc = to_json(Intersect(Soc(3), Hyperplane(np.array([1.0, 0.5, -0.25]))))
        again = json.loads(json.dumps(doc))
        assert again == doc
