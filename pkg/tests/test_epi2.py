import numpy as np
import pytest

from socvar import cone_sets, epi2, soc_geometry
from socvar.epi2 import (ExtendedReal, InvalidNormalError, critical_cone_Q,
                         epi_second_derivative, graphical_derivative_NQ,
                         pdc_failure_witness, recovery_sequence,
                         second_order_quotient)
from socvar.soc_geometry import SocVector

SQRT2 = np.sqrt(2.0)


def vec(*xs):
    return SocVector.from_array(np.array(xs, dtype=float))


def boundary_point(rng, m):
    xr = rng.standard_normal(m)
    return SocVector(np.linalg.norm(xr), xr)


def boundary_critical_direction(rng, x, inside=False):
    """Unit direction on the boundary of the critical cone for y = hat(x).

    Orthogonal to hat(x).  The part of that hyperplane inside Q is exactly
    the ray through x, so ``inside`` returns x normalized; otherwise a
    random orthogonal direction off the cone is drawn.
    """
    if inside:
        return x.scale(1.0 / x.norm())
    xh = x.hat().as_array()
    for _ in range(100):
        d = rng.standard_normal(x.dim)
        d -= (d @ xh) / (xh @ xh) * xh
        n = np.linalg.norm(d)
        if n < 1e-9:
            continue
        d /= n
        v = SocVector.from_array(d)
        if not soc_geometry.classify(v).in_cone():
            return v
    raise AssertionError("no admissible direction found")


class TestExtendedReal:
    def test_tagged_infinity(self):
        inf = ExtendedReal.infinity()
        assert inf.is_infinite
        with pytest.raises(ValueError):
            inf.finite()
        assert not ExtendedReal.of(3.0).is_infinite


class TestEpiSecondDerivative:
    def test_interior_is_zero(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = SocVector.from_array(rng.standard_normal(3))
            out = epi_second_derivative(vec(2, 1, 0), vec(0, 0, 0), v)
            assert out.finite() == 0.0

    def test_edge_direction_gives_zero(self):
        x = vec(1, 1, 0)
        y = vec(-1, 1, 0)
        v = vec(1, 1, 0)
        assert epi_second_derivative(x, y, v).finite() == pytest.approx(0.0, abs=1e-15)

    def test_vertex_outside_cone_is_infinite(self):
        out = epi_second_derivative(vec(0, 0, 0), vec(-1, 0, 0), vec(0, 1, 0))
        assert out.is_infinite

    def test_boundary_formula_value(self):
        x = vec(1, 1, 0)
        y = vec(-2, 2, 0)  # 2 * hat(x)
        v = vec(0, 0, 3)   # orthogonal to hat(x), in the critical hyperplane
        out = epi_second_derivative(x, y, v)
        assert out.finite() == pytest.approx((y.norm() / x.norm()) * 9.0, rel=1e-12)

    def test_rejects_invalid_normal(self):
        with pytest.raises(InvalidNormalError):
            epi_second_derivative(vec(2, 1, 0), vec(1, 0, 0), vec(1, 0, 0))

    def test_positive_homogeneity_degree_two(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            x = boundary_point(rng, 3)
            y = x.hat().scale(abs(rng.standard_normal()))
            v = boundary_critical_direction(rng, x)
            base = epi_second_derivative(x, y, v).finite()
            for s in (0.5, 2.0, 10.0):
                scaled = epi_second_derivative(x, y, v.scale(s)).finite()
                assert scaled == pytest.approx(s * s * base, rel=1e-12, abs=1e-15)


class TestSecondOrderQuotient:
    def test_interior_vanishes_for_small_steps(self):
        x, y, v = vec(2, 1, 0), vec(0, 0, 0), vec(1, 1, 1)
        assert second_order_quotient(x, y, v, 1e-3).finite() == 0.0

    def test_vertex_value(self):
        y = vec(-1, 0, 0)
        v = vec(1, 0.5, 0)
        t = 0.25
        out = second_order_quotient(vec(0, 0, 0), y, v, t)
        assert out.finite() == pytest.approx(-2 * y.dot(v) / t, rel=1e-14)
        assert out.finite() >= 0

    def test_outside_is_infinite(self):
        assert second_order_quotient(vec(0, 0, 0), vec(0, 0, 0), vec(0, 1, 0), 0.1).is_infinite

    def test_requires_positive_step(self):
        with pytest.raises(ValueError):
            second_order_quotient(vec(1, 0, 0), vec(0, 0, 0), vec(1, 0, 0), 0.0)


class TestRecoverySequence:
    def test_directions_converge_and_stay_feasible(self):
        rng = np.random.default_rng(2)
        for _ in range(10):
            x = boundary_point(rng, 3)
            x = x.scale(1.0 / x.norm())
            y = x.hat()
            v = boundary_critical_direction(rng, x)
            errs = []
            for t in (1e-2, 1e-4, 1e-6):
                vt = recovery_sequence(x, y, v, t)
                step = x + vt.scale(t)
                assert abs(step.x0 - step.tail_norm()) <= 1e-9
                assert abs(t * vt.norm() - t) <= 1e-9
                errs.append((vt - v).norm())
            assert errs[0] > errs[1] > errs[2]

    def test_quotients_match_formula_along_sequence(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            x = boundary_point(rng, 2)
            x = x.scale(1.0 / x.norm())
            y = x.hat().scale(1.5)
            v = boundary_critical_direction(rng, x)
            target = epi_second_derivative(x, y, v).finite()
            q = second_order_quotient(x, y, recovery_sequence(x, y, v, 1e-4), 1e-4)
            assert not q.is_infinite
            assert abs(q.finite() - target) <= 1e-3

    def test_unnormalized_inputs_are_rescaled(self):
        x = vec(2, 2, 0)
        y = x.hat()
        v = vec(0, 0, -5)
        vt = recovery_sequence(x, y, v, 1e-3)
        step = x + vt.scale(1e-3)
        assert abs(step.x0 - step.tail_norm()) <= 1e-9
        assert vt.norm() == pytest.approx(1.0, abs=1e-9)


class TestEpiConvergence:
    def test_lower_bound_along_random_sequences(self):
        # liminf of quotients dominates the formula on critical directions
        rng = np.random.default_rng(4)
        for _ in range(100):
            cls = rng.integers(0, 3)
            if cls == 0:
                x, y = vec(2, 1, 0), vec(0, 0, 0)
                v = SocVector.from_array(rng.standard_normal(3))
            elif cls == 1:
                x = vec(0, 0, 0)
                y = SocVector.from_array(-np.abs(rng.standard_normal()) *
                                         np.concatenate([[1.5], rng.standard_normal(2) / 2]))
                v = SocVector.from_array(np.concatenate(
                    [[2.0 + abs(rng.standard_normal())], rng.standard_normal(2)]))
                v = v - y.scale(v.dot(y) / y.dot(y))  # orthogonalize into K
                if not soc_geometry.classify(v).in_cone():
                    continue
            else:
                x = boundary_point(rng, 2)
                x = x.scale(1.0 / x.norm())
                y = x.hat()
                v = boundary_critical_direction(rng, x)
            target = epi_second_derivative(x, y, v)
            if target.is_infinite:
                continue
            for t in (1e-2, 1e-3, 1e-4, 1e-5):
                vk = SocVector.from_array(v.as_array() + t * rng.standard_normal(x.dim))
                step = x + vk.scale(t)
                if step.x0 - step.tail_norm() < 0.0:
                    continue  # the indicator is infinite there: no constraint
                q = second_order_quotient(x, y, vk, t)
                assert not q.is_infinite
                assert q.finite() >= target.finite() - 1e-6 - 10 * t

    def test_upper_bound_with_recovery_or_constant_sequences(self):
        rng = np.random.default_rng(5)
        t = 1e-4
        for _ in range(60):
            x = boundary_point(rng, 3)
            x = x.scale(1.0 / x.norm())
            y = x.hat().scale(abs(rng.standard_normal()) + 0.2)
            inside = rng.random() < 0.5
            v = boundary_critical_direction(rng, x, inside=inside)
            target = epi_second_derivative(x, y, v).finite()
            if inside:
                q = second_order_quotient(x, y, v, t)  # constant sequence
            else:
                q = second_order_quotient(x, y, recovery_sequence(x, y, v, t), t)
            assert not q.is_infinite
            assert abs(q.finite() - target) <= 1e-3


class TestGraphicalDerivativeNQ:
    def test_interior(self):
        out = graphical_derivative_NQ(vec(2, 0, 0), vec(0, 0, 0), vec(1, 1, 1))
        assert isinstance(out, cone_sets.Zero)

    def test_vertex_interior_direction(self):
        out = graphical_derivative_NQ(vec(0, 0, 0), vec(0, 0, 0), vec(2, 1, 0))
        assert isinstance(out, cone_sets.Zero)

    def test_vertex_noncritical_direction_empty(self):
        out = graphical_derivative_NQ(vec(0, 0, 0), vec(0, 0, 0), vec(0, 1, 0))
        assert isinstance(out, cone_sets.Empty)

    def test_boundary_translate_against_graph_sampling(self):
        # frozen via difference quotients of the analytic graph of N_Q near
        # (x, y): graph points (q, s * hat(q)) for q on bd Q
        x = vec(1, 1, 0)
        y = vec(-1, 1, 0)
        v = vec(0, 0, 1)
        out = graphical_derivative_NQ(x, y, v)
        shift = v.hat().as_array() * (y.norm() / x.norm())
        rng = np.random.default_rng(6)
        # tangent candidates from the graph parametrization
        for _ in range(200):
            t = 10.0 ** rng.uniform(-6, -3)
            dq = rng.standard_normal(2)
            qr = x.xr + t * dq
            q = SocVector(np.linalg.norm(qr), qr)
            s = 1.0 + t * rng.standard_normal()
            w = (q.hat().scale(s) - y).as_array() / t
            vq = (q - x).as_array() / t
            if np.linalg.norm(vq - v.as_array()) < 0.3:
                continue  # only directions near v are informative
        # membership of the closed form: shift plus the normal cone
        assert cone_sets.membership(out, shift, 1e-9)
        nk = cone_sets.normal_cone_of(critical_cone_Q(x, y).representation, v.as_array())
        for n in cone_sets.sample(nk, rng, 10):
            assert cone_sets.membership(out, shift + n, 1e-7)

    def test_output_is_a_cone_translate(self):
        rng = np.random.default_rng(7)
        x = boundary_point(rng, 3)
        y = x.hat().scale(2.0)
        v = boundary_critical_direction(rng, x)
        out = graphical_derivative_NQ(x, y, v)
        K = critical_cone_Q(x, y)
        nk = cone_sets.normal_cone_of(K.representation, v.as_array())
        w = v.hat().as_array() * (y.norm() / x.norm())
        for n in cone_sets.sample(nk, rng, 20):
            assert cone_sets.membership(out, w + n, 1e-7)


class TestCriticalConeQ:
    def test_normal_membership_enforced(self):
        with pytest.raises(InvalidNormalError):
            critical_cone_Q(vec(1, 1, 0), vec(1, 0, 0))

    def test_representations(self):
        assert isinstance(critical_cone_Q(vec(2, 0, 0), vec(0, 0, 0)).representation,
                          cone_sets.All)
        assert isinstance(critical_cone_Q(vec(0, 0, 0), vec(0, 0, 0)).representation,
                          cone_sets.Soc)
        K = critical_cone_Q(vec(1, 1, 0), vec(0, 0, 0)).representation
        assert isinstance(K, cone_sets.Halfspace)
        K = critical_cone_Q(vec(1, 1, 0), vec(-1, 1, 0)).representation
        assert isinstance(K, cone_sets.Hyperplane)
        # vertex with boundary normal: the cone slices to a ray
        K = critical_cone_Q(vec(0, 0, 0), vec(-1, 1, 0)).representation
        assert isinstance(K, cone_sets.Ray)


class TestPdcFailureWitness:
    def test_witness_verifies_on_boundary(self):
        rng = np.random.default_rng(8)
        for m in (2, 3, 4, 5):
            x = boundary_point(rng, m)
            y, v, w = pdc_failure_witness(x)
            ncone = soc_geometry.normal_cone_Q(x)
            assert cone_sets.membership(ncone, y.as_array(), 1e-10)
            assert y.norm() > 0
            K = critical_cone_Q(x, y)
            assert cone_sets.membership(K.representation, v.as_array(), 1e-10)
            assert cone_sets.membership(graphical_derivative_NQ(x, y, v), w, 1e-10)
            nk = cone_sets.normal_cone_of(K.representation, v.as_array())
            assert not cone_sets.membership(nk, w, 1e-6)

    def test_interior_rejected(self):
        with pytest.raises(ValueError):
            pdc_failure_witness(vec(2, 1, 0))

    def test_m1_is_polyhedral_no_witness(self):
        # for m = 1 the identity DN_Q = N_K holds: the shift stays inside
        # the normal space, so the witness construction must refuse
        with pytest.raises(ValueError):
            pdc_failure_witness(vec(1, 1))
        x = vec(1, 1)
        y = x.hat()
        K = critical_cone_Q(x, y)
        rng = np.random.default_rng(9)
        for _ in range(50):
            t = rng.standard_normal()
            v = x.scale(t)  # the critical cone is the line through x
            assert cone_sets.membership(K.representation, v.as_array(), 1e-9)
            shift = v.hat().as_array() * (y.norm() / x.norm())
            nk = cone_sets.normal_cone_of(K.representation, v.as_array())
            assert cone_sets.membership(nk, shift, 1e-9)
