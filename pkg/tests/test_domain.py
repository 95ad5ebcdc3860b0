#
# Run with py.test
#
import os
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# Import from repo instead of site-packages.
parentdir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, parentdir)

from opconvex import domain, linalg
from opconvex.errors import ConfigError, DomainError

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
mus = st.lists(st.floats(min_value=0.5, max_value=1.5), min_size=2,
               max_size=3)


class TestBuildAk(object):

    def test_two_variables(self):
        a = domain.build_Ak(domain.DomainSpec.of(1, 1), (1, 1))
        np.testing.assert_allclose(a, [[2.0, -1.0], [-1.0, 2.0]])

    def test_one_variable(self):
        a = domain.build_Ak(domain.DomainSpec.of(2), (3,))
        np.testing.assert_allclose(a, [[3.0]])

    def test_three_variables(self):
        a = domain.build_Ak(domain.DomainSpec.of(1, 2, 3), (1, 2, 3))
        expected = 3.0 * np.eye(3) - np.ones((3, 3))
        np.testing.assert_allclose(a, expected)

    def test_bad_point(self):
        d = domain.DomainSpec.of(1, 1)
        with pytest.raises(DomainError, match='positive'):
            domain.build_Ak(d, (0.0, 1.0))
        with pytest.raises(DomainError, match='2-tuple'):
            domain.build_Ak(d, (1.0,))

    def test_bad_spec(self):
        with pytest.raises(ConfigError):
            domain.DomainSpec.of(1, -1)
        with pytest.raises(ConfigError):
            domain.DomainSpec(3, (1.0, 1.0))


class TestMembership(object):

    def test_boundary(self):
        """det A_2 = 4 * 0.25 - 1 = 0."""
        m = domain.domain_contains(domain.DomainSpec.of(1, 1), (0.5, 0.5))
        assert m
        assert m.margin == pytest.approx(0.0, abs=1e-12)

    def test_outside(self):
        m = domain.domain_contains(domain.DomainSpec.of(1, 1), (0.4, 0.5))
        assert not m.member
        assert m.margin < 0

    def test_one_variable_is_everything(self):
        d = domain.DomainSpec.of(5.0)
        for t in (1e-3, 0.5, 40.0):
            assert domain.domain_contains(d, (t,)).member

    def test_to_json(self):
        doc = domain.domain_contains(domain.DomainSpec.of(1, 1),
                                     (1, 1)).to_json()
        assert doc['member'] is True
        assert doc['margin'] == pytest.approx(1.0)
        assert doc['A_k']['rows'] == 2

    def test_closed_form(self):
        assert domain.d2_closed_form(1, 1, 0.5, 0.5)
        assert not domain.d2_closed_form(2, 2, 1, 0.9)

    def test_cross_check(self):
        rng = np.random.default_rng(31)
        points = [tuple(rng.uniform(0.01, 3.0, 2)) for _ in range(2000)]
        checked, mismatches, first = domain.d2_cross_check((1.0, 2.0), points)
        assert checked == 2000
        assert mismatches == 0
        assert first is None

    def test_cross_check_needs_two(self):
        with pytest.raises(ConfigError):
            domain.d2_cross_check((1.0, 1.0, 1.0), [(1.0, 1.0, 1.0)])

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, mu=mus)
    def test_convex_set(self, seed, mu):
        """The midpoint of two members is a member."""
        d = domain.DomainSpec.of(*mu)
        rng = np.random.default_rng(seed)
        s = domain.random_member(d, rng)
        t = domain.random_member(d, rng)
        mid = tuple((x + y) / 2.0 for x, y in zip(s, t))
        assert domain.domain_contains(d, mid).margin >= -1e-10

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, mu=mus, c=st.floats(min_value=1.0, max_value=10.0))
    def test_ray(self, seed, mu, c):
        """t in D_k implies c t in D_k for c >= 1."""
        d = domain.DomainSpec.of(*mu)
        t = domain.random_member(d, np.random.default_rng(seed))
        assert domain.domain_contains(d, tuple(c * v for v in t)).member

    def test_nonmember_margin(self):
        d = domain.DomainSpec.of(1, 1)
        t = domain.random_nonmember(d, np.random.default_rng(3))
        assert domain.domain_contains(d, t).margin < -0.1

    def test_nonmember_needs_two_variables(self):
        with pytest.raises(ConfigError):
            domain.random_nonmember(domain.DomainSpec.of(1),
                                    np.random.default_rng(0))


class TestClassicalHessian(object):

    def test_one_variable(self):
        h, p = domain.classical_hessian(domain.DomainSpec.of(1), (1,))
        np.testing.assert_allclose(h, [[-0.25]])
        np.testing.assert_allclose(p, [[0.5 * 0.25]])

    def test_matches_function_spec(self):
        d = domain.DomainSpec.of(1.0, 2.0, 0.5)
        t = (0.7, 1.3, 2.1)
        h, _ = domain.classical_hessian(d, t)
        np.testing.assert_allclose(h, d.function().classical_hessian(t),
                                   rtol=1e-12, atol=1e-14)

    def test_boundary_is_negative_semidefinite(self):
        h, _ = domain.classical_hessian(domain.DomainSpec.of(1, 1),
                                        (0.5, 0.5))
        assert linalg.min_eigenvalue(-h) >= -1e-12

    @settings(max_examples=30, deadline=None)
    @given(t=st.lists(st.floats(min_value=0.05, max_value=4.0), min_size=3,
                      max_size=3))
    def test_hadamard_factorization(self, t):
        """H o P^(o-1) = -A_k, and P is PSD."""
        d = domain.DomainSpec.of(1.0, 0.5, 2.0)
        h, p = domain.classical_hessian(d, t)
        np.testing.assert_allclose(h * domain.hadamard_inverse(p),
                                   -domain.build_Ak(d, t).real,
                                   rtol=1e-10, atol=1e-10)
        np.testing.assert_allclose(h, -domain.build_Ak(d, t).real * p,
                                   rtol=1e-12, atol=1e-14)
        assert linalg.min_eigenvalue(p) >= -1e-12

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, mu=mus)
    def test_concave_inside(self, seed, mu):
        d = domain.DomainSpec.of(*mu)
        t = domain.random_member(d, np.random.default_rng(seed))
        h, _ = domain.classical_hessian(d, t)
        assert linalg.min_eigenvalue(-h) >= -1e-10

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, mu=mus)
    def test_not_concave_outside(self, seed, mu):
        d = domain.DomainSpec.of(*mu)
        t = domain.random_nonmember(d, np.random.default_rng(seed))
        h, _ = domain.classical_hessian(d, t)
        assert linalg.max_eigenvalue(h) > 1e-9

    def test_hadamard_inverse_zero(self):
        with pytest.raises(DomainError):
            domain.hadamard_inverse(np.zeros((2, 2)))
