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

from opconvex import domain, funcalc, hessian
from opconvex.certify import report
from opconvex.errors import (DerivativeError, DomainError, SerializationError,
                             ShapeError)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)
orders = st.lists(st.integers(min_value=1, max_value=3), min_size=1,
                  max_size=3)

WINDOW = (0.5, 3.0)


def square():
    return funcalc.custom(lambda t: t * t, 1,
                          grad=lambda i, t: 2.0 * t[0],
                          hess=lambda i, j, t: 2.0, name='t^2')


def square_fn(t):
    return t * t


def cube_fn(t):
    return t ** 3


class TestDividedDifferences(object):

    def test_first(self):
        assert hessian.divided_diff_1(square_fn, 1.0, 3.0) == \
            pytest.approx(4.0)

    def test_first_fraction(self):
        """[1, 2] of t/(t+1) is 1/((1+1)(2+1))."""
        g = funcalc.fraction_product(1.0)
        value = hessian.divided_diff_1(lambda t: g(t), 1.0, 2.0)
        assert value == pytest.approx(1.0 / 6.0)

    def test_first_coincident(self):
        value = hessian.divided_diff_1(square_fn, 2.0, 2.0,
                                       lambda t: 2.0 * t)
        assert value == pytest.approx(4.0)

    def test_first_coincident_without_derivative(self):
        with pytest.raises(DerivativeError):
            hessian.divided_diff_1(square_fn, 2.0, 2.0)

    def test_second(self):
        value = hessian.divided_diff_2(cube_fn, 1.0, 2.0, 3.0)
        assert value == pytest.approx(6.0)

    def test_second_reciprocal(self):
        """[x, y, z] of 1/t is 1/(x y z)."""
        value = hessian.divided_diff_2(lambda t: 1.0 / t, 1.0, 2.0, 2.0,
                                       lambda t: -1.0 / t ** 2)
        assert value == pytest.approx(0.25)

    def test_second_all_coincident(self):
        value = hessian.divided_diff_2(square_fn, 2.0, 2.0, 2.0,
                                       lambda t: 2.0 * t, lambda t: 2.0)
        assert value == pytest.approx(1.0)

    @settings(max_examples=50, deadline=None)
    @given(x=st.floats(min_value=0.2, max_value=2.0),
           gaps=st.lists(st.floats(min_value=0.05, max_value=1.5), min_size=2,
                         max_size=2))
    def test_symmetric(self, x, gaps):
        """Permuting the nodes leaves [x, y, z] unchanged."""
        g = funcalc.fraction_product(1.5)
        y = x + gaps[0]
        z = y + gaps[1]

        def dd(a, b, c):
            return hessian.divided_diff_2(lambda t: g(t), a, b, c,
                                          lambda t: g.partial(0, (t,)),
                                          lambda t: g.second_partial(0, 0,
                                                                     (t,)))

        assert dd(x, y, z) == pytest.approx(dd(z, x, y), rel=1e-6, abs=1e-9)
        assert dd(x, y, z) == pytest.approx(dd(y, z, x), rel=1e-6, abs=1e-9)


class TestDataSetGrid(object):

    def test_properties(self):
        grid = hessian.DataSetGrid(((1.0, 2.0), (0.5, 1.0, 4.0)))
        assert grid.k == 2
        assert grid.order == (2, 3)
        assert grid.point((1, 2)) == (2.0, 4.0)
        assert list(grid.indices())[:2] == [(0, 0), (0, 1)]
        assert len(grid.points()) == 6

    def test_not_increasing(self):
        with pytest.raises(ShapeError, match='strictly increasing'):
            hessian.DataSetGrid(((1.0, 1.0),))

    def test_json(self):
        grid = hessian.DataSetGrid.from_json({'nodes': [[1, 2], [3]]})
        assert grid.to_json() == {'nodes': [[1.0, 2.0], [3.0]]}
        with pytest.raises(SerializationError):
            hessian.DataSetGrid.from_json({'points': []})

    def test_from_matrices(self):
        grid = hessian.DataSetGrid.from_matrices([np.diag([2.0, 1.0, 2.0]),
                                                  np.eye(2)])
        assert grid.order == (2, 1)
        assert grid.nodes[0] == pytest.approx((1.0, 2.0))

    def test_random_grid_gap(self):
        grid = hessian.random_grid(np.random.default_rng(0), (4, 2), WINDOW)
        for axis in grid.nodes:
            assert np.all(np.diff(axis) >= 0.05)
            assert WINDOW[0] <= axis[0] and axis[-1] <= WINDOW[1]


class TestGeneralizedHessian(object):

    def test_square_is_all_twos(self):
        grid = hessian.DataSetGrid(((0.5, 1.0, 2.5),))
        h = hessian.generalized_hessian(square(), grid, (1,))
        np.testing.assert_allclose(h.matrix, 2.0 * np.ones((3, 3)),
                                   atol=1e-10)

    def test_reciprocal_one_variable(self):
        grid = hessian.DataSetGrid(((1.0, 2.0),))
        h = hessian.generalized_hessian(funcalc.reciprocal_product(1.0),
                                        grid, (0,))
        np.testing.assert_allclose(h.matrix, [[2.0, 1.0], [1.0, 0.5]],
                                   atol=1e-10)

    def test_fraction_two_variables(self):
        grid = hessian.DataSetGrid(((1.0, 2.0), (1.0, 2.0)))
        h = hessian.generalized_hessian(funcalc.fraction_product(1.0, 1.0),
                                        grid, (0, 0))
        closed = hessian.closed_form_hessian_fraction((1.0, 1.0), grid, (0, 0))
        np.testing.assert_allclose(h.matrix, closed.matrix, atol=1e-12)

    def test_blocks(self):
        grid = hessian.DataSetGrid(((1.0, 2.0), (1.0, 2.0, 3.0)))
        h = hessian.closed_form_hessian_reciprocal(grid, (0, 1))
        assert h.offsets == (0, 2, 5)
        assert h.block(1, 0).shape == (3, 2)
        np.testing.assert_array_equal(h.block(0, 1), h.block(1, 0).T)

    def test_point_grid_is_classical(self):
        """An order (1, ..., 1) grid gives the classical Hessian."""
        d = domain.DomainSpec.of(1.0, 2.0, 0.5)
        t = (0.4, 1.1, 2.0)
        grid = hessian.DataSetGrid(tuple((v,) for v in t))
        h = hessian.generalized_hessian(d.function(), grid, (0, 0, 0))
        np.testing.assert_allclose(h.matrix, domain.classical_hessian(d, t)[0],
                                   atol=1e-10)

    def test_bad_index(self):
        grid = hessian.DataSetGrid(((1.0, 2.0),))
        with pytest.raises(ShapeError, match='out of range'):
            hessian.generalized_hessian(square(), grid, (2,))
        with pytest.raises(ShapeError):
            hessian.generalized_hessian(funcalc.reciprocal_product(1, 1),
                                        grid, (0,))

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, order=orders)
    def test_engine_matches_closed_forms(self, seed, order):
        rng = np.random.default_rng(seed)
        grid = hessian.random_grid(rng, tuple(order), WINDOW)
        mu = tuple(rng.uniform(0.5, 2.0, grid.k))
        m = tuple(int(rng.integers(0, n)) for n in grid.order)
        frac = hessian.generalized_hessian(funcalc.fraction_product(*mu),
                                           grid, m)
        closed = hessian.closed_form_hessian_fraction(mu, grid, m)
        assert np.linalg.norm(frac.matrix - closed.matrix) <= 1e-9
        recip = hessian.generalized_hessian(
            funcalc.reciprocal_product(*([1.0] * grid.k)), grid, m)
        closed = hessian.closed_form_hessian_reciprocal(grid, m)
        assert np.linalg.norm(recip.matrix - closed.matrix) <= 1e-9


class TestClosedForms(object):

    def test_fraction_single_point(self):
        grid = hessian.DataSetGrid(((1.0,),))
        h = hessian.closed_form_hessian_fraction((1.0,), grid, (0,))
        np.testing.assert_allclose(h.matrix, [[-0.25]])

    def test_reciprocal_instances(self):
        h = hessian.closed_form_hessian_reciprocal(
            hessian.DataSetGrid(((1.0, 2.0),)), (0,))
        np.testing.assert_allclose(h.matrix, [[2.0, 1.0], [1.0, 0.5]])
        h = hessian.closed_form_hessian_reciprocal(
            hessian.DataSetGrid(((1.0,), (1.0,))), (0, 0))
        np.testing.assert_allclose(h.matrix, [[2.0, 1.0], [1.0, 2.0]])

    @settings(max_examples=30, deadline=None)
    @given(seed=seeds, order=orders)
    def test_factorization(self, seed, order):
        """H = W o (-A_k) with W PSD; reciprocal Hessians are PSD."""
        rng = np.random.default_rng(seed)
        grid = hessian.random_grid(rng, tuple(order), WINDOW)
        mu = tuple(rng.uniform(0.5, 2.0, grid.k))
        m = tuple(int(rng.integers(0, n)) for n in grid.order)
        h = hessian.closed_form_hessian_fraction(mu, grid, m)
        outer, neg_ak = h.factors
        np.testing.assert_allclose(outer * neg_ak, h.matrix, atol=1e-12)
        assert np.linalg.eigvalsh(outer)[0] >= -1e-10
        recip = hessian.closed_form_hessian_reciprocal(grid, m)
        assert recip.min_eigenvalue() >= -1e-10

    def test_nonpositive_grid(self):
        grid = hessian.DataSetGrid(((-1.0, 1.0),))
        with pytest.raises(DomainError):
            hessian.closed_form_hessian_reciprocal(grid, (0,))
        with pytest.raises(DomainError):
            hessian.closed_form_hessian_fraction((1.0,), grid, (1,))


class TestScan(object):

    def test_inside_domain_is_concave(self):
        grid = hessian.DataSetGrid(((0.6, 1.0), (0.6, 1.0)))
        rep = hessian.hessian_scan(funcalc.fraction_product(1.0, 1.0), grid,
                                   hessian.NSD)
        assert rep.verdict == report.CONCAVE
        assert rep.details['worst_eigenvalue'] <= 1e-10
        assert all(p['member'] for p in rep.details['membership'])
        assert len(rep.details['per_index']) == 4

    def test_outside_domain_fails(self):
        grid = hessian.DataSetGrid(((0.3, 0.5), (0.3, 0.5)))
        rep = hessian.hessian_scan(funcalc.fraction_product(1.0, 1.0), grid,
                                   hessian.NSD)
        assert rep.verdict == report.VIOLATION
        assert rep.details['worst_eigenvalue'] > 1e-9
        assert not rep.details['membership'][0]['member']

    def test_reciprocal_is_convex(self):
        grid = hessian.random_grid(np.random.default_rng(41), (3, 3), WINDOW)
        rep = hessian.hessian_scan(funcalc.reciprocal_product(1.0, 1.0), grid,
                                   hessian.PSD)
        assert rep.verdict == report.CONVEX
        assert rep.trials == 9
        assert 'membership' not in rep.details

    def test_square_is_convex(self):
        grid = hessian.DataSetGrid(((0.5, 1.0, 2.0, 4.0),))
        rep = hessian.hessian_scan(square(), grid, 'PSD')
        assert rep.verdict == report.CONVEX

    def test_worst_index_is_a_grid_index(self):
        grid = hessian.DataSetGrid(((0.3, 0.5), (0.3, 0.5)))
        rep = hessian.hessian_scan(funcalc.fraction_product(1.0, 1.0), grid,
                                   hessian.NSD)
        assert rep.details['worst_index'] in list(grid.indices())
        assert rep.witness['index'] == rep.details['worst_index']

    def test_bad_mode(self):
        grid = hessian.DataSetGrid(((1.0,),))
        with pytest.raises(ValueError):
            hessian.hessian_scan(square(), grid, 'indefinite')
