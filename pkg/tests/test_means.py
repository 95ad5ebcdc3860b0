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

from opconvex import funcalc, linalg, means
from opconvex.certify import report, sampling
from opconvex.errors import DomainError, ShapeError

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


class TestGeometricMean(object):

    def test_equal_arguments(self):
        a = sampling.random_pd(np.random.default_rng(1), 3)
        np.testing.assert_allclose(means.geometric_mean(a, a), a, atol=1e-10)

    def test_commuting(self):
        """For commuting arguments A # B = (AB)^1/2."""
        g = means.geometric_mean(np.diag([4.0, 1.0]), np.diag([9.0, 1.0]))
        np.testing.assert_allclose(g, np.diag([6.0, 1.0]), atol=1e-10)

    def test_not_positive_definite(self):
        with pytest.raises(DomainError, match='not positive definite'):
            means.geometric_mean(np.diag([1.0, -1.0]), np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            means.geometric_mean(np.eye(2), np.eye(3))

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_symmetric_and_block_psd(self, seed):
        """A # B = B # A and [[A, A#B], [A#B, B]] is PSD."""
        rng = np.random.default_rng(seed)
        a = sampling.random_pd(rng, 3)
        b = sampling.random_pd(rng, 3)
        np.testing.assert_allclose(means.geometric_mean(a, b),
                                   means.geometric_mean(b, a), atol=1e-9)
        assert means.gm_block_margin(a, b) >= -1e-9

    def test_candidate_at_mean(self):
        """C = A # B is admissible with margin 0."""
        rng = np.random.default_rng(4)
        a = sampling.random_pd(rng, 3)
        b = sampling.random_pd(rng, 3)
        g = means.geometric_mean(a, b)
        admissible, margin = means.gm_candidate_margin(a, b, g)
        assert admissible
        assert margin == pytest.approx(0.0, abs=1e-10)

    def test_candidate_shifted_down(self):
        rng = np.random.default_rng(4)
        a = sampling.random_pd(rng, 3)
        b = sampling.random_pd(rng, 3)
        g = means.geometric_mean(a, b)
        _, margin = means.gm_candidate_margin(a, b, g - 0.1 * np.eye(3))
        assert margin == pytest.approx(0.1, abs=1e-10)

    def test_maximality_candidates(self):
        rng = np.random.default_rng(21)
        a = sampling.random_pd(rng, 3)
        b = sampling.random_pd(rng, 3)
        rep = means.gm_maximality_probe(a, b, 100, 21)
        assert rep.verdict != report.VIOLATION
        assert rep.details['tested'] == 100
        assert 0 < rep.details['admissible'] <= 100
        assert rep.trials == rep.details['admissible']

    def test_maximality_reaches_admissible_count(self):
        """Candidates are drawn until enough of them are admissible."""
        rng = np.random.default_rng(21)
        a = sampling.random_pd(rng, 3)
        b = sampling.random_pd(rng, 3)
        rep = means.gm_maximality_probe(a, b, 40, 21, min_admissible=100)
        assert rep.verdict != report.VIOLATION
        assert rep.details['required'] == 100
        assert rep.details['admissible'] >= 100
        assert rep.details['tested'] > 40
        assert rep.trials == rep.details['admissible']

    def test_maximality_draw_budget(self, monkeypatch):
        """Drawing stops at ADMISSIBLE_BUDGET times the requested count."""
        monkeypatch.setattr(means, 'ADMISSIBLE_BUDGET', 2)
        rng = np.random.default_rng(21)
        a = sampling.random_pd(rng, 2)
        b = sampling.random_pd(rng, 2)
        rep = means.gm_maximality_probe(a, b, 5, 3, min_admissible=50)
        assert rep.details['tested'] <= 100
        assert rep.details['admissible'] >= 50 or \
            rep.details['tested'] == 100

    def test_maximality_is_thread_independent(self):
        rng = np.random.default_rng(22)
        a = sampling.random_pd(rng, 2)
        b = sampling.random_pd(rng, 2)
        one = means.gm_maximality_probe(a, b, 30, 5, threads=1)
        many = means.gm_maximality_probe(a, b, 30, 5, threads=4)
        assert one.worst_margin == many.worst_margin
        assert one.details == many.details

    def test_monotone_and_concave(self):
        rng = np.random.default_rng(23)
        a1 = sampling.random_pd(rng, 3)
        b1 = sampling.random_pd(rng, 3)
        a2 = a1 + sampling.random_psd_increment(rng, 3)
        b2 = b1 + sampling.random_psd_increment(rng, 3)
        assert means.gm_monotonicity_margin(a1, b1, a2, b2) >= -1e-9
        c = sampling.random_pd(rng, 3)
        d = sampling.random_pd(rng, 3)
        assert means.gm_concavity_margin(a1, b1, c, d) >= -1e-9


class TestHarmonicMean(object):

    def test_scalars(self):
        assert means.harmonic_mean([[1.0]], [[1.0]])[0, 0] == \
            pytest.approx(1.0)
        assert means.harmonic_mean([[1.0]], [[3.0]])[0, 0] == \
            pytest.approx(1.5)

    def test_equal_arguments(self):
        a = sampling.random_pd(np.random.default_rng(2), 4)
        np.testing.assert_allclose(means.harmonic_mean(a, a), a, atol=1e-10)

    def test_identity_block_is_singular(self):
        """Both block inequalities are equalities at A = B = I."""
        first, second = means.harmonic_block_margins(np.eye(2), np.eye(2))
        assert first == pytest.approx(0.0, abs=1e-12)
        assert second == pytest.approx(0.0, abs=1e-12)

    def test_scalar_block(self):
        """[[0.5, -1.5], [-1.5, 4.5]] has determinant zero."""
        assert means.harmonic_block_check([[1.0]], [[3.0]]) == \
            pytest.approx(0.0, abs=1e-12)

    def test_random_block(self):
        rng = np.random.default_rng(17)
        a = sampling.random_pd(rng, 4)
        b = sampling.random_pd(rng, 4)
        assert means.harmonic_block_check(a, b) >= -1e-10

    def test_maximality_candidates(self):
        rng = np.random.default_rng(24)
        a = sampling.random_pd(rng, 3)
        b = sampling.random_pd(rng, 3)
        rep = means.hm_maximality_probe(a, b, 100, 24, min_admissible=100)
        assert rep.verdict != report.VIOLATION
        assert rep.details['tested'] >= 100
        assert rep.details['admissible'] >= 100


class TestProductMean(object):

    def test_equal_points(self):
        rng = np.random.default_rng(3)
        xs = [sampling.random_pd(rng, 2), sampling.random_pd(rng, 2)]
        f = funcalc.exponent_product(1, 0)
        g = funcalc.exponent_product(0, 1)
        assert means.product_mean_check(f, g, xs, xs) == \
            pytest.approx(0.0, abs=1e-10)

    def test_linear(self):
        """f = g = t gives F(X) = X, an affine map."""
        rng = np.random.default_rng(3)
        f = funcalc.exponent_product(1)
        x = [sampling.random_pd(rng, 3)]
        y = [sampling.random_pd(rng, 3)]
        assert means.product_mean_check(f, f, x, y) == \
            pytest.approx(0.0, abs=1e-9)

    def test_square_root_product_is_concave(self):
        """t^1/2 s^1/2 realized as (A (x) I) # (I (x) B)."""
        rng = np.random.default_rng(6)
        f = funcalc.exponent_product(1, 0)
        g = funcalc.exponent_product(0, 1)
        xs = [sampling.random_pd(rng, 2), sampling.random_pd(rng, 2)]
        ys = [sampling.random_pd(rng, 2), sampling.random_pd(rng, 2)]
        assert means.product_mean_check(f, g, xs, ys) >= -1e-9
        np.testing.assert_allclose(
            means.product_mean(f, g, xs),
            funcalc.func_calc_tensor(funcalc.exponent_product(0.5, 0.5), xs),
            atol=1e-9)

    def test_arity(self):
        with pytest.raises(ShapeError):
            means.product_mean_check(funcalc.exponent_product(1, 0),
                                     funcalc.exponent_product(1),
                                     [np.eye(2)], [np.eye(2)])


class TestQuadraticForm(object):

    @settings(max_examples=20, deadline=None)
    @given(seed=seeds)
    def test_joint_convexity(self, seed):
        rng = np.random.default_rng(seed)
        a1 = sampling.random_pd(rng, 3)
        a2 = sampling.random_pd(rng, 3)
        xi1 = sampling.random_vector(rng, 3)
        xi2 = sampling.random_vector(rng, 3)
        assert means.quadratic_form_midpoint(a1, a2, xi1, xi2) >= -1e-10

    def test_zero_vectors(self):
        gap = means.quadratic_form_midpoint(np.eye(2), 2 * np.eye(2),
                                            np.zeros(2), np.zeros(2))
        assert gap == 0.0

    def test_inverse_is_spectral(self):
        a = linalg.hermitian([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(linalg.inverse(a) @ a, np.eye(2),
                                   atol=1e-12)
