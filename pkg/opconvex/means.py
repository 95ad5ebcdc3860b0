"""
Geometric and harmonic matrix means.

    A # B = A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2
    H(A, B) = 2 (A^-1 + B^-1)^-1

A # B is the largest Hermitian C with [[A, C], [C, B]] positive
semi-definite, and H(A, B) is the largest Hermitian C with
[[C, C], [C, C]] <= 2 diag(A, B).  The probes below test those
characterizations by sampling candidates C around the mean.

All square roots and inverses go through the spectral calculus in linalg.

"""
import logging

import numpy as np

from opconvex import funcalc, linalg
from opconvex.certify import report as reports
from opconvex.certify import sampling
from opconvex.config import resolve
from opconvex.errors import DomainError, ShapeError

log = logging.getLogger(__name__)


def _require_pd(m, tol, label):
    m = linalg.hermitian(m, tol)
    low = linalg.min_eigenvalue(m, tol)
    if low <= tol.psd_tol:
        raise DomainError('%s is not positive definite: min eigenvalue %.3e'
                          % (label, low), low)
    return m


def _pair(a, b, tol):
    a = _require_pd(a, tol, 'A')
    b = _require_pd(b, tol, 'B')
    if a.shape != b.shape:
        raise ShapeError('A and B must have the same shape: %s vs %s'
                         % (a.shape, b.shape))
    return a, b


def _sqrt_and_inverse_sqrt(a, tol):
    spectral = linalg.spectral_decompose(a, tol=tol)
    return (linalg.apply_to_spectrum(spectral, np.sqrt),
            linalg.apply_to_spectrum(spectral, lambda t: 1.0 / np.sqrt(t)))


def geometric_mean(a, b, tol=None):
    """A # B for positive definite A and B."""
    tol = resolve(tol)
    a, b = _pair(a, b, tol)
    root, inv_root = _sqrt_and_inverse_sqrt(a, tol)
    inner = linalg.hermitian_part(inv_root @ b @ inv_root)
    middle = linalg.apply_scalar_function(inner, np.sqrt, tol=tol)
    return linalg.hermitian_part(root @ middle @ root)


def harmonic_mean(a, b, tol=None):
    """2 (A^-1 + B^-1)^-1 for positive definite A and B."""
    tol = resolve(tol)
    a, b = _pair(a, b, tol)
    total = linalg.hermitian_part(linalg.inverse(a, tol)
                                  + linalg.inverse(b, tol))
    return linalg.hermitian_part(2.0 * linalg.inverse(total, tol))


def gm_block(a, c, b):
    return linalg.hermitian_part(linalg.block_matrix([[a, c], [c, b]]))


def gm_block_margin(a, b, tol=None):
    """Min eigenvalue of [[A, A#B], [A#B, B]]; >= -1e-9 expected."""
    g = geometric_mean(a, b, tol)
    return linalg.min_eigenvalue(gm_block(a, g, b), tol)


def gm_candidate_margin(a, b, c, tol=None, g=None):
    """Test one candidate C against the maximality of A # B.

    Return:
    (admissible, margin): admissible when [[A, C], [C, B]] is PSD within
    psd_tol; margin is min_eigenvalue(A#B - C).

    """
    tol = resolve(tol)
    if g is None:
        g = geometric_mean(a, b, tol)
    c = linalg.hermitian(c, tol)
    admissible = linalg.min_eigenvalue(gm_block(a, c, b), tol) >= -tol.psd_tol
    return admissible, linalg.min_eigenvalue(g - c, tol)


def _perturbation(rng, n, weight, complex_data=True):
    """Direction weight (H - c I) weight with H unit Hermitian, c in [0, 2)."""
    h = sampling.random_direction(rng, n, complex_data)
    shifted = h - rng.uniform(0.0, 2.0) * np.eye(n)
    d = weight @ shifted @ weight
    return (d + d.conj().T) / 2.0 / np.linalg.norm(d)


# Extra candidates drawn per requested admissible sample before giving up.
ADMISSIBLE_BUDGET = 20


def _admissible_run(trial, trials, seed, threads, tol, min_admissible, delta,
                    what):
    """Run trials, then keep drawing until min_admissible candidates pass.

    Return:
    ConvexityReport over the admissible candidates, details {tested,
    admissible, required, resampled, delta}.

    """
    results = reports.run_trials(trial, trials, seed, threads, tol=tol)
    required = int(min_admissible or 0)
    cap = ADMISSIBLE_BUDGET * max(trials, required)
    kept = [r for r in results if r.witness['admissible']]
    while len(kept) < required and len(results) < cap:
        batch = min(trials, cap - len(results))
        more = reports.run_trials(trial, batch, seed, threads, tol=tol,
                                  start=len(results))
        results += more
        kept += [r for r in more if r.witness['admissible']]
    if len(kept) < required:
        log.warning('%s: only %d of %d required candidates admissible after '
                    '%d draws', what, len(kept), required, len(results))
    log.info('%s: %d of %d candidates admissible', what, len(kept),
             len(results))
    details = {'tested': len(results), 'admissible': len(kept),
               'required': required,
               'resampled': sum(r.resamples for r in results),
               'delta': delta}
    return reports.summarize(kept, 'convex', seed, tol, details)


def gm_maximality_probe(a, b, trials, seed, delta=0.05, tol=None, threads=1,
                        min_admissible=None):
    """Sample Hermitian C near A # B and check A # B >= C on admissible C.

    Candidates are C = A#B + u * delta * ||A#B||_F * D with u uniform in
    [0, 1] and D a unit direction A^1/2 (H - c I) A^1/2.

    When min_admissible is given, more candidates are drawn (up to
    ADMISSIBLE_BUDGET times the larger count) until that many are
    admissible.

    Return:
    ConvexityReport (direction convex: margins are min eig(A#B - C)) with
    details {tested, admissible, required, delta}.  Zero admissible samples
    is a valid, empty report.

    """
    tol = resolve(tol)
    if trials < 1:
        raise ValueError('trials must be >= 1')
    a, b = _pair(a, b, tol)
    g = geometric_mean(a, b, tol)
    root, _ = _sqrt_and_inverse_sqrt(a, tol)
    radius = delta * float(np.linalg.norm(g))
    n = a.shape[0]

    def trial(rng):
        c = g + rng.uniform(0.0, 1.0) * radius * _perturbation(rng, n, root)
        admissible, margin = gm_candidate_margin(a, b, c, tol, g)
        return reports.TrialResult(margin, 1.0, {'C': c,
                                                 'admissible': admissible})

    return _admissible_run(trial, trials, seed, threads, tol, min_admissible,
                           delta, 'geometric mean probe')


def hm_block(c):
    return linalg.hermitian_part(linalg.block_matrix([[c, c], [c, c]]))


def harmonic_block_margins(a, b, tol=None):
    """Both harmonic mean block inequalities.

    Return:
    (characterization, inverse_form) where characterization is the min
    eigenvalue of 2 diag(A, B) - [[C, C], [C, C]] with C = H(A, B), and
    inverse_form that of diag(A^-1, B^-1) - [[S, S], [S, S]] with
    S = (A + B)^-1.

    """
    tol = resolve(tol)
    a, b = _pair(a, b, tol)
    zero = np.zeros_like(a)
    c = harmonic_mean(a, b, tol)
    outer = linalg.block_matrix([[2.0 * a, zero], [zero, 2.0 * b]])
    first = linalg.min_eigenvalue(linalg.hermitian_part(outer - hm_block(c)),
                                  tol)
    s = linalg.inverse(linalg.hermitian_part(a + b), tol)
    inverses = linalg.block_matrix([[linalg.inverse(a, tol), zero],
                                    [zero, linalg.inverse(b, tol)]])
    second = linalg.min_eigenvalue(linalg.hermitian_part(inverses
                                                         - hm_block(s)), tol)
    return first, second


def harmonic_block_check(a, b, tol=None):
    """The smaller of the two harmonic_block_margins; >= -1e-10 expected."""
    return min(harmonic_block_margins(a, b, tol))


def hm_maximality_probe(a, b, trials, seed, delta=0.05, tol=None, threads=1,
                        min_admissible=None):
    """Harmonic mean analogue of gm_maximality_probe.

    C is admissible when 2 diag(A, B) - [[C, C], [C, C]] is PSD; the margin
    is min_eigenvalue(H(A, B) - C).

    """
    tol = resolve(tol)
    if trials < 1:
        raise ValueError('trials must be >= 1')
    a, b = _pair(a, b, tol)
    h = harmonic_mean(a, b, tol)
    n = a.shape[0]
    zero = np.zeros_like(a)
    outer = linalg.block_matrix([[2.0 * a, zero], [zero, 2.0 * b]])
    radius = delta * float(np.linalg.norm(h))
    identity = np.eye(n)

    def trial(rng):
        c = h + rng.uniform(0.0, 1.0) * radius * _perturbation(rng, n,
                                                                identity)
        c = linalg.hermitian_part(c)
        gap = linalg.hermitian_part(outer - hm_block(c))
        admissible = linalg.min_eigenvalue(gap, tol) >= -tol.psd_tol
        margin = linalg.min_eigenvalue(h - c, tol)
        return reports.TrialResult(margin, 1.0, {'C': c,
                                                 'admissible': admissible})

    return _admissible_run(trial, trials, seed, threads, tol, min_admissible,
                           delta, 'harmonic mean probe')


def gm_monotonicity_margin(a1, b1, a2, b2, tol=None):
    """min eig(A2#B2 - A1#B1), for A1 <= A2 and B1 <= B2."""
    return linalg.min_eigenvalue(geometric_mean(a2, b2, tol)
                                 - geometric_mean(a1, b1, tol), tol)


def gm_concavity_margin(a1, b1, a2, b2, tol=None):
    """min eig of (A1+A2)/2 # (B1+B2)/2 - (A1#B1 + A2#B2)/2."""
    mid = geometric_mean((np.asarray(a1) + a2) / 2.0,
                         (np.asarray(b1) + b2) / 2.0, tol)
    avg = (geometric_mean(a1, b1, tol) + geometric_mean(a2, b2, tol)) / 2.0
    return linalg.min_eigenvalue(linalg.hermitian_part(mid - avg), tol)


def product_mean(f, g, mats, tol=None):
    """F(X) = f(X) # g(X) for tensor calculi of f and g."""
    return geometric_mean(funcalc.func_calc_tensor(f, mats, tol),
                          funcalc.func_calc_tensor(g, mats, tol), tol)


def product_mean_check(f, g, xs, ys, tol=None):
    """Midpoint concavity margin of F = f^1/2 g^1/2 realized as f(X) # g(X).

    Arguments:
    f, g   -- non-negative FunctionSpecs of the same arity k
    xs, ys -- two k-tuples of Hermitian matrices in the domain

    Return:
    min eigenvalue of F((X+Y)/2) - (F(X) + F(Y))/2

    """
    if f.arity != g.arity or len(xs) != f.arity or len(ys) != f.arity:
        raise ShapeError('product mean needs two %d-tuples' % (f.arity,))
    mid = [(np.asarray(x) + y) / 2.0 for x, y in zip(xs, ys)]
    gap = (product_mean(f, g, mid, tol)
           - (product_mean(f, g, xs, tol) + product_mean(f, g, ys, tol)) / 2.0)
    return linalg.min_eigenvalue(linalg.hermitian_part(gap), tol)


def quadratic_form_midpoint(a1, a2, xi1, xi2, tol=None):
    """Midpoint gap of the jointly convex map (A, xi) -> (A^-1 xi | xi).

    Return:
    (A1^-1 xi1|xi1)/2 + (A2^-1 xi2|xi2)/2 - (M^-1 eta|eta) with
    M = (A1 + A2)/2 and eta = (xi1 + xi2)/2; >= -1e-10 expected.

    """
    tol = resolve(tol)

    def value(a, xi):
        xi = np.asarray(xi, dtype=complex)
        return float(np.vdot(xi, linalg.inverse(_require_pd(a, tol, 'A'), tol)
                             @ xi).real)

    eta = (np.asarray(xi1) + xi2) / 2.0
    mid = (np.asarray(a1) + a2) / 2.0
    return (value(a1, xi1) + value(a2, xi2)) / 2.0 - value(mid, eta)
