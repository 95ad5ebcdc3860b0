"""
Certification batteries for the individual convexity and concavity results.

Each function builds the MapSpecs of one statement, runs them and returns a
ConvexityReport (or a map of reports).  Checks that expect a violation
search from scalar instances upward.

"""
import dataclasses
import logging
import math

import numpy as np

from opconvex import funcalc, linalg
from opconvex.certify import maps
from opconvex.certify import report as reports
from opconvex.config import resolve
from opconvex.errors import ConfigError, ShapeError

log = logging.getLogger(__name__)

DEFAULT_QUADRATURE_NODES = 20
FROZEN_SLOTS = ('A', 'B', 'K')


def _pairs(grid):
    """Cells of a sweep grid given as {'p': [...], 'q': [...]} or pairs."""
    if isinstance(grid, dict):
        return [(p, q) for p in grid['p'] for q in grid['q']]
    return [tuple(cell) for cell in grid]


def lieb_sweep(grid, dims, trials, seed, threads=1, scalar_seeded=True,
               tol=None):
    """Concavity of (A, B) -> tr A^p K^* B^q K over a grid of exponents.

    Arguments:
    grid          -- {'p': values, 'q': values} or a list of (p, q) cells
    dims          -- (n, m)
    scalar_seeded -- search 1 x 1 instances before dims

    Return:
    dict (p, q) -> ConvexityReport.  Cells with p + q <= 1 are expected to
    be consistent; cells with p + q >= 1.2 to show a violation.

    """
    tol = resolve(tol)
    out = {}
    for i, (p, q) in enumerate(_pairs(grid)):
        spec = maps.MapSpec(maps.TRACE_FORM, funcalc.exponent_product(p, q),
                            dims, direction='concave')
        if scalar_seeded:
            report = maps.find_violation(spec, trials, seed, threads, (i,),
                                         tol=tol)
        else:
            report = maps.certify(spec, trials, seed, threads, (i,), tol)
        out[(p, q)] = report
        log.info('lieb cell p=%g q=%g: %s', p, q, report.verdict)
    return out


def fraction_trace_concavity(mu1, mu2, dims, trials, seed, windows=None,
                             outside_trials=None, threads=1, tol=None):
    """Concavity of tr A/(A+mu1) K^* B/(B+mu2) K on D_2(mu1, mu2).

    windows must satisfy a1 a2 >= mu1 mu2 / 4 for their lower ends.  A
    second, scalar search in the box (1e-3, 0.35 sqrt(mu1 mu2))^2, where
    t1 t2 < mu1 mu2 / 8, must find a violation; it is returned in
    details['outside'].

    """
    tol = resolve(tol)
    f = funcalc.fraction_product(mu1, mu2)
    spec = maps.MapSpec(maps.TRACE_FORM, f, dims, windows,
                        direction='concave')
    report = maps.certify(spec, trials, seed, threads, (0,), tol)
    edge = 0.35 * math.sqrt(mu1 * mu2)
    outside = maps.MapSpec(maps.TRACE_FORM, f, (1, 1), ((1e-3, edge),) * 2,
                           direction='concave', complex_data=False,
                           enforce_domain=False)
    found = maps.certify(outside, outside_trials or trials, seed, threads,
                         (1,), tol)
    details = dict(report.details)
    details['outside'] = found
    details['outside_violation_found'] = found.violated
    return dataclasses.replace(report, details=details)


def _dims_for(k, dims):
    if isinstance(dims, int):
        return (dims,) * k
    dims = tuple(dims)
    if len(dims) != k:
        raise ShapeError('need %d dims, got %r' % (k, dims))
    return dims


def reciprocal_convexity(k, dims, trials, seed, samples=2, threads=1,
                         tol=None):
    """Convexity of the tensor calculus of 1/(t_1 ... t_k) and of sampled
    reciprocal powers t_1^-p_1 ... t_k^-p_k with p_i in [0, 1].

    Return:
    the merged ConvexityReport; details['per_exponent'] maps each exponent
    vector to its own report.

    """
    tol = resolve(tol)
    dims = _dims_for(k, dims)
    rng = np.random.default_rng([int(seed), k])
    exponents = [(1.0,) * k] + [tuple(rng.uniform(0.0, 1.0, k))
                                for _ in range(samples)]
    per_exponent = {}
    for i, p in enumerate(exponents):
        spec = maps.MapSpec(maps.TENSOR_CALCULUS,
                            funcalc.reciprocal_product(*p), dims,
                            direction='convex')
        per_exponent[p] = maps.certify(spec, trials, seed, threads, (i,), tol)
    return reports.merge_reports(list(per_exponent.values()), 'convex', seed,
                                 tol, {'per_exponent': per_exponent})


def quadratic_form_convexity(f, dims, trials, seed, threads=1, tol=None):
    """Joint convexity of (A, xi) -> (f(A) xi | xi)."""
    spec = maps.MapSpec(maps.QUADRATIC_FORM, f, _dims_for(1, dims),
                        direction='convex')
    return maps.certify(spec, trials, seed, threads, (), tol)


def t2_counterexample(eps=0.0, tol=None):
    """Midpoint gap of (A, xi) -> (A^2 xi | xi) at a pair of projections.

    A1 = diag(0, 1), A2 = [[1, -1], [-1, 1]] / 2, xi1 = (1, 0),
    xi2 = (0, -1), each A_i replaced by A_i + eps I.  The value at eps = 0
    is -1/16, so t^2 does not have the joint convexity property.

    """
    if eps < 0:
        raise ValueError('eps must be >= 0')
    square = funcalc.custom(lambda t: t * t, 1, name='t^2',
                            grad=lambda i, t: 2.0 * t[0],
                            hess=lambda i, j, t: 2.0)
    spec = maps.MapSpec(maps.QUADRATIC_FORM, square, (2,),
                        ((0.0, 1.0 + eps),), direction='convex')
    shift = eps * np.eye(2)
    x = {'A': np.diag([0.0, 1.0]) + shift, 'xi': np.array([1.0, 0.0])}
    y = {'A': np.array([[0.5, -0.5], [-0.5, 0.5]]) + shift,
         'xi': np.array([0.0, -1.0])}
    return maps.midpoint_margin(spec, x, y, tol)[0]


def lieb_quadrature(count=DEFAULT_QUADRATURE_NODES):
    """Gauss-Legendre rule for integrals over (0, inf).

    Nodes s of the rule on (0, 1) are mapped by u = s / (1 - s), with
    weights w / (1 - s)^2, all positive.

    """
    if count < 1:
        raise ConfigError('quadrature needs at least one node')
    x, w = np.polynomial.legendre.leggauss(count)
    s = (x + 1.0) / 2.0
    return tuple(s / (1.0 - s)), tuple(w / 2.0 / (1.0 - s) ** 2)


def lieb_integral_convexity(dims, trials, seed, quadrature=None, frozen=None,
                            threads=1, tol=None):
    """Joint convexity of (A, B, K) -> int_0^inf tr (A+u)^-1 K^* (B+u)^-1 K du.

    Arguments:
    dims       -- (n, m)
    quadrature -- (nodes, weights); defaults to lieb_quadrature()
    frozen     -- optional slot held fixed

    """
    nodes, weights = quadrature or lieb_quadrature()
    spec = maps.MapSpec(maps.INTEGRAL_FORM, dims=_dims_for(2, dims),
                        frozen=frozen, direction='convex',
                        params={'nodes': tuple(nodes),
                                'weights': tuple(weights)})
    return maps.certify(spec, trials, seed, threads, (), tol)


def two_of_three(fixed, u, v, dims, trials, seed, threads=1, tol=None):
    """Convexity of (A, B, K) -> tr (A+u)^-1 K^* (B+v)^-1 K in two slots.

    Arguments:
    fixed -- 'A', 'B' or 'K' to freeze that slot; None leaves all three
             free, where a violation is expected and searched for from
             scalar instances upward

    """
    if fixed is not None and fixed not in FROZEN_SLOTS:
        raise ConfigError('fixed slot must be one of A, B, K or None: %r'
                          % (fixed,))
    spec = maps.MapSpec(maps.TWO_OF_THREE, dims=_dims_for(2, dims),
                        frozen=fixed, direction='convex',
                        params={'u': float(u), 'v': float(v)})
    if fixed is None:
        report = maps.find_violation(spec, trials, seed, threads, (), tol=tol)
    else:
        report = maps.certify(spec, trials, seed, threads, (), tol)
    details = dict(report.details)
    details['expected'] = 'violation' if fixed is None else 'consistent'
    return dataclasses.replace(report, details=details)


def _superoperator_gap(spec, x, y, tol):
    f = spec.f

    def s(inputs):
        return funcalc.superoperator_matrix(f, inputs['A'], inputs['B'], tol)

    mid = maps.midpoint(x, y)
    gap = linalg.hermitian_part((s(x) + s(y)) / 2.0 - s(mid))
    return -gap if spec.direction == 'concave' else gap


def _trace_margin(spec, x, y, k, tol):
    x = dict(x, K=k)
    y = dict(y, K=k)
    return maps.midpoint_margin(spec, x, y, tol)[0]


def theorem1_bridge(f, dims, trials, seed, direction=None, threads=1,
                    tol=None):
    """Two-way transfer between tensor and trace form midpoint gaps.

    For each trial the gap G of the superoperator f(L_A, R_B) is computed.
    (a) The eigenvector phi of its smallest eigenvalue is sent to
    K = (Phi phi)^*, and the trace form margin at that K must equal the
    tensor margin.  (b) The sampled K is sent to phi = Phi^-1(K^*), and
    (G phi | phi) must equal the trace form margin at K.

    Return:
    ConvexityReport merging the tensor side and the trace side; details
    hold both reports and the largest transfer discrepancy.

    """
    tol = resolve(tol)
    if f.arity != 2:
        raise ShapeError('the tensor and trace forms need f of 2 variables')
    spec = maps.MapSpec(maps.TRACE_FORM, f, _dims_for(2, dims),
                        direction=direction)
    n, m = spec.dims

    def trial(rng):
        x, y = maps.draw_pair(spec, rng)
        gap = _superoperator_gap(spec, x, y, tol)
        w, v = linalg.jacobi_eigh(gap, tol)
        phi = funcalc.TensorVector((n, m), v[:, 0])
        k_a = funcalc.phi_map(phi).conj().T
        transfer_a = abs(w[0] - _trace_margin(spec, x, y, k_a, tol))
        k_b = x['K']
        trace_margin, scale = maps.midpoint_margin(spec, x, y, tol)
        phi_b = funcalc.phi_inverse(np.asarray(k_b).conj().T).coefficients
        tensor_value = float(np.vdot(phi_b, gap @ phi_b).real)
        transfer_b = abs(tensor_value - trace_margin)
        return reports.TrialResult(float(w[0]), scale, {
            'X': x, 'Y': y, 'phi': phi.coefficients, 'K_from_phi': k_a,
            'trace_margin': trace_margin,
            'discrepancy': max(transfer_a, transfer_b)})

    results = reports.run_trials(trial, trials, seed, threads, (), tol)
    tensor_report = reports.summarize(results, spec.direction, seed, tol)
    trace_results = [reports.TrialResult(r.witness['trace_margin'], r.scale,
                                         {'X': r.witness['X'],
                                          'Y': r.witness['Y']}, r.index)
                     for r in results]
    trace_report = reports.summarize(trace_results, spec.direction, seed, tol)
    discrepancy = max(r.witness['discrepancy'] for r in results)
    transfers = sum(1 for r in results
                    if r.relative < -tol.violation_tol
                    or r.witness['trace_margin'] / r.scale
                    < -tol.violation_tol)
    log.info('tensor/trace bridge for %s: tensor %s, trace %s, '
             'max discrepancy %.3e', f.describe(), tensor_report.verdict,
             trace_report.verdict, discrepancy)
    details = {'tensor': tensor_report, 'trace': trace_report,
               'max_discrepancy': discrepancy, 'transfers': transfers,
               'spec': spec.to_json()}
    return reports.merge_reports([tensor_report, trace_report],
                                 spec.direction, seed, tol, details)


def lieb_ruskai_convexity(dims, trials, seed, threads=1, tol=None):
    """Matrix convexity of (A, K) -> K^* A^-1 K for A PD n x n, K n x m."""
    spec = maps.MapSpec(maps.LIEB_RUSKAI, dims=_dims_for(2, dims),
                        direction='convex')
    return maps.certify(spec, trials, seed, threads, (), tol)


def rank_one_lift_check(a, xi, v, tol=None):
    """|(B^* A^-1 B v | v) - (A^-1 xi | xi)| for B u = (u | v) xi.

    v is normalized first.

    """
    tol = resolve(tol)
    xi = np.asarray(xi, dtype=complex)
    v = np.asarray(v, dtype=complex)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError('v must be non-zero')
    v = v / norm
    a_inv = linalg.inverse(linalg.hermitian(a, tol), tol)
    b = np.outer(xi, v.conj())
    lifted = np.vdot(v, b.conj().T @ a_inv @ b @ v).real
    return abs(float(lifted) - float(np.vdot(xi, a_inv @ xi).real))


def simplex_exponents(k, samples, rng):
    """The k + 1 vertices of {p >= 0, sum p <= 1} and random interior points."""
    vertices = [tuple(0.0 for _ in range(k))]
    vertices += [tuple(1.0 if j == i else 0.0 for j in range(k))
                 for i in range(k)]
    inner = [tuple(rng.dirichlet(np.ones(k + 1))[:k]) for _ in range(samples)]
    return vertices + inner


def exponent_simplex_concavity(k, dims, exponent_samples, trials, seed,
                               threads=1, tol=None):
    """Concavity of the tensor calculus of t_1^p_1 ... t_k^p_k, sum p <= 1.

    Return:
    dict exponent vector -> ConvexityReport
    """
    tol = resolve(tol)
    dims = _dims_for(k, dims)
    rng = np.random.default_rng([int(seed), k])
    out = {}
    for i, p in enumerate(simplex_exponents(k, exponent_samples, rng)):
        spec = maps.MapSpec(maps.TENSOR_CALCULUS,
                            funcalc.exponent_product(*p), dims,
                            direction='concave')
        out[p] = maps.certify(spec, trials, seed, threads, (i,), tol)
    return out


def tensor_quadratic_convexity(dims, trials, seed, threads=1, tol=None):
    """Joint convexity of (A, xi) -> ((A^-1 (x) B^-1) xi | xi), B fixed."""
    spec = maps.MapSpec(maps.TENSOR_QUADRATIC, dims=_dims_for(2, dims),
                        direction='convex')
    return maps.certify(spec, trials, seed, threads, (), tol)


def random_resolvent(rng, count=3):
    """A resolvent_sum with random non-negative nodes and positive weights."""
    return funcalc.resolvent_sum(rng.uniform(0.0, 1.0),
                                 rng.uniform(0.0, 2.0, count),
                                 rng.uniform(0.1, 2.0, count))
