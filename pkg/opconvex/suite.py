"""
Acceptance batteries, one per module, and the consolidated JSON report.

A battery is a list of Checks.  Each check records whether its contract
held, the verdict text, the deciding margin and, for failures and
counterexamples, a witness.  The report layout is

    {"tool_version": ..., "seed": ...,
     "suites": [{"name": ..., "checks": [{"id", "paper_anchor", "verdict",
                                          "margin", "passed", "witness"?}]}]}

Suites and checks always appear in a fixed order.

"""
import dataclasses
import logging
import math

import numpy as np

from opconvex import domain, funcalc, hessian, linalg, matrixio, means
from opconvex.certify import maps, sampling, theorems
from opconvex.cli import __version__
from opconvex.config import resolve
from opconvex.errors import OpConvexError

log = logging.getLogger(__name__)

PASS = 'PASS'
FAIL = 'FAIL'

SUITES = ('funcalc', 'means', 'domain', 'hessian', 'certify')
SUITE_CHOICES = ('all',) + SUITES


@dataclasses.dataclass
class Check(object):
    id: str
    anchor: str
    passed: bool
    verdict: str
    margin: object = None
    witness: object = None
    details: dict = None

    def to_json(self):
        out = {'id': self.id, 'paper_anchor': self.anchor,
               'verdict': self.verdict, 'passed': bool(self.passed),
               'margin': matrixio.to_jsonable(self.margin)}
        if self.witness is not None:
            out['witness'] = matrixio.to_jsonable(self.witness)
        if self.details:
            out['details'] = matrixio.to_jsonable(self.details)
        return out


def contract(check_id, anchor, passed, margin, witness=None, details=None):
    """A Check for a plain pass/fail contract."""
    return Check(check_id, anchor, bool(passed), PASS if passed else FAIL,
                 margin, witness if not passed else None, details)


def from_report(check_id, anchor, report, expect_violation=False,
                details=None):
    """A Check from a ConvexityReport; expect_violation flips the contract."""
    passed = report.violated == expect_violation
    witness = report.witness if report.violated else None
    extra = {'trials': report.trials, 'expected':
             'VIOLATION' if expect_violation else 'consistent'}
    extra.update(details or {})
    return Check(check_id, anchor, passed, report.verdict,
                 report.worst_margin, witness, extra)


def maximality_check(check_id, anchor, report):
    """A maximality Check: no violation on enough admissible candidates."""
    admissible = report.details['admissible']
    required = report.details['required']
    check = from_report(check_id, anchor, report,
                        details={'admissible': admissible,
                                 'required': required,
                                 'tested': report.details['tested']})
    if admissible < required:
        check.passed = False
        check.verdict = FAIL
    return check


class _Battery(object):
    """Shared state of one battery run."""

    def __init__(self, seed, threads, tol, trials):
        self.seed = seed
        self.threads = threads
        self.tol = resolve(tol)
        self.trials = trials

    def n(self, default):
        """Trial count: the acceptance size unless overridden."""
        return default if self.trials is None else min(default, self.trials)

    def rng(self, *key):
        return np.random.default_rng([self.seed] + list(key))


# funcalc

def _two_variable_functions(rng):
    mu = rng.uniform(0.5, 2.0, 2)
    return [
        funcalc.exponent_product(*rng.uniform(0.0, 1.5, 2)),
        funcalc.fraction_product(*mu),
        funcalc.reciprocal_product(*rng.uniform(0.0, 1.0, 2)),
        funcalc.custom(lambda t, s: math.log1p(t) * s + 1.0 / (t + s), 2,
                       domain=lambda p: p[0] > 0 and p[1] > 0,
                       name='log1p(t) s + 1/(t+s)'),
    ]


def funcalc_suite(run):
    rng = run.rng(1)
    count = run.n(500)
    trace_gap = 0.0
    intertwine = 0.0
    operator_gap = 0.0
    worst = None
    for i in range(count):
        f = _two_variable_functions(rng)[i % 4]
        n, m = rng.integers(1, 5, 2)
        a = sampling.random_pd(rng, n)
        b = sampling.random_pd(rng, m)
        k = sampling.random_k(rng, m, n)
        gap = funcalc.trace_identity_gap(f, a, b, k, run.tol)
        phi = funcalc.TensorVector((n, m), sampling.random_vector(rng, n * m))
        twist = funcalc.intertwine_check(f, a, b, phi, run.tol)
        vec = np.asarray(k.conj().T).ravel()
        direct = funcalc.func_calc_variant(f, a, b, k.conj().T, run.tol)
        op = float(np.linalg.norm(funcalc.superoperator_matrix(f, a, b, run.tol)
                                  @ vec - np.asarray(direct).ravel()))
        if max(gap, twist, op) > max(trace_gap, intertwine, operator_gap):
            worst = {'function': f.describe(), 'A': a, 'B': b, 'K': k}
        trace_gap = max(trace_gap, gap)
        intertwine = max(intertwine, twist)
        operator_gap = max(operator_gap, op)
    checks = [
        contract('trace_identity', 'trace form equals the tensor quadratic '
                 'form at phi = Phi^-1(K^*)', trace_gap <= 1e-10, trace_gap,
                 worst, {'instances': count}),
        contract('intertwining', 'Phi intertwines the tensor and variant '
                 'calculi', intertwine <= 1e-10, intertwine, worst,
                 {'instances': count}),
        contract('superoperator', 'variant calculus as a matrix on vec(K)',
                 operator_gap <= 1e-10, operator_gap, worst,
                 {'instances': count}),
    ]
    a = np.diag([4.0, 1.0])
    b = np.diag([9.0, 1.0])
    product = funcalc.func_calc_tensor(funcalc.exponent_product(1.0, 1.0),
                                       [a, b], run.tol)
    err = float(np.max(np.abs(product - np.kron(a, b))))
    checks.append(contract('kronecker_product', 'f(t, s) = t s gives A (x) B',
                           err <= 1e-10, err))
    return checks


# means

def means_suite(run):
    rng = run.rng(2)
    tol = run.tol
    count = run.n(500)
    mono = concave = block = harmonic = quad = math.inf
    for _ in range(count):
        a1 = sampling.random_pd(rng, 3)
        b1 = sampling.random_pd(rng, 3)
        a2 = a1 + sampling.random_psd_increment(rng, 3)
        b2 = b1 + sampling.random_psd_increment(rng, 3)
        mono = min(mono, means.gm_monotonicity_margin(a1, b1, a2, b2, tol))
        a3 = sampling.random_pd(rng, 3)
        b3 = sampling.random_pd(rng, 3)
        concave = min(concave, means.gm_concavity_margin(a1, b1, a3, b3, tol))
        block = min(block, means.gm_block_margin(a1, b1, tol))
        harmonic = min(harmonic, means.harmonic_block_check(a1, b1, tol))
        quad = min(quad, means.quadratic_form_midpoint(
            a1, a3, sampling.random_vector(rng, 3),
            sampling.random_vector(rng, 3), tol))
    probe = means.gm_maximality_probe(sampling.random_pd(rng, 3),
                                      sampling.random_pd(rng, 3),
                                      run.n(2000), run.seed, tol=tol,
                                      threads=run.threads,
                                      min_admissible=run.n(1000))
    hm_probe = means.hm_maximality_probe(sampling.random_pd(rng, 3),
                                         sampling.random_pd(rng, 3),
                                         run.n(1000), run.seed, tol=tol,
                                         threads=run.threads,
                                         min_admissible=run.n(1000))
    x = [sampling.random_pd(rng, 2), sampling.random_pd(rng, 2)]
    via_mean = means.product_mean(funcalc.exponent_product(1.0, 0.0),
                                  funcalc.exponent_product(0.0, 1.0), x, tol)
    direct = funcalc.func_calc_tensor(funcalc.exponent_product(0.5, 0.5), x,
                                      tol)
    identity = float(np.max(np.abs(via_mean - direct)))
    commuting = means.geometric_mean(np.diag([4.0, 1.0]), np.diag([9.0, 1.0]),
                                     tol)
    commuting_err = float(np.max(np.abs(commuting - np.diag([6.0, 1.0]))))
    details = {'pairs': count}
    return [
        contract('gm_monotonicity', 'the geometric mean is increasing',
                 mono >= -1e-9, mono, details=details),
        contract('gm_concavity', 'the geometric mean is concave',
                 concave >= -1e-9, concave, details=details),
        contract('gm_block_psd', '[[A, A#B], [A#B, B]] is positive '
                 'semi-definite', block >= -1e-9, block, details=details),
        contract('gm_commuting', 'A # B = (AB)^1/2 for commuting A, B',
                 commuting_err <= 1e-10, commuting_err),
        maximality_check('gm_maximality',
                         'A # B is the largest admissible C', probe),
        maximality_check('hm_maximality', 'the harmonic mean is the largest '
                         'C with [[C, C], [C, C]] <= 2 diag(A, B)', hm_probe),
        contract('harmonic_block', 'harmonic mean block inequalities',
                 harmonic >= -1e-10, harmonic, details=details),
        contract('quadratic_form_midpoint', '(A^-1 xi | xi) is jointly '
                 'convex', quad >= -1e-10, quad, details=details),
        contract('product_mean_identity', 'A (x) I # I (x) B = A^1/2 (x) '
                 'B^1/2', identity <= 1e-9, identity),
    ]


# domain

D2_MUS = ((1.0, 1.0), (0.5, 2.0), (3.0, 0.7))


def domain_suite(run):
    tol = run.tol
    checks = []
    for i, mu in enumerate(D2_MUS):
        rng = run.rng(3, i)
        count = run.n(10000)
        points = [tuple(3.0 - rng.uniform(0.0, 3.0, 2)) for _ in range(count)]
        checked, mismatches, first = domain.d2_cross_check(mu, points, tol)
        checks.append(contract(
            'd2_cross_check_%d' % i, 'D_2 is t1 t2 >= mu1 mu2 / 4',
            mismatches == 0, mismatches, first,
            {'mu': mu, 'checked': checked, 'mismatches': mismatches}))
    d = domain.DomainSpec.of(1.0, 2.0, 0.5)
    rng = run.rng(3, 9)
    convex = ray = inside = math.inf
    outside = math.inf
    hadamard = 0.0
    for _ in range(run.n(200)):
        s = domain.random_member(d, rng, tol=tol)
        t = domain.random_member(d, rng, tol=tol)
        mid = tuple((a + b) / 2.0 for a, b in zip(s, t))
        convex = min(convex, domain.domain_contains(d, mid, tol).margin)
        c = rng.uniform(1.0, 4.0)
        ray = min(ray, domain.domain_contains(d, tuple(c * v for v in s),
                                              tol).margin)
        h, p = domain.classical_hessian(d, s)
        inside = min(inside, linalg.min_eigenvalue(-h, tol))
        hadamard = max(hadamard, float(np.max(np.abs(
            h * domain.hadamard_inverse(p) + domain.build_Ak(d, s).real))))
        u = domain.random_nonmember(d, rng, tol=tol)
        h, _ = domain.classical_hessian(d, u)
        outside = min(outside, linalg.max_eigenvalue(h, tol))
    echo = domain.domain_contains(domain.DomainSpec.of(1.0, 1.0), (0.5, 0.5),
                                  tol)
    checks += [
        contract('dk_convex', 'D_k is a closed convex set', convex >= -1e-10,
                 convex),
        contract('dk_ray', 'c t stays in D_k for c >= 1', ray >= -1e-10, ray),
        contract('concave_inside', 'f is concave on D_k', inside >= -1e-10,
                 inside),
        contract('not_concave_outside', 'f is not concave outside D_k',
                 outside > 1e-9, outside),
        contract('hadamard_factorization', 'H_f = -A_k o P', hadamard <= 1e-10,
                 hadamard),
        contract('boundary_echo', 'D_2(1, 1) boundary point (0.5, 0.5)',
                 echo.member, echo.margin, details=echo.to_json()),
    ]
    return checks


# hessian

# Nodes stay away from 0 so that 1/(t_1 ... t_k) keeps its Hessian entries
# small against psd_tol.
GRID_WINDOW = (0.5, 3.0)


def _random_order(rng, k):
    return tuple(int(v) for v in rng.integers(1, 5, k))


def hessian_suite(run):
    tol = run.tol
    rng = run.rng(4)
    engine_gap = 0.0
    factor_gap = 0.0
    outer_psd = math.inf
    reciprocal_min = math.inf
    for _ in range(run.n(100)):
        k = int(rng.integers(1, 4))
        grid = hessian.random_grid(rng, _random_order(rng, k), GRID_WINDOW)
        mu = tuple(rng.uniform(0.5, 2.0, k))
        frac = funcalc.fraction_product(*mu)
        recip = funcalc.reciprocal_product(*([1.0] * k))
        for _ in range(2):
            m = tuple(int(rng.integers(0, n)) for n in grid.order)
            closed = hessian.closed_form_hessian_fraction(mu, grid, m)
            engine = hessian.generalized_hessian(frac, grid, m, tol)
            engine_gap = max(engine_gap, float(np.linalg.norm(
                engine.matrix - closed.matrix)))
            outer, neg_ak = closed.factors
            factor_gap = max(factor_gap, float(np.max(np.abs(
                outer * neg_ak - closed.matrix))))
            outer_psd = min(outer_psd, linalg.min_eigenvalue(outer, tol))
            closed = hessian.closed_form_hessian_reciprocal(grid, m)
            engine = hessian.generalized_hessian(recip, grid, m, tol)
            engine_gap = max(engine_gap, float(np.linalg.norm(
                engine.matrix - closed.matrix)))
            reciprocal_min = min(reciprocal_min, closed.min_eigenvalue(tol))
    inside = hessian.hessian_scan(funcalc.fraction_product(1.0, 1.0),
                                  hessian.DataSetGrid(((0.6, 1.0), (0.6, 1.0))),
                                  hessian.NSD, tol)
    outside = hessian.hessian_scan(funcalc.fraction_product(1.0, 1.0),
                                   hessian.DataSetGrid(((0.3, 0.5),
                                                        (0.3, 0.5))),
                                   hessian.NSD, tol)
    recip_scan = hessian.hessian_scan(
        funcalc.reciprocal_product(1.0, 1.0),
        hessian.random_grid(np.random.default_rng(41), (3, 3), GRID_WINDOW),
        hessian.PSD, tol)
    d = domain.DomainSpec.of(1.0, 1.0)
    single = math.inf
    for _ in range(run.n(20)):
        t = domain.random_nonmember(d, rng, tol=tol)
        grid = hessian.DataSetGrid(tuple((v,) for v in t))
        h = hessian.generalized_hessian(d.function(), grid, (0, 0), tol)
        single = min(single, h.max_eigenvalue(tol))
    return [
        contract('engine_vs_closed_forms', 'closed forms of the generalized '
                 'Hessians', engine_gap <= 1e-9, engine_gap),
        contract('hadamard_factorization', 'H(m) as a Hadamard product of a '
                 'PSD outer product and -A_k', factor_gap <= 1e-12
                 and outer_psd >= -1e-10, factor_gap,
                 details={'outer_min_eigenvalue': outer_psd}),
        contract('reciprocal_closed_form_psd', '1/(t_1 ... t_k) has PSD '
                 'generalized Hessians', reciprocal_min >= -1e-10,
                 reciprocal_min),
        from_report('fraction_nsd_inside', 'the fraction product is operator '
                    'concave on D_k', inside),
        from_report('fraction_outside', 'no concavity outside D_k', outside,
                    expect_violation=True),
        from_report('reciprocal_psd_scan', '1/(t_1 t_2) is operator convex',
                    recip_scan),
        contract('single_point_outside', 'positive Hessian eigenvalue outside '
                 'D_k', single > 1e-9, single),
    ]


# certify

LIEB_CONSISTENT = ((0.5, 0.5), (0.3, 0.6), (1.0, 0.0), (0.0, 1.0), (0.2, 0.2))
LIEB_VIOLATING = ((0.7, 0.7), (0.6, 0.6))


def certify_suite(run):
    tol = run.tol
    seed = run.seed
    threads = run.threads
    checks = []
    t2 = theorems.t2_counterexample(0.0, tol)
    checks.append(contract('t2_counterexample', 't^2 fails joint convexity '
                           'with gap -1/16', abs(t2 + 0.0625) <= 1e-12, t2))
    t2_eps = theorems.t2_counterexample(0.01, tol)
    checks.append(contract('t2_perturbed', 'the gap stays negative under '
                           'perturbation', t2_eps < 0, t2_eps))
    for dims in ((3, 3), (4, 2)):
        cells = theorems.lieb_sweep(list(LIEB_CONSISTENT), dims, run.n(1000),
                                    seed, threads, scalar_seeded=False,
                                    tol=tol)
        for (p, q), report in cells.items():
            checks.append(from_report(
                'lieb_p%g_q%g_%dx%d' % (p, q, dims[0], dims[1]),
                'tr A^p K^* B^q K is concave for p + q <= 1', report))
    cells = theorems.lieb_sweep(list(LIEB_VIOLATING), (3, 3), run.n(10000),
                                seed, threads, tol=tol)
    for (p, q), report in cells.items():
        check = from_report('lieb_violation_p%g_q%g' % (p, q),
                            'concavity fails for p + q > 1', report,
                            expect_violation=True)
        check.passed = bool(check.passed and report.worst_margin < -1e-6)
        checks.append(check)
    frac = theorems.fraction_trace_concavity(
        1.0, 1.0, (3, 3), run.n(500), 8, windows=((0.6, 2.0), (0.6, 2.0)),
        outside_trials=run.n(2000), threads=threads, tol=tol)
    checks.append(from_report('fraction_trace', 'fraction trace form is '
                              'concave on D_2', frac))
    checks.append(from_report('fraction_trace_outside', 'not concave outside '
                              'D_2', frac.details['outside'],
                              expect_violation=True))
    for k, n in ((1, 3), (2, 3), (3, 2)):
        report = theorems.reciprocal_convexity(k, n, run.n(500), seed,
                                               threads=threads, tol=tol)
        checks.append(from_report('reciprocal_k%d' % k, '1/(t_1 ... t_k) and '
                                  'its reciprocal powers are operator convex',
                                  report))
    rng = run.rng(5)
    for i in range(3):
        f = theorems.random_resolvent(rng)
        report = theorems.quadratic_form_convexity(f, 3, run.n(500), seed,
                                                   threads, tol)
        checks.append(from_report('quadratic_form_%d' % i, '(f(A) xi | xi) '
                                  'is jointly convex for resolvent sums',
                                  report, details={'function': f.describe()}))
    for fixed in theorems.FROZEN_SLOTS:
        report = theorems.two_of_three(fixed, 1.0, 1.0, (2, 2), run.n(500),
                                       seed, threads, tol)
        checks.append(from_report('two_of_three_fixed_%s' % fixed,
                                  'convex in any two of A, B, K', report))
    report = theorems.two_of_three(None, 1.0, 1.0, (2, 2), run.n(10000), seed,
                                   threads, tol)
    checks.append(from_report('two_of_three_all_free', 'not jointly convex in '
                              'all three', report, expect_violation=True))
    for p, expect in ((0.5, False), (0.7, True)):
        report = theorems.theorem1_bridge(funcalc.exponent_product(p, p),
                                          (2, 2), run.n(500), seed, None,
                                          threads, tol)
        gap = report.details['max_discrepancy']
        check = from_report('tensor_trace_bridge_p%g' % p, 'trace form convex '
                            'iff f matrix convex of order (n, m)', report,
                            expect_violation=expect,
                            details={'max_discrepancy': gap})
        check.passed = bool(check.passed and gap <= 1e-10)
        checks.append(check)
    report = theorems.lieb_integral_convexity((2, 2), run.n(300), seed,
                                              threads=threads, tol=tol)
    checks.append(from_report('lieb_integral', 'the resolvent integral is '
                              'jointly convex', report))
    report = theorems.lieb_ruskai_convexity((3, 2), run.n(500), seed, threads,
                                            tol)
    checks.append(from_report('lieb_ruskai', 'K^* A^-1 K is jointly convex',
                              report))
    report = theorems.tensor_quadratic_convexity((2, 2), run.n(300), seed,
                                                 threads, tol)
    checks.append(from_report('tensor_quadratic', '((A^-1 (x) B^-1) xi | xi) '
                              'is jointly convex in (A, xi)', report))
    simplex = theorems.exponent_simplex_concavity(3, 2, 2, run.n(200), seed,
                                                  threads, tol)
    worst = min(simplex.values(), key=lambda r: r.worst_relative)
    checks.append(from_report('exponent_simplex', 't_1^p_1 ... t_k^p_k is '
                              'concave for sum p <= 1', worst,
                              details={'exponents': len(simplex)}))
    return checks


_BATTERIES = {'funcalc': funcalc_suite, 'means': means_suite,
              'domain': domain_suite, 'hessian': hessian_suite,
              'certify': certify_suite}


def run_checks(name, seed=0, threads=1, tol=None, trials=None):
    """Run one battery, or all of them.

    Return:
    list of (suite name, [Check, ...]) in fixed suite order.

    """
    if name not in SUITE_CHOICES:
        raise ValueError('unknown suite %r' % (name,))
    names = SUITES if name == 'all' else (name,)
    run = _Battery(seed, threads, tol, trials)
    results = []
    for suite_name in names:
        log.info('running %s suite (seed %d)', suite_name, seed)
        try:
            checks = _BATTERIES[suite_name](run)
        except (np.linalg.LinAlgError, FloatingPointError) as ex:
            raise OpConvexError('%s suite aborted: %s: %s'
                                % (suite_name, type(ex).__name__, ex))
        for check in checks:
            if not check.passed:
                log.warning('%s/%s failed: %s, margin %s', suite_name,
                            check.id, check.verdict, check.margin)
        log.info('%s suite: %d of %d checks passed', suite_name,
                 sum(c.passed for c in checks), len(checks))
        results.append((suite_name, checks))
    return results


def emit_report(results, seed=0):
    """The consolidated JSON document for suite results."""
    return {'tool_version': __version__, 'seed': seed,
            'suites': [{'name': name,
                        'checks': [check.to_json() for check in checks]}
                       for name, checks in results]}


def all_passed(results):
    return all(check.passed for _, checks in results for check in checks)


def run_suite(name, seed=0, out_path=None, threads=1, tol=None, trials=None):
    """Run a battery, write its report and return the exit code.

    Return:
    0 iff every contract held, 1 otherwise.

    """
    results = run_checks(name, seed, threads, tol, trials)
    matrixio.dump_json(emit_report(results, seed), out_path)
    return 0 if all_passed(results) else 1
