"""
Randomized midpoint convexity certification of operator maps.

A MapSpec names one map F and how to sample its inputs.  A trial draws two
input tuples X and Y, and measures the midpoint gap

    gap = (F(X) + F(Y)) / 2 - F((X + Y) / 2)

by its smallest eigenvalue (matrix valued F) or its value (scalar F).  The
margin is the gap for convex maps and minus the gap for concave maps, so a
negative margin beyond tolerance is a violation either way.  Frozen slots
take the same value in X and Y.

Targets and their input slots:

  tensor_calculus   X0 .. X{k-1}     f(X0, ..., X{k-1})
  trace_form        A, B; K frozen   tr f(A, B)(K^*) K
  quadratic_form    A, xi            (f(A) xi | xi)
  integral_form     A, B, K          sum_j w_j tr (A+u_j)^-1 K^* (B+u_j)^-1 K
  two_of_three      A, B, K          tr (A+u)^-1 K^* (B+v)^-1 K
  lieb_ruskai       A, K             K^* A^-1 K
  tensor_quadratic  A, xi; B frozen  ((A^-1 (x) B^-1) xi | xi)

For A n x n and B m x m, K is m x n, except for lieb_ruskai where K is
n x m.

"""
import dataclasses
import itertools
import logging
import math

import numpy as np

from opconvex import domain, funcalc, linalg
from opconvex.certify import report as reports
from opconvex.certify import sampling
from opconvex.config import resolve
from opconvex.errors import ConfigError, DomainError

log = logging.getLogger(__name__)

TENSOR_CALCULUS = 'tensor_calculus'
TRACE_FORM = 'trace_form'
QUADRATIC_FORM = 'quadratic_form'
INTEGRAL_FORM = 'integral_form'
TWO_OF_THREE = 'two_of_three'
LIEB_RUSKAI = 'lieb_ruskai'
TENSOR_QUADRATIC = 'tensor_quadratic'

TARGETS = (TENSOR_CALCULUS, TRACE_FORM, QUADRATIC_FORM, INTEGRAL_FORM,
           TWO_OF_THREE, LIEB_RUSKAI, TENSOR_QUADRATIC)

TARGET_ALIASES = {'tensor': TENSOR_CALCULUS, 'trace': TRACE_FORM,
                  'quadratic': QUADRATIC_FORM, 'integral': INTEGRAL_FORM}

# Targets whose f is a user FunctionSpec, with its required arity.
_NEEDS_F = {TENSOR_CALCULUS: None, TRACE_FORM: 2, QUADRATIC_FORM: 1}

_SLOTS = {
    TRACE_FORM: ('A', 'B'),
    QUADRATIC_FORM: ('A', 'xi'),
    INTEGRAL_FORM: ('A', 'B', 'K'),
    TWO_OF_THREE: ('A', 'B', 'K'),
    LIEB_RUSKAI: ('A', 'K'),
    TENSOR_QUADRATIC: ('A', 'xi'),
}

DEFAULT_K_WINDOW = (0.1, 2.0)


def _default_direction(target, f):
    if target in (TENSOR_CALCULUS, TRACE_FORM) and f is not None and \
            f.kind in (funcalc.EXPONENT, funcalc.FRACTION):
        return 'concave'
    return 'convex'


def fraction_windows(mu, width=3.0):
    """Windows whose lower corner lies in D_k(mu), so the whole box does."""
    k = len(mu)
    c = max(0.1, (k - 1) / 2.0 + 0.1)
    return tuple((c * m, c * m + width) for m in mu)


@dataclasses.dataclass(frozen=True)
class MapSpec(object):
    """One certifiable map and its sampling rules.

    Arguments:
    target         -- one of TARGETS
    f              -- FunctionSpec (tensor_calculus, trace_form,
                      quadratic_form)
    dims           -- matrix orders: (n_1, ..., n_k) for tensor_calculus,
                      (n, m) for two-matrix maps, (n,) for quadratic_form
    windows        -- eigenvalue interval per matrix variable
    frozen         -- slot name shared by X and Y (integral_form,
                      two_of_three), or None
    direction      -- 'convex' or 'concave'; defaults by target and f
    params         -- u, v (two_of_three), nodes, weights (integral_form),
                      k_window (norm range of free K and xi)
    complex_data   -- sample complex (True) or real matrices
    enforce_domain -- reject fraction windows outside D_k and check every
                      midpoint spectrum against D_k

    """
    target: str
    f: object = None
    dims: tuple = (3, 3)
    windows: tuple = None
    frozen: str = None
    direction: str = None
    params: dict = dataclasses.field(default_factory=dict)
    complex_data: bool = True
    enforce_domain: bool = True

    def __post_init__(self):
        target = TARGET_ALIASES.get(self.target, self.target)
        if target not in TARGETS:
            raise ConfigError('unknown target %r (expected one of %s)'
                              % (self.target, ', '.join(TARGETS)))
        object.__setattr__(self, 'target', target)
        dims = tuple(int(d) for d in self.dims)
        if any(d < 1 for d in dims):
            raise ConfigError('dims must be positive: %r' % (dims,))
        object.__setattr__(self, 'dims', dims)
        self._check_function()
        self._check_dims()
        if self.frozen is not None and self.frozen not in self.slots:
            raise ConfigError('%s has no slot %r to freeze'
                              % (target, self.frozen))
        if self.direction is None:
            object.__setattr__(self, 'direction',
                               _default_direction(target, self.f))
        reports.consistent_verdict(self.direction)
        object.__setattr__(self, 'windows', self._resolve_windows())
        object.__setattr__(self, 'params', dict(self.params))
        self._check_params()

    @property
    def slots(self):
        if self.target == TENSOR_CALCULUS:
            return tuple('X%d' % i for i in range(len(self.dims)))
        return _SLOTS[self.target]

    @property
    def matrix_count(self):
        """Number of leading dims that are sampled Hermitian variables."""
        if self.target in (TENSOR_CALCULUS,):
            return len(self.dims)
        if self.target in (TRACE_FORM, INTEGRAL_FORM, TWO_OF_THREE):
            return 2
        return 1

    def _check_function(self):
        if self.target not in _NEEDS_F:
            return
        if not isinstance(self.f, funcalc.FunctionSpec):
            raise ConfigError('%s needs a FunctionSpec' % (self.target,))
        arity = _NEEDS_F[self.target]
        if arity is not None and self.f.arity != arity:
            raise ConfigError('%s needs a function of %d variables, got %s'
                              % (self.target, arity, self.f.describe()))

    def _check_dims(self):
        if self.target == TENSOR_CALCULUS:
            if len(self.dims) != self.f.arity:
                raise ConfigError('%s needs %d dims, got %r'
                                  % (self.f.describe(), self.f.arity,
                                     self.dims))
        elif self.target == QUADRATIC_FORM:
            if len(self.dims) != 1:
                raise ConfigError('quadratic_form needs one dim, got %r'
                                  % (self.dims,))
        elif len(self.dims) != 2:
            raise ConfigError('%s needs dims (n, m), got %r'
                              % (self.target, self.dims))

    def _resolve_windows(self):
        count = self.matrix_count
        windows = self.windows
        if windows is None:
            if self.f is not None and self.f.kind == funcalc.FRACTION and \
                    self.enforce_domain:
                windows = fraction_windows(self.f.mu)
            else:
                windows = (sampling.DEFAULT_WINDOW,) * count
        windows = tuple(windows)
        if len(windows) == 2 and not isinstance(windows[0], (tuple, list)):
            windows = (windows,) * count
        windows = tuple((float(lo), float(hi)) for lo, hi in windows)
        if len(windows) != count:
            raise ConfigError('%s needs %d sampling windows, got %d'
                              % (self.target, count, len(windows)))
        for lo, hi in windows:
            if not lo <= hi:
                raise ConfigError('empty sampling window (%g, %g)' % (lo, hi))
        needs_positive = self.target != TENSOR_CALCULUS or \
            self.f.kind != funcalc.CUSTOM
        if self.target == QUADRATIC_FORM and self.f.kind == funcalc.CUSTOM:
            needs_positive = False
        if needs_positive and any(lo <= 0 for lo, _ in windows):
            raise ConfigError('sampling windows must be positive for %s: %r'
                              % (self.target, windows))
        if self.enforce_domain and self.f is not None and \
                self.f.kind == funcalc.FRACTION:
            corner = tuple(lo for lo, _ in windows)
            d = domain.DomainSpec(self.f.arity, self.f.mu)
            result = domain.domain_contains(d, corner)
            if not result.member:
                raise ConfigError(
                    'windows %r leave D_%d%r: lower corner %r has margin %.3e'
                    % (windows, d.k, d.mu, corner, result.margin))
        return windows

    def _check_params(self):
        if self.target == TWO_OF_THREE:
            for name in ('u', 'v'):
                if float(self.params.get(name, 1.0)) <= 0:
                    raise ConfigError('two_of_three needs %s > 0' % (name,))
        if self.target == INTEGRAL_FORM:
            nodes = self.params.get('nodes')
            weights = self.params.get('weights')
            if nodes is None or weights is None or \
                    len(nodes) != len(weights) or not len(nodes):
                raise ConfigError('integral_form needs matching quadrature '
                                  'nodes and weights')
            if any(w <= 0 for w in weights) or any(u < 0 for u in nodes):
                raise ConfigError('quadrature weights must be positive and '
                                  'nodes non-negative')

    def describe(self):
        what = self.f.describe() if self.f is not None else self.target
        return '%s[%s] dims %s' % (self.target, what,
                                   'x'.join(str(d) for d in self.dims))

    def to_json(self):
        out = {'target': self.target, 'dims': list(self.dims),
               'windows': [list(w) for w in self.windows],
               'direction': self.direction, 'frozen': self.frozen,
               'complex': self.complex_data}
        if self.f is not None:
            out['function'] = funcalc.function_spec_to_json(self.f)
        params = {k: v for k, v in self.params.items()
                  if not isinstance(v, np.ndarray)}
        if params:
            out['params'] = params
        return out


def _norm_scale(spec, rng):
    lo, hi = spec.params.get('k_window', DEFAULT_K_WINDOW)
    return rng.uniform(lo, hi)


def sample_inputs(spec, rng):
    """One input tuple for spec, as a dict slot -> array."""
    cd = spec.complex_data
    w = spec.windows
    t = spec.target
    if t == TENSOR_CALCULUS:
        return {'X%d' % i: sampling.random_hermitian(rng, n, w[i], cd)
                for i, n in enumerate(spec.dims)}
    n = spec.dims[0]
    if t == QUADRATIC_FORM:
        return {'A': sampling.random_hermitian(rng, n, w[0], cd),
                'xi': _norm_scale(spec, rng) * sampling.random_vector(rng, n,
                                                                      cd)}
    m = spec.dims[1]
    if t == TRACE_FORM:
        return {'A': sampling.random_pd(rng, n, w[0], cd),
                'B': sampling.random_pd(rng, m, w[1], cd)}
    if t in (INTEGRAL_FORM, TWO_OF_THREE):
        return {'A': sampling.random_pd(rng, n, w[0], cd),
                'B': sampling.random_pd(rng, m, w[1], cd),
                'K': _norm_scale(spec, rng) * sampling.random_k(rng, m, n, cd)}
    if t == LIEB_RUSKAI:
        return {'A': sampling.random_pd(rng, n, w[0], cd),
                'K': _norm_scale(spec, rng) * sampling.random_k(rng, n, m, cd)}
    return {'A': sampling.random_pd(rng, n, w[0], cd),
            'xi': _norm_scale(spec, rng) * sampling.random_vector(rng, n * m,
                                                                  cd)}


def sample_fixed(spec, rng):
    """Values shared by both endpoints of a trial."""
    t = spec.target
    if t == TRACE_FORM:
        k = spec.params.get('k')
        if k is None:
            k = sampling.random_k(rng, spec.dims[1], spec.dims[0],
                                  spec.complex_data)
        return {'K': np.asarray(k, dtype=complex)}
    if t == TENSOR_QUADRATIC:
        return {'B': sampling.random_pd(rng, spec.dims[1],
                                        sampling.DEFAULT_WINDOW,
                                        spec.complex_data)}
    return {}


def _shifted_inverse(a, shift, tol):
    a = np.asarray(a)
    return linalg.inverse(linalg.hermitian_part(a + shift * np.eye(len(a))),
                          tol)


def _resolvent_trace(a, b, k, u, v, tol):
    k = np.asarray(k)
    value = np.trace(_shifted_inverse(a, u, tol) @ k.conj().T
                     @ _shifted_inverse(b, v, tol) @ k)
    return float(value.real)


def evaluate(spec, inputs, tol=None):
    """F at one input tuple: a Hermitian matrix or a real number."""
    tol = resolve(tol)
    t = spec.target
    if t == TENSOR_CALCULUS:
        mats = [inputs['X%d' % i] for i in range(len(spec.dims))]
        return funcalc.func_calc_tensor(spec.f, mats, tol)
    if t == TRACE_FORM:
        return funcalc.trace_form(spec.f, inputs['A'], inputs['B'],
                                  inputs['K'], tol)
    if t == QUADRATIC_FORM:
        fa = linalg.apply_scalar_function(
            inputs['A'], lambda x: spec.f.evaluate((x,)), tol=tol)
        xi = np.asarray(inputs['xi'])
        return float(np.vdot(xi, fa @ xi).real)
    if t == INTEGRAL_FORM:
        return math.fsum(w * _resolvent_trace(inputs['A'], inputs['B'],
                                              inputs['K'], u, u, tol)
                         for u, w in zip(spec.params['nodes'],
                                         spec.params['weights']))
    if t == TWO_OF_THREE:
        return _resolvent_trace(inputs['A'], inputs['B'], inputs['K'],
                                float(spec.params.get('u', 1.0)),
                                float(spec.params.get('v', 1.0)), tol)
    if t == LIEB_RUSKAI:
        k = np.asarray(inputs['K'])
        a_inv = linalg.inverse(linalg.hermitian(inputs['A'], tol), tol)
        return linalg.hermitian_part(k.conj().T @ a_inv @ k)
    a_inv = linalg.inverse(linalg.hermitian(inputs['A'], tol), tol)
    b_inv = linalg.inverse(linalg.hermitian(inputs['B'], tol), tol)
    xi = np.asarray(inputs['xi'])
    return float(np.vdot(xi, linalg.kronecker_product(a_inv, b_inv)
                         @ xi).real)


def midpoint(x, y):
    return {name: (np.asarray(x[name]) + np.asarray(y[name])) / 2.0
            for name in x}


def _check_domain(spec, inputs, tol, label):
    """Every spectral tuple of the input matrices must lie in D_k.

    Raises DomainError, so a trial that strays is resampled.

    """
    if not spec.enforce_domain or spec.f is None or \
            spec.f.kind != funcalc.FRACTION:
        return
    names = spec.slots[:spec.matrix_count]
    spectra = [linalg.spectral_decompose(inputs[name], tol=tol).eigenvalues
               for name in names]
    d = domain.DomainSpec(spec.f.arity, spec.f.mu)
    for point in itertools.product(*spectra):
        result = domain.domain_contains(d, point, tol)
        if not result.member:
            raise DomainError('%s spectrum %r left D_%d (margin %.3e)'
                              % (label, point, d.k, result.margin), point)


def _magnitude(value):
    if isinstance(value, np.ndarray):
        return float(np.linalg.norm(value))
    return abs(value)


def midpoint_margin(spec, x, y, tol=None):
    """Margin and scale of the midpoint gap between input tuples x and y.

    Return:
    (margin, scale) with scale = 1 + |F(X)| + |F(Y)|; the trial violates
    when margin / scale < -violation_tol.

    """
    tol = resolve(tol)
    mid = midpoint(x, y)
    for label, inputs in (('X', x), ('Y', y), ('midpoint', mid)):
        _check_domain(spec, inputs, tol, label)
    fx = evaluate(spec, x, tol)
    fy = evaluate(spec, y, tol)
    fm = evaluate(spec, mid, tol)
    if isinstance(fm, np.ndarray):
        gap = linalg.hermitian_part((fx + fy) / 2.0 - fm)
        if spec.direction == 'concave':
            gap = -gap
        margin = linalg.min_eigenvalue(gap, tol)
    else:
        gap = (fx + fy) / 2.0 - fm
        margin = gap if spec.direction == 'convex' else -gap
    return float(margin), 1.0 + _magnitude(fx) + _magnitude(fy)


def draw_pair(spec, rng):
    """Two input tuples sharing the fixed and frozen slots."""
    fixed = sample_fixed(spec, rng)
    x = sample_inputs(spec, rng)
    y = sample_inputs(spec, rng)
    if spec.frozen is not None:
        y[spec.frozen] = x[spec.frozen]
    x.update(fixed)
    y.update(fixed)
    return x, y


def midpoint_result(spec, rng, tol=None):
    """One trial as a TrialResult with witness {'X': ..., 'Y': ...}."""
    x, y = draw_pair(spec, rng)
    margin, scale = midpoint_margin(spec, x, y, tol)
    return reports.TrialResult(margin, scale, {'X': x, 'Y': y})


def midpoint_trial(spec, rng, tol=None):
    """Margin of one randomized midpoint trial."""
    return midpoint_result(spec, rng, tol).margin


def certify(spec, trials, seed, threads=1, key=(), tol=None):
    """Run trials of spec and aggregate them into a ConvexityReport."""
    tol = resolve(tol)
    if trials < 1:
        raise ValueError('trials must be >= 1')
    results = reports.run_trials(lambda rng: midpoint_result(spec, rng, tol),
                                 trials, seed, threads, key, tol)
    report = reports.summarize(results, spec.direction, seed, tol,
                               {'spec': spec.to_json()})
    log.info('%s: %s after %d trials (worst margin %.3e)', spec.describe(),
             report.verdict, report.trials, report.worst_margin)
    return report


def scalar_spec(spec):
    """The 1 x 1 real version of spec."""
    return dataclasses.replace(spec, dims=(1,) * len(spec.dims),
                               complex_data=False)


def find_violation(spec, trials, seed, threads=1, key=(), ladder=None,
                   tol=None):
    """Search for a violation, starting from scalar instances.

    The ladder of dims is tried in order, by default 1 x ... x 1 real
    scalars followed by spec.dims; the search stops at the first report
    with a VIOLATION.

    Return:
    that report, or the report at the last rung; details record the dims
    searched.

    """
    tol = resolve(tol)
    if ladder is None:
        rungs = [scalar_spec(spec), spec]
    else:
        rungs = [dataclasses.replace(spec, dims=tuple(d),
                                     complex_data=spec.complex_data
                                     and any(v > 1 for v in d))
                 for d in ladder]
    searched = []
    report = None
    for level, rung in enumerate(rungs):
        searched.append(list(rung.dims))
        report = certify(rung, trials, seed, threads, tuple(key) + (level,),
                         tol)
        if report.violated:
            break
    details = dict(report.details)
    details['searched'] = searched
    return dataclasses.replace(report, details=details)
