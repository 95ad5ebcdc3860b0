"""
Functional calculi for functions of k Hermitian variables.

For Hermitian X_1, ..., X_k with spectral decompositions X_i = sum l P the
tensor calculus is

    f(X_1, ..., X_k) = sum f(l_1, ..., l_k) P_1 (x) ... (x) P_k

acting on the tensor product of the underlying spaces, and for k = 2 the
variant calculus is the endomorphism of n x m matrices

    f(A, B)(K) = sum f(l_i, m_j) P_i K Q_j .

The identification Phi sends the basis tensor e_i (x) e_j to the matrix unit
e_ij (row-major).  The second tensor factor is the conjugate space of the
space B acts on, so on the tensor side B is represented by its entrywise
conjugate.  With that convention

    Phi(f(A, conj B) phi) = f(A, B)(Phi(phi))

holds on complex data, and superoperator_matrix() is exactly that tensor
operator.

"""
import dataclasses
import itertools
import logging
import math

import numpy as np

from opconvex import linalg
from opconvex.config import resolve
from opconvex.errors import ConfigError, DerivativeError, DomainError, ShapeError

log = logging.getLogger(__name__)

EXPONENT = 'exponent_product'
FRACTION = 'fraction_product'
RECIPROCAL = 'reciprocal_product'
RESOLVENT = 'resolvent_sum'
CUSTOM = 'custom'

KINDS = (EXPONENT, FRACTION, RECIPROCAL, RESOLVENT, CUSTOM)

_FLAG_PREFIXES = {'pow': EXPONENT, 'frac': FRACTION, 'recip': RECIPROCAL,
                  'resolvent': RESOLVENT}


def _factor(kind, param, t, order):
    """Derivative of the given order of one factor of a product kind."""
    if kind == EXPONENT:
        p = param
        if order == 0:
            return t ** p
        if order == 1:
            return p * t ** (p - 1.0)
        return p * (p - 1.0) * t ** (p - 2.0)
    if kind == FRACTION:
        mu = param
        if order == 0:
            return t / (t + mu)
        if order == 1:
            return mu / (t + mu) ** 2
        return -2.0 * mu / (t + mu) ** 3
    # RECIPROCAL
    p = param
    if order == 0:
        return t ** -p
    if order == 1:
        return -p * t ** (-p - 1.0)
    return p * (p + 1.0) * t ** (-p - 2.0)


@dataclasses.dataclass(frozen=True)
class FunctionSpec(object):
    """Symbolic description of a real function of k real variables.

    kind is one of KINDS.  Product kinds are f = g_1(t_1) ... g_k(t_k):

      exponent_product    t^p            p >= 0
      fraction_product    t / (t + mu)   mu > 0
      reciprocal_product  t^-p           p in [0, 1]

    resolvent_sum (arity 1) is beta + sum_i w_i / (t + s_i) with s_i >= 0
    and w_i > 0.  custom wraps a callable of k reals; derivatives are then
    only available through the grad(i, t) and hess(i, j, t) callbacks.

    """
    kind: str
    arity: int
    p: tuple = ()
    mu: tuple = ()
    beta: float = 0.0
    nodes: tuple = ()
    weights: tuple = ()
    func: object = None
    domain: object = None
    grad: object = None
    hess: object = None
    name: str = ''

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError('unknown function kind: %r' % (self.kind,))
        if not isinstance(self.arity, int) or self.arity < 1:
            raise ConfigError('arity must be a positive integer: %r'
                              % (self.arity,))
        if self.kind == EXPONENT:
            self._check_params(self.p, 'p', lambda v: v >= 0, '>= 0')
        elif self.kind == RECIPROCAL:
            self._check_params(self.p, 'p', lambda v: 0 <= v <= 1,
                               'in [0, 1]')
        elif self.kind == FRACTION:
            self._check_params(self.mu, 'mu', lambda v: v > 0, '> 0')
        elif self.kind == RESOLVENT:
            if self.arity != 1:
                raise ConfigError('resolvent_sum has arity 1')
            if len(self.nodes) != len(self.weights) or not self.nodes:
                raise ConfigError('resolvent_sum needs matching, non-empty '
                                  'nodes and weights')
            if any(s < 0 for s in self.nodes):
                raise ConfigError('resolvent nodes must be >= 0: %r'
                                  % (self.nodes,))
            if any(w <= 0 for w in self.weights):
                raise ConfigError('resolvent weights must be > 0: %r'
                                  % (self.weights,))
        elif not callable(self.func):
            raise ConfigError('custom function needs a callable')

    def _check_params(self, values, label, ok, text):
        if len(values) != self.arity:
            raise ConfigError('%s needs %d values for %s, got %d'
                              % (self.kind, self.arity, label, len(values)))
        bad = [v for v in values if not ok(v)]
        if bad:
            raise ConfigError('%s parameters %s must be %s: %r'
                              % (self.kind, label, text, bad))

    @property
    def is_product(self):
        return self.kind in (EXPONENT, FRACTION, RECIPROCAL)

    def _params(self):
        return self.mu if self.kind == FRACTION else self.p

    def describe(self):
        if self.kind == EXPONENT:
            return 'pow:' + ','.join('%g' % v for v in self.p)
        if self.kind == FRACTION:
            return 'frac:' + ','.join('%g' % v for v in self.mu)
        if self.kind == RECIPROCAL:
            return 'recip:' + ','.join('%g' % v for v in self.p)
        if self.kind == RESOLVENT:
            return 'resolvent:beta=%g;s=%s;w=%s' % (
                self.beta, ','.join('%g' % v for v in self.nodes),
                ','.join('%g' % v for v in self.weights))
        return self.name or 'custom'

    def in_domain(self, t):
        """True iff the point t lies in the natural domain of f."""
        if len(t) != self.arity:
            return False
        if self.kind == CUSTOM:
            return True if self.domain is None else bool(self.domain(t))
        return all(v > 0 for v in t)

    def _require(self, t):
        if len(t) != self.arity:
            raise ShapeError('%s takes %d variables, got %d'
                             % (self.describe(), self.arity, len(t)))
        if not self.in_domain(t):
            raise DomainError('point %r outside the domain of %s'
                              % (tuple(t), self.describe()), tuple(t))

    def evaluate(self, t):
        t = tuple(float(v) for v in t)
        self._require(t)
        if self.is_product:
            return math.prod(_factor(self.kind, c, v, 0)
                             for c, v in zip(self._params(), t))
        if self.kind == RESOLVENT:
            x = t[0]
            return self.beta + sum(w / (x + s)
                                   for s, w in zip(self.nodes, self.weights))
        return linalg.evaluate_scalar(lambda _: self.func(*t), t,
                                      self.describe())

    def __call__(self, *t):
        return self.evaluate(t)

    def partial(self, i, t):
        """First partial derivative in variable i at t."""
        t = tuple(float(v) for v in t)
        self._require(t)
        if self.is_product:
            params = self._params()
            return math.prod(_factor(self.kind, params[j], t[j],
                                     1 if j == i else 0)
                             for j in range(self.arity))
        if self.kind == RESOLVENT:
            x = t[0]
            return -sum(w / (x + s) ** 2
                        for s, w in zip(self.nodes, self.weights))
        if self.grad is None:
            raise DerivativeError('no first derivative callback for %s'
                                  % (self.describe(),))
        return float(self.grad(i, t))

    def second_partial(self, i, j, t):
        """Second partial derivative in variables i and j at t."""
        t = tuple(float(v) for v in t)
        self._require(t)
        if self.is_product:
            params = self._params()
            orders = [0] * self.arity
            orders[i] += 1
            orders[j] += 1
            return math.prod(_factor(self.kind, params[v], t[v], orders[v])
                             for v in range(self.arity))
        if self.kind == RESOLVENT:
            x = t[0]
            return 2.0 * sum(w / (x + s) ** 3
                             for s, w in zip(self.nodes, self.weights))
        if self.hess is None:
            raise DerivativeError('no second derivative callback for %s'
                                  % (self.describe(),))
        return float(self.hess(i, j, t))

    def classical_hessian(self, t):
        return np.array([[self.second_partial(i, j, t)
                          for j in range(self.arity)]
                         for i in range(self.arity)])


def exponent_product(*p):
    return FunctionSpec(EXPONENT, len(p), p=tuple(float(v) for v in p))


def fraction_product(*mu):
    return FunctionSpec(FRACTION, len(mu), mu=tuple(float(v) for v in mu))


def reciprocal_product(*p):
    return FunctionSpec(RECIPROCAL, len(p), p=tuple(float(v) for v in p))


def resolvent_sum(beta, nodes, weights):
    return FunctionSpec(RESOLVENT, 1, beta=float(beta),
                        nodes=tuple(float(v) for v in nodes),
                        weights=tuple(float(v) for v in weights))


def custom(func, arity, domain=None, grad=None, hess=None, name='custom'):
    return FunctionSpec(CUSTOM, arity, func=func, domain=domain, grad=grad,
                        hess=hess, name=name)


def parse_function_spec(text):
    """Parse the command line syntax for a FunctionSpec.

    Accepted forms: "pow:0.5,0.5", "frac:1,1", "recip:1,1" and
    "resolvent:beta=0;s=1,2;w=1,1".

    """
    if not text or ':' not in text:
        raise ConfigError('function must look like kind:params, got %r'
                          % (text,))
    prefix, body = text.split(':', 1)
    kind = _FLAG_PREFIXES.get(prefix.strip())
    if kind is None:
        raise ConfigError('unknown function prefix %r (expected one of %s)'
                          % (prefix, ', '.join(sorted(_FLAG_PREFIXES))))
    try:
        if kind != RESOLVENT:
            values = [float(v) for v in body.split(',') if v.strip()]
            if kind == EXPONENT:
                return exponent_product(*values)
            if kind == FRACTION:
                return fraction_product(*values)
            return reciprocal_product(*values)
        fields = {}
        for part in body.split(';'):
            if not part.strip():
                continue
            key, _, value = part.partition('=')
            fields[key.strip()] = value
        return resolvent_sum(
            float(fields.get('beta', 0.0)),
            [float(v) for v in fields.get('s', '').split(',') if v.strip()],
            [float(v) for v in fields.get('w', '').split(',') if v.strip()])
    except ValueError as ex:
        raise ConfigError('bad function parameters in %r: %s' % (text, ex))


def function_spec_from_json(obj):
    if not isinstance(obj, dict) or 'kind' not in obj:
        raise ConfigError('function spec must be an object with a "kind"')
    kind = obj['kind']
    try:
        if kind == EXPONENT:
            return exponent_product(*obj['p'])
        if kind == FRACTION:
            return fraction_product(*obj['mu'])
        if kind == RECIPROCAL:
            return reciprocal_product(*obj['p'])
        if kind == RESOLVENT:
            return resolvent_sum(obj.get('beta', 0.0), obj['nodes'],
                                 obj['weights'])
    except (KeyError, TypeError) as ex:
        raise ConfigError('incomplete %s spec: %s' % (kind, ex))
    raise ConfigError('function kind %r cannot be read from JSON' % (kind,))


def function_spec_to_json(f):
    if f.kind in (EXPONENT, RECIPROCAL):
        return {'kind': f.kind, 'p': list(f.p)}
    if f.kind == FRACTION:
        return {'kind': f.kind, 'mu': list(f.mu)}
    if f.kind == RESOLVENT:
        return {'kind': f.kind, 'beta': f.beta, 'nodes': list(f.nodes),
                'weights': list(f.weights)}
    return {'kind': CUSTOM, 'name': f.describe(), 'arity': f.arity}


@dataclasses.dataclass(frozen=True)
class TensorVector(object):
    """Coefficients phi(m_1, ..., m_k) of a vector in a k-fold tensor product.

    coefficients is the flat row-major array of length prod(dims).

    """
    dims: tuple
    coefficients: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ShapeError('tensor dims must be positive: %r' % (self.dims,))
        coeffs = np.array(self.coefficients, dtype=complex).ravel()
        if coeffs.size != math.prod(dims):
            raise ShapeError('tensor of dims %r needs %d coefficients, got %d'
                             % (dims, math.prod(dims), coeffs.size))
        coeffs.flags.writeable = False
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'coefficients', coeffs)

    @classmethod
    def basis(cls, dims, index):
        coeffs = np.zeros(math.prod(dims), dtype=complex)
        coeffs[np.ravel_multi_index(index, dims)] = 1.0
        return cls(tuple(dims), coeffs)

    @classmethod
    def zeros(cls, dims):
        return cls(tuple(dims), np.zeros(math.prod(dims), dtype=complex))

    def norm(self):
        return float(np.linalg.norm(self.coefficients))

    def as_array(self):
        return self.coefficients.reshape(self.dims)


def _spectra(mats, tol):
    return [linalg.spectral_decompose(linalg.hermitian(m, tol), tol=tol)
            for m in mats]


def _grid_values(f, spectra):
    """f on every tuple of distinct eigenvalues, expanded by multiplicity."""
    shape = tuple(len(s.eigenvalues) for s in spectra)
    values = np.empty(shape)
    for index in itertools.product(*(range(n) for n in shape)):
        point = tuple(s.eigenvalues[i] for s, i in zip(spectra, index))
        if not f.in_domain(point):
            raise DomainError('eigenvalue tuple %r outside the domain of %s'
                              % (point, f.describe()), point)
        values[index] = f.evaluate(point)
    for axis, s in enumerate(spectra):
        values = np.repeat(values, s.multiplicities, axis=axis)
    return values


def func_calc_tensor(f, mats, tol=None):
    """Tensor functional calculus f(X_1, ..., X_k).

    Arguments:
    f    -- FunctionSpec of arity k
    mats -- sequence of k Hermitian matrices
    tol  -- Tolerances (tensor_cap bounds the product of dimensions)

    Return:
    Hermitian matrix of order prod(n_i) on X_1's space (x) ... (x) X_k's.

    """
    tol = resolve(tol)
    mats = list(mats)
    if len(mats) != f.arity:
        raise ShapeError('%s takes %d matrices, got %d'
                         % (f.describe(), f.arity, len(mats)))
    size = math.prod(np.shape(m)[0] for m in mats)
    if size > tol.tensor_cap:
        raise ShapeError('tensor space of dimension %d exceeds the cap %d'
                         % (size, tol.tensor_cap))
    spectra = _spectra(mats, tol)
    diag = _grid_values(f, spectra).ravel()
    unitary = linalg.kronecker_all([np.hstack(s.basis) for s in spectra])
    return linalg.hermitian_part((unitary * diag) @ unitary.conj().T)


def func_calc_variant(f, a, b, k, tol=None):
    """Variant calculus f(A, B)(K) = sum f(l_i, m_j) P_i K Q_j.

    Arguments:
    f -- FunctionSpec of arity 2
    a -- Hermitian n x n
    b -- Hermitian m x m
    k -- n x m matrix

    """
    tol = resolve(tol)
    if f.arity != 2:
        raise ShapeError('variant calculus needs a function of 2 variables')
    k = linalg.general_matrix(k)
    sa, sb = _spectra([a, b], tol)
    if k.shape != (sa.dim, sb.dim):
        raise ShapeError('K must be %dx%d, got %s'
                         % (sa.dim, sb.dim, k.shape))
    values = _grid_values(f, [sa, sb])
    ua = np.hstack(sa.basis)
    ub = np.hstack(sb.basis)
    inner = linalg.hadamard_product(values, ua.conj().T @ k @ ub)
    return linalg.general_matrix(ua @ inner @ ub.conj().T)


def superoperator_matrix(f, a, b, tol=None):
    """Matrix of K -> f(A, B)(K) acting on row-major vec(K).

    This is f(L_A, R_B), i.e. the tensor calculus with B on the conjugate
    space: sum f(l_i, m_j) P_i (x) conj(Q_j).

    """
    b = linalg.hermitian(b, tol)
    return func_calc_tensor(f, [a, b.conj()], tol)


def phi_map(phi):
    """Phi: basis tensor e_i (x) e_j -> matrix unit e_ij."""
    if len(phi.dims) != 2:
        raise ShapeError('Phi is defined on two-factor tensors, got dims %r'
                         % (phi.dims,))
    return linalg.general_matrix(phi.coefficients.reshape(phi.dims))


def phi_inverse(k):
    k = linalg.general_matrix(k)
    return TensorVector(k.shape, k.ravel())


def tensor_quadratic_value(f, a, b, phi, tol=None):
    """(f(A, B) phi | phi) on the space of A (x) the conjugate of B's."""
    vec = phi.coefficients
    return float(np.vdot(vec, superoperator_matrix(f, a, b, tol) @ vec).real)


def intertwine_check(f, a, b, phi, tol=None):
    """||Phi(f(A,B) phi) - f(A,B)(Phi phi)||_HS; zero up to rounding."""
    a = linalg.hermitian(a, tol)
    b = linalg.hermitian(b, tol)
    if phi.dims != (a.shape[0], b.shape[0]):
        raise ShapeError('tensor dims %r do not match (%d, %d)'
                         % (phi.dims, a.shape[0], b.shape[0]))
    image = superoperator_matrix(f, a, b, tol) @ phi.coefficients
    lhs = phi_map(TensorVector(phi.dims, image))
    rhs = func_calc_variant(f, a, b, phi_map(phi), tol)
    return linalg.hs_norm(lhs - rhs)


def trace_form(f, a, b, k, tol=None):
    """tr[f(A, B)(K^*) K] for A n x n, B m x m and K m x n.

    For f(t, s) = t^p s^q this is tr A^p K^* B^q K.

    """
    k = linalg.general_matrix(k)
    n = np.shape(a)[0]
    m = np.shape(b)[0]
    if k.shape != (m, n):
        raise ShapeError('K must be %dx%d, got %s' % (m, n, k.shape))
    image = func_calc_variant(f, a, b, k.conj().T, tol)
    return float(np.trace(image @ k).real)


def trace_identity_gap(f, a, b, k, tol=None):
    """|tr f(A,B)(K^*)K - (f(A,B) phi | phi)| with phi = Phi^-1(K^*)."""
    k = linalg.general_matrix(k)
    phi = phi_inverse(k.conj().T)
    return abs(trace_form(f, a, b, k, tol)
               - tensor_quadratic_value(f, a, b, phi, tol))
