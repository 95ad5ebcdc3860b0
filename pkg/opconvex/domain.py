"""
The concavity domain D_k(mu_1, ..., mu_k) of the fraction product

    f(t_1, ..., t_k) = t_1/(t_1 + mu_1) * ... * t_k/(t_k + mu_k) .

A positive k-tuple t belongs to D_k when the matrix A_k(t) with diagonal
2 t_i / mu_i and every off-diagonal entry -1 is positive semi-definite.  The
classical Hessian of f factors as H_f = -A_k o P with P the rank one PSD
matrix f(t) a a^T, a_i = mu_i / (t_i (t_i + mu_i)), so f is concave exactly
on D_k.  For k = 2 membership reduces to t_1 t_2 >= mu_1 mu_2 / 4.

"""
import dataclasses
import logging

import numpy as np

from opconvex import funcalc, linalg
from opconvex.config import resolve
from opconvex.errors import ConfigError, DomainError, OpConvexError

log = logging.getLogger(__name__)

DEFAULT_BOX = (0.01, 3.0)
NONMEMBER_MARGIN = -0.1
MAX_DRAWS = 100000


@dataclasses.dataclass(frozen=True)
class DomainSpec(object):
    k: int
    mu: tuple

    def __post_init__(self):
        mu = tuple(float(v) for v in self.mu)
        if len(mu) != self.k or self.k < 1:
            raise ConfigError('D_k needs k = %d positive mu values, got %r'
                              % (self.k, self.mu))
        if any(v <= 0 for v in mu):
            raise ConfigError('mu values must be > 0: %r' % (mu,))
        object.__setattr__(self, 'mu', mu)

    @classmethod
    def of(cls, *mu):
        return cls(len(mu), tuple(mu))

    def function(self):
        """The fraction product whose concavity domain this is."""
        return funcalc.fraction_product(*self.mu)


@dataclasses.dataclass(frozen=True)
class Membership(object):
    member: bool
    margin: float
    matrix: np.ndarray

    def __bool__(self):
        return self.member

    def to_json(self):
        from opconvex import matrixio

        return {'member': self.member, 'margin': self.margin,
                'A_k': matrixio.matrix_to_json(self.matrix)}


def _point(d, t):
    t = tuple(float(v) for v in t)
    if len(t) != d.k:
        raise DomainError('D_%d needs a %d-tuple, got %r' % (d.k, d.k, t), t)
    if any(v <= 0 for v in t):
        raise DomainError('point must be positive: %r' % (t,), t)
    return t


def build_Ak(d, t):
    """A_k(t): diagonal 2 t_i / mu_i, off-diagonal -1."""
    t = _point(d, t)
    a = -np.ones((d.k, d.k))
    np.fill_diagonal(a, [2.0 * v / m for v, m in zip(t, d.mu)])
    return linalg.hermitian(a)


def domain_contains(d, t, tol=None):
    """Membership of t in D_k by the eigenvalue test.

    Return:
    Membership(member, margin, A_k); margin is min_eigenvalue(A_k) and the
    point is a member iff margin >= -psd_tol.  Membership is truthy iff
    member.

    """
    tol = resolve(tol)
    a = build_Ak(d, t)
    margin = linalg.min_eigenvalue(a, tol)
    return Membership(bool(margin >= -tol.psd_tol), float(margin), a)


def d2_closed_form(mu1, mu2, t1, t2):
    return t1 * t2 >= mu1 * mu2 / 4.0


def classical_hessian(d, t):
    """Hessian of the fraction product at t and its Hadamard factor P.

    Return:
    (H, P) real symmetric k x k arrays with H = -A_k(t) o P.  Entries of H
    come from the closed partial derivatives:

        H_ii = -2 mu_i f / (t_i (t_i + mu_i)^2)
        H_ij = f mu_i mu_j / (t_i t_j (t_i + mu_i)(t_j + mu_j))

    """
    t = _point(d, t)
    f = d.function().evaluate(t)
    a = np.array([m / (v * (v + m)) for v, m in zip(t, d.mu)])
    p = f * np.outer(a, a)
    h = p.copy()
    for i, (v, m) in enumerate(zip(t, d.mu)):
        h[i, i] = -2.0 * m * f / (v * (v + m) ** 2)
    h.flags.writeable = False
    p.flags.writeable = False
    return h, p


def hadamard_inverse(p):
    """Entrywise reciprocal; P from classical_hessian has no zero entries."""
    p = np.asarray(p)
    if np.any(p == 0):
        raise DomainError('matrix has a zero entry and no Hadamard inverse',
                          None)
    return 1.0 / p


def _draw(d, rng, box):
    lo, hi = box
    return tuple(rng.uniform(lo, hi, d.k))


def random_member(d, rng, box=DEFAULT_BOX, margin=0.0, tol=None):
    """Rejection sample a point of D_k in the box with margin >= margin."""
    for _ in range(MAX_DRAWS):
        t = _draw(d, rng, box)
        if domain_contains(d, t, tol).margin >= margin:
            return t
    raise OpConvexError('no point of D_%d with margin >= %g in box %r'
                        % (d.k, margin, box))


def random_nonmember(d, rng, box=DEFAULT_BOX, margin=NONMEMBER_MARGIN,
                     tol=None):
    """Rejection sample a point outside D_k with A_k margin below margin."""
    if d.k == 1:
        raise ConfigError('D_1 is the whole positive half line')
    for _ in range(MAX_DRAWS):
        t = _draw(d, rng, box)
        if domain_contains(d, t, tol).margin < margin:
            return t
    raise OpConvexError('no point outside D_%d with margin < %g in box %r'
                        % (d.k, margin, box))


def d2_cross_check(mu, points, tol=None):
    """Count disagreements of d2_closed_form with the eigenvalue test.

    Return:
    (checked, mismatches, first mismatching point or None)

    """
    d = DomainSpec.of(*mu)
    if d.k != 2:
        raise ConfigError('the closed form describes D_2 only')
    mismatches = 0
    first = None
    for t in points:
        if d2_closed_form(mu[0], mu[1], t[0], t[1]) != \
                domain_contains(d, t, tol).member:
            mismatches += 1
            if first is None:
                first = tuple(t)
    log.debug('D_2%r cross-check: %d points, %d mismatches', tuple(mu),
              len(points), mismatches)
    return len(points), mismatches, first
