"""
Dense complex Hermitian linear algebra.

Matrices are numpy complex128 arrays (each entry a pair of doubles).  Values
built by the constructors here are marked read-only so they can be shared
freely between threads.

Eigenvalues and eigenvectors come from a cyclic Jacobi iteration adapted to
complex Hermitian matrices.  Each rotation zeroes one off-diagonal pair
(p, q) with the unitary

    G = | c            s*e^{i theta} |
        | -s*e^{-i theta}  c         |      a_pq = |a_pq| e^{i theta}

so that the updated matrix is G^* A G.  Sweeps repeat until the
off-diagonal Frobenius mass drops below jacobi_rel_tol * ||A||_F.

"""
import dataclasses
import logging
import math

import numpy as np

from opconvex.config import resolve
from opconvex.errors import (DomainError, EigensolverError, NotHermitianError,
                             ShapeError)

log = logging.getLogger(__name__)


def _freeze(a):
    a.flags.writeable = False
    return a


def general_matrix(data):
    """Return data as a read-only complex 2-D array."""
    a = np.array(data, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ShapeError('expected a non-empty 2-D matrix, got shape %s'
                         % (a.shape,))
    if not np.all(np.isfinite(a)):
        raise ShapeError('matrix has non-finite entries')
    return _freeze(a)


def hermitian_part(m):
    """(M + M^*)/2 as a read-only complex array, without validation."""
    a = np.asarray(m, dtype=complex)
    return _freeze((a + a.conj().T) / 2.0)


def hermitian(data, tol=None):
    """Validate and symmetrize a Hermitian matrix.

    Arguments:
    data -- array-like square matrix
    tol  -- Tolerances; entries must satisfy |M_ij - conj(M_ji)| within
            hermiticity * max(1, max|M|)

    Return:
    read-only complex array (M + M^*)/2

    """
    tol = resolve(tol)
    a = general_matrix(data)
    if a.shape[0] != a.shape[1]:
        raise ShapeError('Hermitian matrix must be square, got shape %s'
                         % (a.shape,))
    scale = max(1.0, float(np.max(np.abs(a))))
    skew = float(np.max(np.abs(a - a.conj().T)))
    if skew > tol.hermiticity * scale:
        raise NotHermitianError('matrix is not Hermitian: max |M - M*| = %.3e'
                                % (skew,))
    return hermitian_part(a)


def _check_square(m, what='matrix'):
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ShapeError('%s must be a non-empty square matrix, got shape %s'
                         % (what, a.shape))
    return a


def off_diagonal_norm(m):
    a = np.asarray(m)
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def _rotate(a, v, p, q):
    apq = a[p, q]
    r = abs(apq)
    phase = apq / r
    tau = (a[q, q].real - a[p, p].real) / (2.0 * r)
    if abs(tau) > 1e150:
        t = 0.5 / tau
    else:
        t = (1.0 if tau >= 0.0 else -1.0) / (abs(tau)
                                             + math.sqrt(1.0 + tau * tau))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    g = np.array([[c, s * phase], [-s * phase.conjugate(), c]])
    idx = [p, q]
    a[:, idx] = a[:, idx] @ g
    a[idx, :] = g.conj().T @ a[idx, :]
    a[p, q] = a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real
    v[:, idx] = v[:, idx] @ g


def jacobi_eigh(m, tol=None):
    """Eigen-decompose a Hermitian matrix by cyclic Jacobi rotations.

    Arguments:
    m   -- Hermitian matrix (not re-validated)
    tol -- Tolerances (jacobi_max_sweeps, jacobi_rel_tol)

    Return:
    (eigenvalues, eigenvectors): eigenvalues real and ascending, eigenvectors
    the matching columns of a unitary matrix.

    """
    tol = resolve(tol)
    a = np.array(_check_square(m), dtype=complex)
    if not np.all(np.isfinite(a)):
        raise EigensolverError('matrix has non-finite entries', math.nan, 0)
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = float(np.linalg.norm(a))
    threshold = tol.jacobi_rel_tol * scale
    # Entries this small cannot lift the residual above threshold.
    negligible = max(threshold / n, np.finfo(float).tiny * max(1.0, scale))
    sweep = 0
    while True:
        residual = off_diagonal_norm(a)
        if not math.isfinite(residual):
            raise EigensolverError('Jacobi iteration produced non-finite '
                                   'entries after %d sweeps' % (sweep,),
                                   residual, sweep)
        if residual <= threshold:
            break
        if sweep >= tol.jacobi_max_sweeps:
            raise EigensolverError(
                'Jacobi iteration did not converge after %d sweeps: '
                'off-diagonal residual %.3e' % (sweep, residual),
                residual, sweep)
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) > negligible:
                    _rotate(a, v, p, q)
        sweep += 1
    w = np.diag(a).real
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise EigensolverError('Jacobi iteration produced non-finite '
                               'eigenpairs', residual, sweep)
    order = np.argsort(w, kind='stable')
    return w[order], v[:, order]


@dataclasses.dataclass(frozen=True)
class SpectralData(object):
    """Spectral decomposition M = sum_i eigenvalues[i] * projections[i].

    eigenvalues are distinct and ascending.  basis holds, for each
    eigenvalue, the orthonormal eigenvectors (as columns) spanning the range
    of the matching projection.

    """
    eigenvalues: tuple
    projections: tuple
    basis: tuple

    @property
    def dim(self):
        return self.projections[0].shape[0]

    @property
    def multiplicities(self):
        return tuple(b.shape[1] for b in self.basis)

    def expanded(self):
        """Eigenvalues repeated by multiplicity, with a unitary basis.

        Return:
        (values, unitary) such that M = unitary diag(values) unitary^*

        """
        values = np.repeat(np.array(self.eigenvalues, dtype=float),
                           self.multiplicities)
        return values, np.hstack(self.basis)

    def reconstruct(self):
        return sum(lam * p for lam, p in zip(self.eigenvalues,
                                             self.projections))


def spectral_decompose(m, cluster_tol=None, tol=None):
    """Spectral data of a Hermitian matrix.

    Eigenvalues closer than cluster_tol to their neighbour are merged into
    one cluster, represented by the cluster mean, sharing one projection.

    Arguments:
    m           -- Hermitian matrix
    cluster_tol -- merge distance; defaults to tol.cluster_tol
    tol         -- Tolerances

    Return:
    SpectralData

    """
    tol = resolve(tol)
    if cluster_tol is None:
        cluster_tol = tol.cluster_tol
    if cluster_tol < 0:
        raise ValueError('cluster_tol must be non-negative')
    w, v = jacobi_eigh(m, tol)
    groups = [[0]]
    for i in range(1, len(w)):
        if w[i] - w[i - 1] <= cluster_tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = []
    projections = []
    basis = []
    for group in groups:
        vecs = _freeze(v[:, group].copy())
        eigenvalues.append(float(np.mean(w[group])))
        projections.append(hermitian_part(vecs @ vecs.conj().T))
        basis.append(vecs)
    return SpectralData(tuple(eigenvalues), tuple(projections), tuple(basis))


def evaluate_scalar(g, value, what='function'):
    """g(value) as a float, turning failures into DomainError."""
    try:
        with np.errstate(all='ignore'):
            result = g(value)
    except (ValueError, ZeroDivisionError, ArithmeticError) as ex:
        raise DomainError('%s undefined at eigenvalue %r: %s'
                          % (what, value, ex), value)
    if isinstance(result, complex) or np.iscomplexobj(result):
        raise DomainError('%s is not real at eigenvalue %r' % (what, value),
                          value)
    result = float(result)
    if not math.isfinite(result):
        raise DomainError('%s undefined at eigenvalue %r' % (what, value),
                          value)
    return result


def apply_to_spectrum(spectral, g):
    """sum_i g(lambda_i) P_i for precomputed spectral data."""
    values = [evaluate_scalar(g, lam) for lam in spectral.eigenvalues]
    out = sum(val * p for val, p in zip(values, spectral.projections))
    return hermitian_part(out)


def apply_scalar_function(m, g, cluster_tol=None, tol=None):
    """One-variable functional calculus g(M) = sum_i g(lambda_i) P_i.

    Arguments:
    m -- Hermitian matrix
    g -- callable real -> real; it may raise or return nan/inf outside its
         domain, which is reported as DomainError naming the eigenvalue

    """
    return apply_to_spectrum(spectral_decompose(m, cluster_tol, tol), g)


def matrix_power(m, exponent, tol=None):
    """M^exponent through the spectral calculus (PD input for exponent < 0)."""
    return apply_scalar_function(m, lambda t: t ** exponent, tol=tol)


def inverse(m, tol=None):
    return apply_scalar_function(m, lambda t: 1.0 / t, tol=tol)


def kronecker_product(x, y):
    return _freeze(np.kron(np.asarray(x, dtype=complex),
                           np.asarray(y, dtype=complex)))


def kronecker_all(mats):
    out = np.ones((1, 1), dtype=complex)
    for mat in mats:
        out = np.kron(out, np.asarray(mat, dtype=complex))
    return _freeze(out)


def hadamard_product(x, y):
    """Entrywise product of two equally shaped matrices."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ShapeError('Hadamard product needs equal shapes: %s vs %s'
                         % (x.shape, y.shape))
    return _freeze(x * y)


def eigenvalues(m, tol=None):
    return jacobi_eigh(m, tol)[0]


def min_eigenvalue(m, tol=None):
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eigenvalues(m, tol)[0])


def max_eigenvalue(m, tol=None):
    return float(eigenvalues(m, tol)[-1])


def is_psd(m, psd_tol=None, tol=None):
    """True iff min_eigenvalue(m) >= -psd_tol."""
    tol = resolve(tol)
    if psd_tol is None:
        psd_tol = tol.psd_tol
    return min_eigenvalue(m, tol) >= -psd_tol


def hs_inner(x, y):
    """Hilbert-Schmidt pairing tr(X Y^*)."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ShapeError('Hilbert-Schmidt pairing needs equal shapes: %s vs %s'
                         % (x.shape, y.shape))
    return complex(np.sum(x * np.conj(y)))


def hs_norm(x):
    return math.sqrt(max(0.0, hs_inner(x, x).real))


def block_matrix(blocks):
    return _freeze(np.block([[np.asarray(b, dtype=complex) for b in row]
                             for row in blocks]))
