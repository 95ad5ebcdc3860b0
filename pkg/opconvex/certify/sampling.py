"""
Random test inputs with controlled spectra.

Hermitian matrices are drawn as Q diag(l) Q^* with Q the (phase corrected)
QR factor of a Gaussian matrix and eigenvalues l uniform in a window, so the
spectrum of every sample, and of every convex combination of samples, stays
inside the window.

"""
import numpy as np

DEFAULT_WINDOW = (0.1, 3.0)


def gaussian(rng, shape, complex_data=True):
    z = rng.standard_normal(shape)
    if complex_data:
        z = z + 1j * rng.standard_normal(shape)
    return z


def random_unitary(rng, n, complex_data=True):
    """Haar distributed unitary (orthogonal for real data)."""
    q, r = np.linalg.qr(gaussian(rng, (n, n), complex_data))
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_hermitian(rng, n, window=DEFAULT_WINDOW, complex_data=True):
    lo, hi = window
    q = random_unitary(rng, n, complex_data)
    values = rng.uniform(lo, hi, n)
    m = (q * values) @ q.conj().T
    return (m + m.conj().T) / 2.0


def random_pd(rng, n, window=DEFAULT_WINDOW, complex_data=True):
    if window[0] <= 0:
        raise ValueError('positive definite window must start above 0')
    return random_hermitian(rng, n, window, complex_data)


def random_direction(rng, n, complex_data=True):
    """Hermitian matrix with Gaussian entries and unit Frobenius norm."""
    z = gaussian(rng, (n, n), complex_data)
    h = (z + z.conj().T) / 2.0
    return h / np.linalg.norm(h)


def random_psd_increment(rng, n, scale=1.0, complex_data=True):
    z = gaussian(rng, (n, n), complex_data)
    p = z @ z.conj().T
    return scale * p / np.linalg.norm(p)


def random_k(rng, rows, cols, complex_data=True):
    """Gaussian matrix normalized to unit Frobenius norm."""
    k = gaussian(rng, (rows, cols), complex_data)
    return k / np.linalg.norm(k)


def random_vector(rng, n, complex_data=True):
    v = gaussian(rng, (n,), complex_data)
    return v / np.linalg.norm(v)
