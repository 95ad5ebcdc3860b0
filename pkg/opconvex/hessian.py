"""
Divided differences and generalized Hessian matrices.

For a data set grid with nodes l_1(i) < ... < l_{n_i}(i) per variable and a
multi-index m = (m_1, ..., m_k) the generalized Hessian H(m) is the
symmetric block matrix of order n_1 + ... + n_k with

    H_us(m)[p, j] = [l_{m_s}(s), l_j(s) | l_p(u), l_{m_u}(u)]_f    u != s
    H_ss(m)[p, j] = 2 [l_{m_s}(s), l_p(s), l_j(s)]_f

where every variable not written out is frozen at its anchor node l_{m_i}(i).
f is matrix convex of the grid's order when every H(m) is positive
semi-definite over every grid; the scan below checks one grid.

Multi-indices are 0-based and nodes are kept in ascending order, so block
entries follow the grid ordering.

"""
import dataclasses
import itertools
import logging

import numpy as np

from opconvex import funcalc, linalg
from opconvex.certify import report as reports
from opconvex.config import resolve
from opconvex.errors import DerivativeError, DomainError, ShapeError

log = logging.getLogger(__name__)

PSD = 'psd'
NSD = 'nsd'


def divided_diff_1(g, x, y, dg=None, tol=None):
    """First divided difference [x, y]_g.

    Nodes closer than dd_tol use dg at their midpoint instead.

    """
    tol = resolve(tol)
    if abs(x - y) > tol.dd_tol:
        return (g(x) - g(y)) / (x - y)
    if dg is None:
        raise DerivativeError('nodes %r and %r coincide and no derivative '
                              'callback was given' % (x, y))
    return dg((x + y) / 2.0)


def divided_diff_2(g, x, y, z, dg=None, d2g=None, tol=None):
    """Second divided difference [x, y, z]_g, symmetric in the nodes.

    The nodes are sorted first.  Three coinciding nodes give d2g / 2.

    """
    tol = resolve(tol)
    x, y, z = sorted((x, y, z))
    if z - x <= tol.dd_tol:
        if d2g is None:
            raise DerivativeError('nodes %r coincide and no second derivative '
                                  'callback was given' % ((x, y, z),))
        return d2g((x + y + z) / 3.0) / 2.0
    return (divided_diff_1(g, y, z, dg, tol)
            - divided_diff_1(g, x, y, dg, tol)) / (z - x)


@dataclasses.dataclass(frozen=True)
class DataSetGrid(object):
    """Per-variable strictly increasing node lists."""
    nodes: tuple

    def __post_init__(self):
        nodes = tuple(tuple(float(v) for v in axis) for axis in self.nodes)
        if not nodes or any(not axis for axis in nodes):
            raise ShapeError('grid needs at least one node per variable')
        for i, axis in enumerate(nodes):
            if any(b <= a for a, b in zip(axis, axis[1:])):
                raise ShapeError('nodes of variable %d must be strictly '
                                 'increasing: %r' % (i, axis))
        object.__setattr__(self, 'nodes', nodes)

    @classmethod
    def from_matrices(cls, mats, tol=None):
        """The grid of (clustered) eigenvalues of a k-tuple of matrices."""
        tol = resolve(tol)
        return cls(tuple(linalg.spectral_decompose(linalg.hermitian(m, tol),
                                                   tol=tol).eigenvalues
                         for m in mats))

    @classmethod
    def from_json(cls, obj):
        from opconvex.errors import SerializationError

        try:
            return cls(tuple(obj['nodes']))
        except (KeyError, TypeError) as ex:
            raise SerializationError('grid JSON needs "nodes": %s' % (ex,))

    def to_json(self):
        return {'nodes': [list(axis) for axis in self.nodes]}

    @property
    def k(self):
        return len(self.nodes)

    @property
    def order(self):
        return tuple(len(axis) for axis in self.nodes)

    def point(self, index):
        return tuple(axis[i] for axis, i in zip(self.nodes, index))

    def indices(self):
        """All multi-indices in lexicographic order."""
        return itertools.product(*(range(n) for n in self.order))

    def points(self):
        return [self.point(index) for index in self.indices()]


def random_grid(rng, order, window=(0.1, 3.0), min_gap=0.05):
    """Grid of the given order with uniform nodes at least min_gap apart."""
    lo, hi = window
    nodes = []
    for n in order:
        if (n - 1) * min_gap >= hi - lo:
            raise ValueError('cannot place %d nodes %g apart in %r'
                             % (n, min_gap, window))
        while True:
            axis = np.sort(rng.uniform(lo, hi, n))
            if n == 1 or np.min(np.diff(axis)) >= min_gap:
                break
        nodes.append(tuple(axis))
    return DataSetGrid(tuple(nodes))


@dataclasses.dataclass(frozen=True)
class GeneralizedHessian(object):
    """H(m) for a grid of the given order, anchored at the 0-based index.

    factors, when present, is a pair of matrices whose entrywise product is
    matrix (a Hadamard factorization).

    """
    order: tuple
    index: tuple
    matrix: np.ndarray
    factors: tuple = None

    @property
    def offsets(self):
        return tuple(int(v) for v in np.concatenate(([0],
                                                     np.cumsum(self.order))))

    def block(self, u, s):
        off = self.offsets
        return self.matrix[off[u]:off[u + 1], off[s]:off[s + 1]]

    def min_eigenvalue(self, tol=None):
        return linalg.min_eigenvalue(self.matrix, tol)

    def max_eigenvalue(self, tol=None):
        return linalg.max_eigenvalue(self.matrix, tol)


def _check_index(grid, index):
    index = tuple(int(i) for i in index)
    if len(index) != grid.k:
        raise ShapeError('multi-index %r needs %d entries' % (index, grid.k))
    for i, n in zip(index, grid.order):
        if not 0 <= i < n:
            raise ShapeError('multi-index %r out of range for order %r'
                             % (index, grid.order))
    return index


def _freeze(m):
    m = np.array(m, dtype=float)
    m.flags.writeable = False
    return m


def _slice(f, anchor, s):
    """f and its derivatives along variable s with the others at anchor."""
    def at(x):
        t = list(anchor)
        t[s] = x
        return t

    return (lambda x: f.evaluate(at(x)),
            lambda x: f.partial(s, at(x)),
            lambda x: f.second_partial(s, s, at(x)))


def _mixed(f, anchor, s, xs, u, xu, tol):
    """[xs_0, xs_1]_s [xu_0, xu_1]_u of f with the others at anchor."""
    def at(a, b):
        t = list(anchor)
        t[s] = a
        t[u] = b
        return t

    def inner(a):
        return divided_diff_1(lambda b: f.evaluate(at(a, b)), xu[0], xu[1],
                              lambda b: f.partial(u, at(a, b)), tol)

    def inner_ds(a):
        return divided_diff_1(lambda b: f.partial(s, at(a, b)), xu[0], xu[1],
                              lambda b: f.second_partial(s, u, at(a, b)), tol)

    return divided_diff_1(inner, xs[0], xs[1], inner_ds, tol)


def generalized_hessian(f, grid, m, tol=None):
    """Assemble H(m) from partial divided differences of f.

    Arguments:
    f    -- FunctionSpec of arity grid.k
    grid -- DataSetGrid whose tuples lie in f's domain
    m    -- 0-based multi-index

    """
    tol = resolve(tol)
    if f.arity != grid.k:
        raise ShapeError('%s takes %d variables, grid has %d'
                         % (f.describe(), f.arity, grid.k))
    m = _check_index(grid, m)
    anchor = grid.point(m)
    size = sum(grid.order)
    h = np.zeros((size, size))
    off = np.concatenate(([0], np.cumsum(grid.order)))
    for s in range(grid.k):
        nodes = grid.nodes[s]
        g, dg, d2g = _slice(f, anchor, s)
        for p in range(len(nodes)):
            for j in range(p, len(nodes)):
                value = 2.0 * divided_diff_2(g, anchor[s], nodes[p], nodes[j],
                                             dg, d2g, tol)
                h[off[s] + p, off[s] + j] = h[off[s] + j, off[s] + p] = value
        for u in range(s + 1, grid.k):
            for p, xu in enumerate(grid.nodes[u]):
                for j, xs in enumerate(nodes):
                    value = _mixed(f, anchor, s, (anchor[s], xs),
                                   u, (xu, anchor[u]), tol)
                    h[off[u] + p, off[s] + j] = value
                    h[off[s] + j, off[u] + p] = value
    return GeneralizedHessian(grid.order, m, _freeze(h))


def _positive_grid(grid):
    for i, axis in enumerate(grid.nodes):
        if axis[0] <= 0:
            raise DomainError('grid nodes of variable %d must be positive: %r'
                              % (i, axis), axis)


def _expand(grid, blocks):
    """Block matrix with the constant blocks[u][s] on block (u, s)."""
    return np.block([[np.full((nu, ns), blocks[u][s])
                      for s, ns in enumerate(grid.order)]
                     for u, nu in enumerate(grid.order)])


def closed_form_hessian_fraction(mu, grid, m):
    """H(m) of the fraction product t_i / (t_i + mu_i) by its closed form.

    With a(i) = (mu_i / (l_1(i) + mu_i), ...) and f the value at the anchor

        H_us = f / (l_{m_u}(u) l_{m_s}(s)) a(u)^T a(s)
        H_ss = -2 f / (mu_s l_{m_s}(s)) a(s)^T a(s)

    The result carries factors (W, -A_k) where W = f w w^T is the PSD outer
    product of w = (a(1) / l_{m_1}(1), ..., a(k) / l_{m_k}(k)) and -A_k is
    A_k at the anchor expanded to constant blocks; H = W o (-A_k).

    """
    from opconvex import domain

    mu = tuple(float(v) for v in mu)
    if len(mu) != grid.k:
        raise ShapeError('need %d mu values, got %d' % (grid.k, len(mu)))
    _positive_grid(grid)
    m = _check_index(grid, m)
    anchor = grid.point(m)
    d = domain.DomainSpec(grid.k, mu)
    f = d.function().evaluate(anchor)
    w = np.concatenate([np.array([mu[i] / (v + mu[i]) for v in axis])
                        / anchor[i] for i, axis in enumerate(grid.nodes)])
    outer = f * np.outer(w, w)
    neg_ak = _expand(grid, -domain.build_Ak(d, anchor).real)
    return GeneralizedHessian(grid.order, m, _freeze(outer * neg_ak),
                              (_freeze(outer), _freeze(neg_ak)))


def closed_form_hessian_reciprocal(grid, m):
    """H(m) of 1 / (t_1 ... t_k): f a a^T with 2 on diagonal blocks, 1 off.

    a = (a(1), ..., a(k)) with a(i) = (1 / l_1(i), ..., 1 / l_{n_i}(i)).

    """
    _positive_grid(grid)
    m = _check_index(grid, m)
    anchor = grid.point(m)
    f = 1.0 / np.prod(anchor)
    a = np.concatenate([1.0 / np.array(axis) for axis in grid.nodes])
    weights = _expand(grid, 1.0 + np.eye(grid.k))
    outer = f * np.outer(a, a)
    return GeneralizedHessian(grid.order, m, _freeze(outer * weights),
                              (_freeze(outer), _freeze(weights)))


def _membership(f, grid, tol):
    if f.kind != funcalc.FRACTION:
        return None
    from opconvex import domain

    d = domain.DomainSpec(grid.k, f.mu)
    out = []
    for point in grid.points():
        result = domain.domain_contains(d, point, tol)
        out.append({'point': point, 'member': result.member,
                    'margin': result.margin})
    return out


def hessian_scan(f, grid, mode=PSD, tol=None):
    """Check every H(m) of a grid for semi-definiteness.

    Arguments:
    f    -- FunctionSpec
    grid -- DataSetGrid, taken as given (tuples outside D_k are allowed)
    mode -- 'psd' (convexity) or 'nsd' (concavity)

    Return:
    ConvexityReport: CONVEX-consistent (psd) or CONCAVE-consistent (nsd) iff
    every H(m) passes within psd_tol, else VIOLATION.  worst_margin is the
    min eigenvalue (psd) or minus the max eigenvalue (nsd) of the worst H(m);
    details hold per_index results, the worst extreme eigenvalue and, for
    fraction products, per-tuple D_k membership.

    """
    tol = resolve(tol)
    mode = str(mode).lower()
    if mode not in (PSD, NSD):
        raise ValueError('mode must be psd or nsd: %r' % (mode,))
    direction = 'convex' if mode == PSD else 'concave'
    per_index = []
    results = []
    for i, m in enumerate(grid.indices()):
        h = generalized_hessian(f, grid, m, tol)
        if mode == PSD:
            extreme = h.min_eigenvalue(tol)
            margin = extreme
        else:
            extreme = h.max_eigenvalue(tol)
            margin = -extreme
        per_index.append({'index': m, 'eigenvalue': extreme})
        results.append(reports.TrialResult(margin, 1.0, {'index': m,
                                                          'point': grid.point(m),
                                                          'hessian': h.matrix},
                                           i))
    worst = reports.worst_of(results)
    verdict = reports.consistent_verdict(direction)
    if worst.margin < -tol.psd_tol:
        verdict = reports.VIOLATION
    details = {'mode': mode, 'order': grid.order, 'per_index': per_index,
               'worst_index': worst.witness['index'],
               'worst_eigenvalue': per_index[worst.index]['eigenvalue']}
    membership = _membership(f, grid, tol)
    if membership is not None:
        details['membership'] = membership
    log.info('%s scan of %s on order %r: %s (worst eigenvalue %.3e at %r)',
             mode, f.describe(), grid.order, verdict,
             details['worst_eigenvalue'], details['worst_index'])
    return reports.ConvexityReport(verdict, len(results), float(worst.margin),
                                   worst.witness, None, direction,
                                   float(worst.margin), worst.index, details)
