"""
subspace.py

Operator subspaces with Hilbert-Schmidt orthonormal bases, the QHM model
container, reachable / observable Krylov spaces and the linear (not
necessarily CPTP) minimal reduction used as a lower bound.
"""

import logging

import numpy as np
import scipy.linalg

from .channels import check_cptp
from .config import residual_tolerance, tolerance
from .errors import DimensionError
from .linalg import as_operator, check_density, dagger, unvec, vec

logger = logging.getLogger(__name__)


def _orthonormal_columns(M, tol, scale=None):
    """Left singular vectors of M above tol relative to scale (default: sigma_max)"""
    if M.shape[1] == 0:
        return M[:, :0]
    U, s, _ = scipy.linalg.svd(M, full_matrices=False)
    if scale is None:
        scale = s[0] if s.size else 0.0
    if scale <= 0.0:
        return M[:, :0]
    return U[:, s > tol * scale]


class OperatorSubspace(object):
    """Span of n x n operators, stored as orthonormal vectorized columns"""

    def __init__(self, dim_ambient, vectors, tol=None):
        vectors = np.asarray(vectors, dtype=complex)
        if vectors.ndim != 2 or vectors.shape[0] != dim_ambient ** 2:
            raise DimensionError("basis vectors must have length %d"
                                 % dim_ambient ** 2)
        self._n = dim_ambient
        self._vectors = vectors
        self._tol = tolerance(tol)

    @classmethod
    def empty(cls, dim_ambient):
        return cls(dim_ambient, np.zeros((dim_ambient ** 2, 0), dtype=complex))

    @classmethod
    def full(cls, dim_ambient):
        return cls(dim_ambient, np.eye(dim_ambient ** 2, dtype=complex))

    @property
    def dim_ambient(self):
        return self._n

    @property
    def vectors(self):
        return self._vectors

    @property
    def rank(self):
        return self._vectors.shape[1]

    @property
    def basis(self):
        return [unvec(v, self._n) for v in self._vectors.T]

    def __len__(self):
        return self.rank

    def project(self, X):
        x = vec(as_operator(X, self._n))
        return unvec(self._vectors @ (dagger(self._vectors) @ x), self._n)

    def residual(self, X):
        """Relative distance of X from the subspace"""
        X = as_operator(X, self._n)
        norm = np.linalg.norm(X)
        if norm == 0.0:
            return 0.0
        return float(np.linalg.norm(X - self.project(X)) / norm)

    def contains(self, X, tol=None):
        return self.residual(X) <= residual_tolerance(tol)

    def contains_subspace(self, other, tol=None):
        return all(self.contains(b, tol) for b in other.basis)

    def same_as(self, other, tol=None):
        return (self.rank == other.rank and self.contains_subspace(other, tol)
                and other.contains_subspace(self, tol))

    def gram_residual(self):
        gram = dagger(self._vectors) @ self._vectors
        return float(np.linalg.norm(gram - np.eye(self.rank)))

    def invariance_residual(self, superop):
        """max_b ||(1 - P) S(b)|| over the basis"""
        if self.rank == 0:
            return 0.0
        images = superop.transfer @ self._vectors
        leak = images - self._vectors @ (dagger(self._vectors) @ images)
        return float(np.max(np.linalg.norm(leak, axis=0)))

    def hermitian_basis(self):
        """Hermitian orthonormal basis of a subspace closed under adjoint"""
        parts = []
        for B in self.basis:
            parts.append(0.5 * (B + dagger(B)))
            parts.append(-0.5j * (B - dagger(B)))
        if not parts:
            return []
        real = np.array([np.concatenate([vec(H).real, vec(H).imag])
                         for H in parts]).T
        cols = _orthonormal_columns(real, self._tol)
        half = self._n ** 2
        return [unvec(c[:half] + 1j * c[half:], self._n) for c in cols.T]

    def __repr__(self):
        return "OperatorSubspace(n=%d, rank=%d)" % (self._n, self.rank)


def span_basis(ops, dim=None, tol=None):
    """SVD-based orthonormal basis of span(ops); empty input gives rank 0"""
    tol = tolerance(tol)
    ops = [np.asarray(X, dtype=complex) for X in ops]
    if not ops:
        if dim is None:
            raise DimensionError("span of no operators needs an explicit dim")
        return OperatorSubspace.empty(dim)
    n = ops[0].shape[0] if dim is None else dim
    M = np.array([vec(as_operator(X, n)) for X in ops]).T
    return OperatorSubspace(n, _orthonormal_columns(M, tol), tol)


def span_vectors(dim, vectors, tol=None):
    """span_basis for already vectorized operators (columns)"""
    return OperatorSubspace(dim, _orthonormal_columns(np.asarray(vectors), tolerance(tol)),
                            tol)


def project(s, X):
    return s.project(X)


def add(a, b, tol=None):
    if a.dim_ambient != b.dim_ambient:
        raise DimensionError("subspaces live in different ambient spaces")
    return span_vectors(a.dim_ambient, np.hstack([a.vectors, b.vectors]), tol)


def intersect(a, b, tol=None):
    """Intersection from the principal angles between a and b"""
    if a.dim_ambient != b.dim_ambient:
        raise DimensionError("subspaces live in different ambient spaces")
    if a.rank == 0 or b.rank == 0:
        return OperatorSubspace.empty(a.dim_ambient)
    overlap = dagger(a.vectors) @ b.vectors
    U, cosines, _ = scipy.linalg.svd(overlap, full_matrices=False)
    keep = cosines >= 1.0 - np.sqrt(tolerance(tol))
    vectors = a.vectors @ U[:, keep]
    return span_vectors(a.dim_ambient, vectors, tol)


def orthogonal_complement(s, within=None, tol=None):
    """Hilbert-Schmidt complement of s, in the whole space or inside within"""
    if within is None:
        null = scipy.linalg.null_space(dagger(s.vectors)) if s.rank else \
            np.eye(s.dim_ambient ** 2, dtype=complex)
        return OperatorSubspace(s.dim_ambient, null, tol)
    if within.rank == 0:
        return OperatorSubspace.empty(s.dim_ambient)
    rest = within.vectors - s.vectors @ (dagger(s.vectors) @ within.vectors)
    U, sv, _ = scipy.linalg.svd(rest, full_matrices=False)
    # same angle threshold as intersect
    return OperatorSubspace(s.dim_ambient, U[:, sv > np.sqrt(tolerance(tol))], tol)


def _block_krylov(transfer, seeds, dim, tol, label):
    """Breadth-first Krylov sweeps with deflation; stops when a sweep adds no rank"""
    basis = _orthonormal_columns(seeds, tol)
    frontier = basis
    limit = dim * dim
    sweep = 0
    while frontier.shape[1] and basis.shape[1] < limit:
        sweep += 1
        images = transfer @ frontier
        scale = np.linalg.norm(images, 2)
        residual = images - basis @ (dagger(basis) @ images)
        residual -= basis @ (dagger(basis) @ residual)
        fresh = _orthonormal_columns(residual, tol, scale=scale)
        logger.debug("%s sweep %d: +%d (rank %d)", label, sweep,
                     fresh.shape[1], basis.shape[1] + fresh.shape[1])
        if fresh.shape[1] == 0:
            break
        basis = np.hstack([basis, fresh])
        frontier = fresh
    return OperatorSubspace(dim, basis[:, :limit], tol)


class QhmModel(object):
    """Quantum hidden Markov model: CPTP map, output operators, initial states.

    block_dims is the block mask of a reduced model (the ambient is then
    the direct sum of d x d blocks); None means the whole operator space."""

    def __init__(self, superop, output_ops, initial_states, label="",
                 block_dims=None, metadata=None, validate=True, tol=None):
        if not superop.is_square:
            raise DimensionError("model dynamics must map a space to itself")
        self._dim = superop.in_dim
        self._map = superop
        self._outputs = [as_operator(C, self._dim) for C in output_ops]
        self._states = [as_operator(rho, self._dim) for rho in initial_states]
        if not self._states:
            raise DimensionError("a model needs at least one initial state")
        if block_dims is not None:
            block_dims = [int(d) for d in block_dims]
            if sum(block_dims) != self._dim:
                raise DimensionError("block mask %s does not fill dimension %d"
                                     % (block_dims, self._dim))
        self._block_dims = block_dims
        self.label = label
        self.metadata = dict(metadata or {})
        if validate:
            self.validate(tol)

    def validate(self, tol=None):
        check_cptp(self._map, tol, name="model map")
        for i, rho in enumerate(self._states):
            check_density(rho, tol, name="initial state %d" % i)
        return self

    @property
    def dim(self):
        return self._dim

    @property
    def map(self):
        return self._map

    @property
    def output_ops(self):
        return list(self._outputs)

    @property
    def initial_states(self):
        return list(self._states)

    @property
    def block_dims(self):
        return None if self._block_dims is None else list(self._block_dims)

    @property
    def operator_dim(self):
        """Dimension of the operator space the model lives on"""
        if self._block_dims is None:
            return self._dim ** 2
        return sum(d * d for d in self._block_dims)

    @property
    def output_matrix(self):
        """Rows conj(vec(C_i)): y = output_matrix @ vec(rho)"""
        if not self._outputs:
            return np.zeros((0, self._dim ** 2), dtype=complex)
        return np.array([np.conj(vec(C)) for C in self._outputs])

    def output(self, rho):
        return self.output_matrix @ vec(as_operator(rho, self._dim))

    def trajectory(self, rho, horizon):
        return self._map.power_apply(rho, horizon)

    def outputs(self, rho, horizon):
        """Output vectors for t = 0..horizon, shape (horizon + 1, n_outputs)"""
        C = self.output_matrix
        T = self._map.transfer
        x = vec(as_operator(rho, self._dim))
        rows = []
        for _ in range(horizon + 1):
            rows.append(C @ x)
            x = T @ x
        return np.array(rows)

    def __repr__(self):
        return "QhmModel(%r, dim=%d, %d outputs, %d states)" % (
            self.label, self._dim, len(self._outputs), len(self._states))


def reachable_subspace(m, tol=None):
    """span{A^t(rho_0)} over the initial states"""
    seeds = np.array([vec(rho) for rho in m.initial_states]).T
    return _block_krylov(m.map.transfer, seeds, m.dim, tolerance(tol), "reachable")


def observable_complement(m, tol=None):
    """span{A^{dagger t}(C_i)}, the orthogonal complement of the non-observable space"""
    if not m.output_ops:
        return OperatorSubspace.empty(m.dim)
    seeds = np.array([vec(C) for C in m.output_ops]).T
    return _block_krylov(dagger(m.map.transfer), seeds, m.dim, tolerance(tol),
                         "observable")


def non_observable_subspace(m, tol=None):
    return orthogonal_complement(observable_complement(m, tol), tol=tol)


class LinearReduction(object):
    """Compressed linear model on the effective subspace"""

    def __init__(self, effective, A_L, C_L, initial_coords, max_deviation):
        self.effective = effective
        self.A_L = A_L
        self.C_L = C_L
        self.initial_coords = initial_coords
        self.max_deviation = max_deviation

    @property
    def eff_dim(self):
        return self.effective.rank

    def outputs(self, index, horizon):
        x = self.initial_coords[:, index]
        rows = []
        for _ in range(horizon + 1):
            rows.append(self.C_L @ x)
            x = self.A_L @ x
        return np.array(rows)


def linear_minimal_reduction(m, tol=None, check_tol=None):
    """Effective subspace = complement of (R cap N) inside R, with the
    compressed maps A_L = P A P and C_L = C P in effective coordinates"""
    reach = reachable_subspace(m, tol)
    hidden = intersect(reach, non_observable_subspace(m, tol), tol)
    effective = orthogonal_complement(hidden, within=reach, tol=tol)
    E = effective.vectors
    A_L = dagger(E) @ m.map.transfer @ E
    C_L = m.output_matrix @ E
    x0 = dagger(E) @ np.array([vec(rho) for rho in m.initial_states]).T

    reduced = LinearReduction(effective, A_L, C_L, x0, 0.0)
    horizon = 2 * m.dim ** 2
    deviation = 0.0
    for i, rho in enumerate(m.initial_states):
        diff = m.outputs(rho, horizon) - reduced.outputs(i, horizon)
        deviation = max(deviation, float(np.max(np.abs(diff))) if diff.size else 0.0)
    reduced.max_deviation = deviation
    logger.info("linear reduction: rank R=%d, rank(R cap N)=%d, eff_dim=%d, "
                "deviation %.2e", reach.rank, hidden.rank, effective.rank, deviation)
    if deviation > residual_tolerance(check_tol):
        logger.warning("linear reduction deviates from the model outputs by %.2e",
                       deviation)
    return reduced
