"""
linalg.py

Dense complex-matrix kernel: Hilbert-Schmidt products, Hermitian matrix
functions, distortion maps X -> s^{1/2} X s^{1/2} and support projectors.

Operators are plain square complex numpy arrays. Vectorization is
column-stacking everywhere: vec(A X B) = (B^T kron A) vec(X).
"""

import logging

import numpy as np
import scipy.linalg

from .config import tolerance
from .errors import DimensionError, PositivityError, SupportError

logger = logging.getLogger(__name__)


def as_operator(X, dim=None):
    """Return X as a square complex array, checking the dimension"""
    X = np.asarray(X, dtype=complex)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise DimensionError("operator must be a square matrix, got shape %s"
                             % (X.shape,))
    if dim is not None and X.shape[0] != dim:
        raise DimensionError("expected a %dx%d operator, got %dx%d"
                             % (dim, dim, X.shape[0], X.shape[1]))
    return X


def vec(X):
    """Column-stacking vectorization"""
    return np.asarray(X).reshape(-1, order="F")


def unvec(v, dim=None):
    v = np.asarray(v)
    if dim is None:
        dim = int(round(np.sqrt(v.size)))
    if dim * dim != v.size:
        raise DimensionError("vector of length %d is not a vectorized square "
                             "operator" % v.size)
    return v.reshape((dim, dim), order="F")


def dagger(X):
    return np.conj(np.transpose(X))


def hermitian_part(X):
    return 0.5 * (X + dagger(X))


def _check_same_dim(X, Y):
    if X.shape != Y.shape:
        raise DimensionError("dimension mismatch: %s vs %s" % (X.shape, Y.shape))


def hs_inner(X, Y):
    """Hilbert-Schmidt inner product tr(X^dagger Y)"""
    X = as_operator(X)
    Y = as_operator(Y)
    _check_same_dim(X, Y)
    return complex(np.vdot(X, Y))


def hs_norm(X):
    return float(np.linalg.norm(X))


def is_hermitian(X, tol=None):
    X = np.asarray(X)
    scale = max(np.linalg.norm(X), 1.0)
    return bool(np.linalg.norm(X - dagger(X)) <= tolerance(tol) * scale)


def is_psd(X, tol=None):
    if not is_hermitian(X, tol):
        return False
    eigvals = scipy.linalg.eigvalsh(hermitian_part(X))
    scale = max(np.max(np.abs(eigvals)), 1.0)
    return bool(eigvals[0] >= -tolerance(tol) * scale)


def is_density(X, tol=None):
    X = np.asarray(X)
    tol = tolerance(tol)
    return bool(is_psd(X, tol) and abs(np.trace(X) - 1.0) <= tol * X.shape[0])


def check_density(X, tol=None, name="state"):
    """Raise PositivityError unless X is a density operator"""
    X = as_operator(X)
    if not is_density(X, tol):
        eigvals = scipy.linalg.eigvalsh(hermitian_part(X))
        raise PositivityError(
            "%s is not a density operator (min eig %.3e, trace %.6f)"
            % (name, eigvals[0], np.trace(X).real))
    return X


def _clipped_eigh(P, tol):
    """eigh of a Hermitian PSD matrix with eigenvalues in [-tol*scale, 0] set to 0"""
    P = as_operator(P)
    if not is_hermitian(P, tol):
        raise PositivityError("matrix is not Hermitian")
    eigvals, eigvecs = scipy.linalg.eigh(hermitian_part(P))
    scale = max(np.max(np.abs(eigvals)), np.finfo(float).tiny)
    threshold = tol * scale
    if eigvals[0] < -threshold:
        raise PositivityError("matrix has a negative eigenvalue",
                              residual=float(eigvals[0]))
    eigvals = np.where(eigvals < threshold, 0.0, eigvals)
    return eigvals, eigvecs


def hermitian_sqrt(P, tol=None):
    """PSD square root of a Hermitian PSD matrix; shares the support of P"""
    eigvals, eigvecs = _clipped_eigh(P, tolerance(tol))
    return (eigvecs * np.sqrt(eigvals)) @ dagger(eigvecs)


def support_of(P, tol=None):
    """Orthonormal basis (columns) of the range of a Hermitian PSD matrix"""
    eigvals, eigvecs = _clipped_eigh(P, tolerance(tol))
    return eigvecs[:, eigvals > 0]


def support_projector(ops, tol=None):
    """Orthogonal projector onto the sum of the supports of the given operators"""
    ops = [as_operator(X) for X in ops]
    if not ops:
        raise DimensionError("support_projector needs at least one operator")
    dim = ops[0].shape[0]
    for X in ops:
        _check_same_dim(ops[0], X)
    # range(X) for every X: the column space of the stacked matrices
    stacked = np.hstack(ops + [dagger(X) for X in ops])
    if not np.any(stacked):
        return np.zeros((dim, dim), dtype=complex)
    basis = scipy.linalg.orth(stacked, rcond=tolerance(tol))
    return basis @ dagger(basis)


def projector_rank(P):
    return int(round(np.trace(P).real))


def modular_map(rho, X, tol=None):
    """rho^{1/2} X rho^{-1/2}, the inverse taken on the support of rho"""
    root = hermitian_sqrt(rho, tol)
    return root @ as_operator(X, root.shape[0]) @ pinv_hermitian(root, tol)


def pinv_hermitian(P, tol=None):
    """Moore-Penrose inverse of a Hermitian PSD matrix"""
    eigvals, eigvecs = _clipped_eigh(P, tolerance(tol))
    inv = np.zeros_like(eigvals)
    inv[eigvals > 0] = 1.0 / eigvals[eigvals > 0]
    return (eigvecs * inv) @ dagger(eigvecs)


class DistortionMap(object):
    """The map X -> sigma^{1/2} X sigma^{1/2} and its inverse on supp(sigma)"""

    def __init__(self, sigma, tol=None):
        self._tol = tolerance(tol)
        self._sigma = as_operator(sigma)
        eigvals, eigvecs = _clipped_eigh(self._sigma, self._tol)
        positive = eigvals > 0
        if not np.any(positive):
            raise PositivityError("distortion state has empty support")
        root = np.sqrt(eigvals)
        inv_root = np.zeros_like(root)
        inv_root[positive] = 1.0 / root[positive]
        self._sqrt = (eigvecs * root) @ dagger(eigvecs)
        self._inv_sqrt = (eigvecs * inv_root) @ dagger(eigvecs)
        support = eigvecs[:, positive]
        self._support = support @ dagger(support)

    @property
    def sigma(self):
        return self._sigma

    @property
    def sqrt_sigma(self):
        return self._sqrt

    @property
    def inv_sqrt_sigma(self):
        return self._inv_sqrt

    @property
    def support(self):
        """Orthogonal projector onto supp(sigma)"""
        return self._support

    @property
    def dim(self):
        return self._sigma.shape[0]

    @property
    def full_rank(self):
        return projector_rank(self._support) == self.dim

    @property
    def transfer(self):
        """Transfer matrix of distort under column stacking"""
        return np.kron(self._sqrt.T, self._sqrt)

    def apply(self, X):
        return self.distort(X)

    def distort(self, X):
        X = as_operator(X, self.dim)
        return self._sqrt @ X @ self._sqrt

    def undistort(self, X):
        X = as_operator(X, self.dim)
        P = self._support
        leak = np.linalg.norm(X - P @ X @ P)
        if leak > self._tol * max(np.linalg.norm(X), 1.0):
            raise SupportError("operator leaks outside the support of sigma",
                               residual=leak)
        return self._inv_sqrt @ X @ self._inv_sqrt


def distort(D, X):
    return D.distort(X)


def undistort(D, X):
    return D.undistort(X)


def weighted_inner(Q, X, Y, tol=None):
    """<X, Q(Y)>_HS for a self-adjoint positive superoperator Q

    Q is anything with a transfer matrix and an apply method (a Superoperator
    or a DistortionMap)."""
    T = np.asarray(Q.transfer)
    tol = tolerance(tol)
    scale = max(np.linalg.norm(T, 2), 1.0)
    if np.linalg.norm(T - dagger(T)) > tol * scale:
        raise PositivityError("weighting map is not self-adjoint")
    eigvals = scipy.linalg.eigvalsh(hermitian_part(T))
    if eigvals[0] < -tol * scale:
        raise PositivityError("weighting map is not positive",
                              residual=float(eigvals[0]))
    return hs_inner(X, Q.apply(Y))


def random_density(dim, rng, rank=None):
    """Random density operator (normalized Wishart sample)"""
    rank = dim if rank is None else rank
    G = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = G @ dagger(G)
    return rho / np.trace(rho).real
