"""
channels.py

Linear maps on operators (superoperators) held as transfer matrices on
column-stacked operators, with an optional Kraus form.

For a Kraus set {K} the transfer matrix is sum_k conj(K) kron K, so that
vec(K X K^dagger) = (conj(K) kron K) vec(X).
"""

import logging

import numpy as np
import scipy.linalg

from .config import tolerance
from .errors import CptpError, DimensionError
from .linalg import as_operator, dagger, hermitian_part, unvec, vec

logger = logging.getLogger(__name__)

# Kraus lists are kept through composition only while they stay this short
MAX_COMPOSED_KRAUS = 256


class CptpReport(object):
    """Outcome of validate_cptp"""

    def __init__(self, is_cp, is_tp, min_choi_eig, tp_residual):
        self.is_cp = is_cp
        self.is_tp = is_tp
        self.min_choi_eig = min_choi_eig
        self.tp_residual = tp_residual

    @property
    def is_cptp(self):
        return self.is_cp and self.is_tp

    def as_dict(self):
        return {
            "is_cp": self.is_cp,
            "is_tp": self.is_tp,
            "min_choi_eig": self.min_choi_eig,
            "tp_residual": self.tp_residual,
        }

    def __str__(self):
        return "CP=%s TP=%s min_choi_eig=%.3e tp_residual=%.3e" % (
            self.is_cp, self.is_tp, self.min_choi_eig, self.tp_residual)


class Superoperator(object):
    """Linear map from in_dim x in_dim to out_dim x out_dim operators"""

    def __init__(self, transfer, in_dim=None, out_dim=None, kraus=None):
        transfer = np.asarray(transfer, dtype=complex)
        if transfer.ndim != 2:
            raise DimensionError("transfer matrix must be 2-dimensional")
        if in_dim is None:
            in_dim = int(round(np.sqrt(transfer.shape[1])))
        if out_dim is None:
            out_dim = int(round(np.sqrt(transfer.shape[0])))
        if transfer.shape != (out_dim * out_dim, in_dim * in_dim):
            raise DimensionError(
                "transfer matrix of shape %s does not map %dx%d to %dx%d "
                "operators" % (transfer.shape, in_dim, in_dim, out_dim, out_dim))
        self._transfer = transfer
        self._in_dim = in_dim
        self._out_dim = out_dim
        self._kraus = None if kraus is None else [np.asarray(K, dtype=complex)
                                                  for K in kraus]

    @classmethod
    def identity(cls, dim):
        return from_kraus([np.eye(dim)])

    @property
    def transfer(self):
        return self._transfer

    @property
    def in_dim(self):
        return self._in_dim

    @property
    def out_dim(self):
        return self._out_dim

    @property
    def kraus(self):
        """Stored Kraus operators, or None"""
        return self._kraus

    def kraus_ops(self, tol=None):
        """Kraus operators, recovered from the Choi matrix when not stored"""
        if self._kraus is not None:
            return self._kraus
        return kraus_from_choi(self, tol)

    @property
    def is_square(self):
        return self._in_dim == self._out_dim

    def apply(self, X):
        X = as_operator(X, self._in_dim)
        return unvec(self._transfer @ vec(X), self._out_dim)

    __call__ = apply

    def power_apply(self, X, steps):
        """Trajectory X, S(X), ..., S^steps(X)"""
        out = [as_operator(X, self._in_dim)]
        for _ in range(steps):
            out.append(self.apply(out[-1]))
        return out

    def adjoint(self):
        return adjoint(self)

    def distance(self, other):
        """Frobenius distance between transfer matrices"""
        if self._transfer.shape != other.transfer.shape:
            raise DimensionError("superoperators act between different spaces")
        return float(np.linalg.norm(self._transfer - other.transfer))

    def __repr__(self):
        return "Superoperator(%d -> %d%s)" % (
            self._in_dim, self._out_dim,
            "" if self._kraus is None else ", %d Kraus" % len(self._kraus))


def from_kraus(ops):
    """Superoperator X -> sum_k K X K^dagger"""
    ops = [np.asarray(K, dtype=complex) for K in ops]
    if not ops:
        raise DimensionError("empty Kraus list")
    shape = ops[0].shape
    if len(shape) != 2:
        raise DimensionError("Kraus operators must be matrices")
    for K in ops:
        if K.shape != shape:
            raise DimensionError("Kraus operators with different shapes: %s vs %s"
                                 % (shape, K.shape))
    out_dim, in_dim = shape
    transfer = np.zeros((out_dim * out_dim, in_dim * in_dim), dtype=complex)
    for K in ops:
        transfer += np.kron(np.conj(K), K)
    return Superoperator(transfer, in_dim, out_dim, kraus=ops)


def from_transfer(transfer, in_dim=None, out_dim=None):
    return Superoperator(transfer, in_dim, out_dim)


def unitary_channel(U):
    return from_kraus([U])


def apply(S, X):
    return S.apply(X)


def adjoint(S):
    """Hilbert-Schmidt adjoint; the transfer matrix is conjugate-transposed"""
    kraus = None if S.kraus is None else [dagger(K) for K in S.kraus]
    return Superoperator(dagger(S.transfer), S.out_dim, S.in_dim, kraus=kraus)


def compose(S2, S1):
    """S2 after S1"""
    if S1.out_dim != S2.in_dim:
        raise DimensionError("cannot compose: %d-dim output into %d-dim input"
                             % (S1.out_dim, S2.in_dim))
    kraus = None
    if (S1.kraus is not None and S2.kraus is not None
            and len(S1.kraus) * len(S2.kraus) <= MAX_COMPOSED_KRAUS):
        kraus = [K2 @ K1 for K2 in S2.kraus for K1 in S1.kraus]
    return Superoperator(S2.transfer @ S1.transfer, S1.in_dim, S2.out_dim,
                         kraus=kraus)


def compose_all(*maps):
    """compose_all(S3, S2, S1) = S3 after S2 after S1"""
    result = maps[-1]
    for S in reversed(maps[:-1]):
        result = compose(S, result)
    return result


def choi(S):
    """Choi matrix sum_ij |i><j| kron S(|i><j|), of size in*out"""
    n_in, n_out = S.in_dim, S.out_dim
    blocks = S.transfer.reshape((n_out, n_out, n_in, n_in), order="F")
    return blocks.transpose(2, 0, 3, 1).reshape(n_in * n_out, n_in * n_out)


def tp_residual(S):
    """||S^dagger(I) - I||_F, zero exactly for trace-preserving maps"""
    unit = unvec(dagger(S.transfer) @ vec(np.eye(S.out_dim)), S.in_dim)
    return float(np.linalg.norm(unit - np.eye(S.in_dim)))


def validate_cptp(S, tol=None):
    tol = tolerance(tol)
    C = choi(S)
    hermitian_residual = np.linalg.norm(C - dagger(C))
    eigvals = scipy.linalg.eigvalsh(hermitian_part(C))
    scale = max(np.max(np.abs(eigvals)), 1.0)
    min_eig = float(eigvals[0])
    is_cp = bool(min_eig >= -tol * scale and hermitian_residual <= tol * scale)
    residual = tp_residual(S)
    is_tp = bool(residual <= tol * max(np.sqrt(S.in_dim), 1.0))
    return CptpReport(is_cp, is_tp, min_eig, residual)


def check_cptp(S, tol=None, name="map"):
    """validate_cptp, raising CptpError on failure"""
    report = validate_cptp(S, tol)
    if not report.is_cptp:
        raise CptpError("%s is not CPTP: %s" % (name, report),
                        residual=max(-report.min_choi_eig, report.tp_residual))
    return report


def kraus_from_choi(S, tol=None):
    """Kraus operators from the eigendecomposition of the Choi matrix"""
    tol = tolerance(tol)
    C = choi(S)
    eigvals, eigvecs = scipy.linalg.eigh(hermitian_part(C))
    scale = max(np.max(np.abs(eigvals)), np.finfo(float).tiny)
    if eigvals[0] < -tol * scale:
        raise CptpError("Choi matrix is not positive semidefinite",
                        residual=float(eigvals[0]))
    ops = []
    for value, vector in zip(eigvals[::-1], eigvecs[:, ::-1].T):
        if value <= tol * scale:
            break
        ops.append(np.sqrt(value) * vector.reshape(S.in_dim, S.out_dim).T)
    if not ops:
        ops.append(np.zeros((S.out_dim, S.in_dim), dtype=complex))
    return ops


def with_kraus(S, tol=None):
    """Same map, with Kraus operators attached"""
    return Superoperator(S.transfer, S.in_dim, S.out_dim,
                         kraus=S.kraus_ops(tol))
