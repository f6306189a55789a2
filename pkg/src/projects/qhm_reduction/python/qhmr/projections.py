"""
projections.py

Conditional expectations onto a decomposed algebra, their dual state
extensions and the factorizations through the reduced block algebra.

With V_l the block isometries of the decomposition and tau_l the factor states:

    E(X) = U (+_l tr_F[(I kron tau_l) V_l X V_l^dagger] kron I_F) U^dagger
    J(X) = U (+_l tr_F[V_l X V_l^dagger] kron tau_l) U^dagger      (J = E^dagger)

and J = Jr o R, E = J0 o R0 where R(X) = (+_l tr_F(V_l X V_l^dagger)) lands in
the m_S x m_S block-masked space, m_S = sum_l d_S,l.
"""

import logging

import numpy as np
import scipy.linalg

from .channels import adjoint, check_cptp, compose, from_kraus
from .config import residual_tolerance, tolerance
from .errors import DimensionError, PositivityError, ResidualGuardError, SupportError
from .linalg import as_operator, dagger, hermitian_part

logger = logging.getLogger(__name__)


class BlockMask(object):
    """Direct sum of d x d blocks on the diagonal of an m x m matrix space"""

    def __init__(self, dims):
        self.dims = [int(d) for d in dims]
        if not self.dims or min(self.dims) < 1:
            raise DimensionError("block mask needs positive block sizes")

    @property
    def size(self):
        """m, the side of the ambient matrix space"""
        return sum(self.dims)

    @property
    def dim(self):
        """Operator-space dimension sum d^2"""
        return sum(d * d for d in self.dims)

    @property
    def offsets(self):
        return [int(x) for x in np.cumsum([0] + self.dims[:-1])]

    def embedding(self, index):
        """m x d isometry onto block index"""
        E = np.zeros((self.size, self.dims[index]), dtype=complex)
        start = self.offsets[index]
        E[start:start + self.dims[index], :] = np.eye(self.dims[index])
        return E

    def projectors(self):
        return [E @ dagger(E) for E in map(self.embedding, range(len(self.dims)))]

    @property
    def matrix(self):
        """0/1 pattern of the allowed entries"""
        pattern = np.zeros((self.size, self.size), dtype=bool)
        for start, d in zip(self.offsets, self.dims):
            pattern[start:start + d, start:start + d] = True
        return pattern

    def pinch(self, x):
        x = as_operator(x, self.size)
        return np.where(self.matrix, x, 0.0)

    def leak(self, x):
        x = as_operator(x, self.size)
        return float(np.linalg.norm(x - self.pinch(x)))

    def contains(self, x, tol=None):
        x = as_operator(x, self.size)
        return self.leak(x) <= tolerance(tol) * max(np.linalg.norm(x), 1.0)

    def check(self, x, tol=None):
        """Reject operators outside the mask"""
        if not self.contains(x, tol):
            raise SupportError("operator has entries outside the block mask",
                               residual=self.leak(x))
        return as_operator(x, self.size)

    def pinching(self):
        """The CPTP projection onto the masked space"""
        return from_kraus(self.projectors())

    def basis(self):
        out = []
        for index, d in enumerate(self.dims):
            E = self.embedding(index)
            for i in range(d):
                for j in range(d):
                    unit = np.zeros((d, d), dtype=complex)
                    unit[i, j] = 1.0
                    out.append(E @ unit @ dagger(E))
        return out

    def __repr__(self):
        return "BlockMask(%s)" % self.dims


def _check_factor_state(tau, df, tol, index):
    tau = np.asarray(tau, dtype=complex)
    if tau.shape != (df, df):
        raise DimensionError("factor state %d must be %dx%d, got %s"
                             % (index, df, df, tau.shape))
    values = scipy.linalg.eigvalsh(hermitian_part(tau))
    if values[0] <= tol or abs(values.sum() - 1.0) > tol * df:
        raise PositivityError("factor state %d is not a full-rank density" % index,
                              residual=float(values[0]))
    return hermitian_part(tau)


def factor_states_from(sigma, decomposition):
    """tau_l = tr_S(V_l sigma V_l^dagger), normalized"""
    taus = []
    for index in range(len(decomposition.blocks)):
        part = hermitian_part(decomposition.factor_part(sigma, index))
        taus.append(part / np.trace(part).real)
    return taus


def maximally_mixed_states(decomposition):
    return [np.eye(df) / df for _, df in decomposition.blocks]


class ConditionalExpectation(object):
    """E onto a decomposed unital algebra and its dual state extension J"""

    def __init__(self, algebra, taus, tol=None):
        tol = tolerance(tol)
        dec = algebra.decomposition
        if dec.residual_dim:
            raise SupportError("conditional expectation needs an algebra with full "
                               "support, restrict the model first")
        if len(taus) != len(dec.blocks):
            raise DimensionError("%d factor states for %d blocks"
                                 % (len(taus), len(dec.blocks)))
        self.algebra = algebra
        self.decomposition = dec
        self.factor_states = [_check_factor_state(t, df, tol, i)
                              for i, (t, (_, df)) in enumerate(zip(taus, dec.blocks))]
        kraus = []
        for index, (ds, df) in enumerate(dec.blocks):
            V = dec.isometry(index)
            values, vectors = scipy.linalg.eigh(self.factor_states[index])
            for value, t in zip(values, vectors.T):
                for f in range(df):
                    shift = np.kron(np.eye(ds), np.outer(t, np.eye(df)[f]))
                    kraus.append(np.sqrt(value) * dagger(V) @ shift @ V)
        self._J = from_kraus(kraus)
        self._E = adjoint(self._J)

    @property
    def E(self):
        return self._E

    @property
    def J(self):
        return self._J

    @property
    def sigma(self):
        """Normalized U (+_l I/d_S kron tau_l) U^dagger, the invariant state of J"""
        dec = self.decomposition
        parts = [np.eye(ds) / ds for ds, _ in dec.blocks]
        state = dec.embed(parts, self.factor_states)
        return state / np.trace(state).real

    def module_residual(self, samples):
        """max ||E(A B) - A E(B)|| / ||B|| over algebra basis A and the given B"""
        worst = 0.0
        for A in self.algebra.basis.basis:
            for B in samples:
                diff = self._E.apply(A @ B) - A @ self._E.apply(B)
                worst = max(worst, float(np.linalg.norm(diff) / np.linalg.norm(B)))
        return worst


def conditional_expectation(a, taus, tol=None):
    return ConditionalExpectation(a, taus, tol)


def state_extension(ce):
    return ce.J


class Factorization(object):
    """R: n -> m (CPTP), J: m -> n (CPTP), R0 = J^dagger, J0 = R^dagger (CP unital)"""

    def __init__(self, R, J, mask):
        self.R = R
        self.J = J
        self.R0 = adjoint(J)
        self.J0 = adjoint(R)
        self.mask = mask

    @property
    def reduced_dim(self):
        """sum d_S^2, the operator-space dimension of the reduced algebra"""
        return self.mask.dim

    @property
    def reduced_size(self):
        return self.mask.size

    def residuals(self, ce):
        """Distances of the factorization identities, as transfer-matrix norms"""
        return {
            "JR_vs_state_extension": compose(self.J, self.R).distance(ce.J),
            "J0R0_vs_expectation": compose(self.J0, self.R0).distance(ce.E),
            "RJ_vs_identity": compose(self.R, self.J).distance(self.mask.pinching()),
        }


def factorize(ce, tol=None, check_tol=None):
    dec = ce.decomposition
    mask = BlockMask(dec.system_dims)
    r_kraus, j_kraus = [], []
    for index, (ds, df) in enumerate(dec.blocks):
        V = dec.isometry(index)
        E = mask.embedding(index)
        for f in range(df):
            pick = np.kron(np.eye(ds), np.eye(df)[f][None, :])
            r_kraus.append(E @ pick @ V)
        values, vectors = scipy.linalg.eigh(ce.factor_states[index])
        for value, t in zip(values, vectors.T):
            lift = np.kron(np.eye(ds), t[:, None])
            j_kraus.append(np.sqrt(value) * dagger(V) @ lift @ dagger(E))
    f = Factorization(from_kraus(r_kraus), from_kraus(j_kraus), mask)

    residuals = f.residuals(ce)
    worst = max(residuals.values())
    logger.debug("factorization residuals %s", residuals)
    if worst > residual_tolerance(check_tol):
        raise ResidualGuardError("factorization identities do not hold", residual=worst)
    check_cptp(f.R, tol, name="reduction map")
    check_cptp(f.J, tol, name="injection map")
    return f


def reduced_output_ops(f, outs):
    """C_i -> R0(C_i), so that tr(C^dagger J(x)) = tr(R0(C)^dagger x)"""
    return [f.R0.apply(as_operator(C, f.R.in_dim)) for C in outs]
