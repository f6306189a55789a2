"""
algebra.py

Matrix *-algebras: generated algebras, commutant and center, the
block (Wedderburn) decomposition U (+_l B(H_S,l) kron I_F,l + 0_R) U^dagger,
distorted algebras sigma^{1/2} A sigma^{1/2}, compatibility of a state
with an algebra and restriction of a model onto a support.
"""

import logging

import numpy as np
import scipy.linalg

from .channels import compose, from_kraus
from .config import get_settings, residual_tolerance, tolerance
from .errors import (DecompositionError, DimensionError, NoPositiveElementError,
                     PositivityError, SupportError)
from .linalg import (DistortionMap, as_operator, dagger, hermitian_part,
                     projector_rank, support_projector, vec)
from .subspace import (OperatorSubspace, QhmModel, _orthonormal_columns,
                       intersect, reachable_subspace, span_basis, span_vectors)

logger = logging.getLogger(__name__)

MAX_DRAWS = 8


def _as_ops(vectors, n):
    """(n^2, r) column-stacked vectors -> (r, n, n) operators"""
    return vectors.T.reshape(-1, n, n).transpose(0, 2, 1)


def _as_vectors(ops):
    """(r, n, n) operators -> (n^2, r) column-stacked vectors"""
    ops = np.asarray(ops)
    return ops.transpose(0, 2, 1).reshape(ops.shape[0], -1).T


def _as_subspace(gens, tol=None):
    if isinstance(gens, OperatorSubspace):
        return gens
    return span_basis(list(gens), tol=tol)


def _closure(seed_vectors, n, tol, middle=None, label="closure"):
    """Smallest span containing the seeds that is closed under adjoint and
    under the product X middle Y (plain product when middle is None)"""
    seeds = _as_ops(seed_vectors, n)
    start = np.hstack([seed_vectors, _as_vectors(np.conj(seeds.transpose(0, 2, 1)))])
    basis = _orthonormal_columns(start, tol)
    frontier = basis
    rounds = 0
    while frontier.shape[1] and basis.shape[1] < n * n:
        rounds += 1
        A = _as_ops(basis, n)
        F = _as_ops(frontier, n)
        left = A if middle is None else A @ middle
        candidates = []
        for f in F:
            fm = f if middle is None else f @ middle
            candidates.append(fm @ A)
            candidates.append(left @ f)
        candidates.append(np.conj(F.transpose(0, 2, 1)))
        cand = _as_vectors(np.concatenate(candidates))
        scale = float(np.max(np.linalg.norm(cand, axis=0)))
        residual = cand - basis @ (dagger(basis) @ cand)
        residual -= basis @ (dagger(basis) @ residual)
        fresh = _orthonormal_columns(residual, tol, scale=scale)
        logger.debug("%s round %d: +%d (rank %d)", label, rounds, fresh.shape[1],
                     basis.shape[1] + fresh.shape[1])
        if fresh.shape[1] == 0:
            break
        basis = np.hstack([basis, fresh])
        frontier = fresh
    return basis[:, :n * n]


class BlockDecomposition(object):
    """U, per-block (d_S, d_F) and the residual dimension d_R.

    Inside block l the columns of U are ordered s * d_F + f, so that the
    algebra acts as A_S kron I_F on them."""

    def __init__(self, unitary, blocks, residual_dim):
        self.unitary = np.asarray(unitary, dtype=complex)
        self.blocks = [(int(ds), int(df)) for ds, df in blocks]
        self.residual_dim = int(residual_dim)
        n = self.unitary.shape[0]
        if sum(ds * df for ds, df in self.blocks) + self.residual_dim != n:
            raise DimensionError("block sizes do not add up to %d" % n)

    @property
    def dim(self):
        return self.unitary.shape[0]

    @property
    def system_dims(self):
        return [ds for ds, _ in self.blocks]

    @property
    def algebra_dim(self):
        return sum(ds * ds for ds, _ in self.blocks)

    @property
    def offsets(self):
        out, pos = [], 0
        for ds, df in self.blocks:
            out.append(pos)
            pos += ds * df
        return out

    def isometry(self, index):
        """V_l: the rows of U^dagger belonging to block l (shape d_S d_F x n)"""
        ds, df = self.blocks[index]
        start = self.offsets[index]
        return dagger(self.unitary[:, start:start + ds * df])

    def block(self, X, index):
        V = self.isometry(index)
        return V @ X @ dagger(V)

    def system_part(self, X, index):
        """tr_F(V_l X V_l^dagger)"""
        ds, df = self.blocks[index]
        return np.einsum("afbf->ab", self.block(X, index).reshape(ds, df, ds, df))

    def factor_part(self, X, index):
        """tr_S(V_l X V_l^dagger)"""
        ds, df = self.blocks[index]
        return np.einsum("sfsb->fb", self.block(X, index).reshape(ds, df, ds, df))

    def embed(self, system_ops, factor_ops=None):
        """U (+_l A_l kron F_l + 0_R) U^dagger, F_l = I when not given"""
        n = self.dim
        rotated = np.zeros((n, n), dtype=complex)
        for index, (ds, df) in enumerate(self.blocks):
            F = np.eye(df) if factor_ops is None else factor_ops[index]
            start = self.offsets[index]
            rotated[start:start + ds * df, start:start + ds * df] = np.kron(
                system_ops[index], F)
        return self.unitary @ rotated @ dagger(self.unitary)

    def structure_residual(self, X):
        """Relative distance of X from the block form (+ A_l kron I) + 0"""
        norm = np.linalg.norm(X)
        if norm == 0.0:
            return 0.0
        parts = [self.system_part(X, i) / df for i, (_, df) in enumerate(self.blocks)]
        return float(np.linalg.norm(X - self.embed(parts)) / norm)

    def matrix_units(self):
        """U (E_ij kron I_F) U^dagger for every block"""
        units = []
        for index, (ds, _) in enumerate(self.blocks):
            for i in range(ds):
                for j in range(ds):
                    parts = [np.zeros((d, d)) for d, _ in self.blocks]
                    parts[index] = np.zeros((ds, ds))
                    parts[index][i, j] = 1.0
                    units.append(self.embed(parts))
        return units

    def round_trip_residual(self, basis):
        """Block-form residual of the basis plus span mismatch"""
        units = span_basis(self.matrix_units(), dim=self.dim)
        structure = max([self.structure_residual(b) for b in basis.basis] or [0.0])
        span = max([units.residual(b) for b in basis.basis] or [0.0])
        if units.rank != basis.rank:
            span = max(span, 1.0)
        unitary = np.linalg.norm(dagger(self.unitary) @ self.unitary - np.eye(self.dim))
        return max(structure, span, float(unitary))

    def __repr__(self):
        return "BlockDecomposition(blocks=%s, residual_dim=%d)" % (
            self.blocks, self.residual_dim)


class MatrixAlgebra(object):
    """A *-closed operator span; the block decomposition is computed on demand"""

    def __init__(self, basis, tol=None, seed=None):
        self.basis = basis
        self._tol = tolerance(tol)
        self._seed = get_settings().seed if seed is None else seed
        self._decomposition = None

    @property
    def ambient_dim(self):
        return self.basis.dim_ambient

    @property
    def dim(self):
        return self.basis.rank

    @property
    def unital(self):
        return self.basis.contains(np.eye(self.ambient_dim))

    @property
    def support(self):
        if self.dim == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        return support_projector(self.basis.basis, self._tol)

    @property
    def decomposition(self):
        if self._decomposition is None:
            self._decomposition = wedderburn(self, seed=self._seed, tol=self._tol)
        return self._decomposition

    def contains(self, X, tol=None):
        return self.basis.contains(X, tol)

    def closure_residual(self):
        """max over the basis of the adjoint and pairwise-product leaks"""
        ops = _as_ops(self.basis.vectors, self.ambient_dim)
        worst = 0.0
        for b in ops:
            worst = max(worst, self.basis.residual(dagger(b)))
            for c in ops:
                worst = max(worst, self.basis.residual(b @ c))
        return worst

    def __repr__(self):
        return "MatrixAlgebra(n=%d, dim=%d)" % (self.ambient_dim, self.dim)


class DistortedAlgebra(object):
    """sigma^{1/2} base sigma^{1/2}, closed under X sigma^{-1} Y"""

    def __init__(self, base, sigma, basis):
        self.base = base
        self.sigma = sigma
        self.basis = basis

    @property
    def dim(self):
        return self.basis.rank

    def weighted_product(self, X, Y):
        return X @ self.sigma.inv_sqrt_sigma @ self.sigma.inv_sqrt_sigma @ Y

    def closure_residual(self):
        ops = self.basis.basis
        worst = 0.0
        for b in ops:
            worst = max(worst, self.basis.residual(dagger(b)))
            for c in ops:
                worst = max(worst, self.basis.residual(self.weighted_product(b, c)))
        return worst


def generated_algebra(gens, tol=None, seed=None):
    """alg(gens): the smallest *-algebra containing gens"""
    tol = tolerance(tol)
    gens = _as_subspace(gens, tol)
    n = gens.dim_ambient
    if gens.rank == 0:
        return MatrixAlgebra(OperatorSubspace.empty(n), tol, seed)
    vectors = _closure(gens.vectors, n, tol, label="alg")
    return MatrixAlgebra(OperatorSubspace(n, vectors, tol), tol, seed)


def distorted_closure(sigma, gens, tol=None):
    """Closure of gens under adjoint and X sigma^{-1} Y, computed directly"""
    tol = tolerance(tol)
    D = sigma if isinstance(sigma, DistortionMap) else DistortionMap(sigma, tol)
    gens = _as_subspace(gens, tol)
    middle = D.inv_sqrt_sigma @ D.inv_sqrt_sigma
    return OperatorSubspace(gens.dim_ambient,
                            _closure(gens.vectors, gens.dim_ambient, tol, middle,
                                     label="weighted closure"), tol)


def distorted_generated_algebra(sigma, gens, tol=None, seed=None):
    """alg_sigma(gens) = D_sigma(alg(D_sigma^{-1}(gens)))"""
    tol = tolerance(tol)
    D = sigma if isinstance(sigma, DistortionMap) else DistortionMap(sigma, tol)
    gens = _as_subspace(gens, tol)
    base = generated_algebra(
        span_basis([D.undistort(g) for g in gens.basis], dim=gens.dim_ambient, tol=tol),
        tol, seed)
    basis = span_basis([D.distort(b) for b in base.basis.basis],
                       dim=gens.dim_ambient, tol=tol)
    return DistortedAlgebra(base, D, basis)


def _commuting_vectors(ops, n, tol):
    """Vectorized null space of X -> [X, b] over ops, with an absolute
    threshold tol * max(1, sigma_max) so that scalar generators keep every
    direction"""
    eye = np.eye(n)
    rows = np.vstack([np.kron(eye, b) - np.kron(b.T, eye) for b in ops])
    _, s, vh = scipy.linalg.svd(rows, full_matrices=False)
    threshold = tol * max(1.0, s[0] if s.size else 0.0)
    rank = int(np.sum(s > threshold))
    return dagger(vh[rank:])


def commutant(a, tol=None):
    """{X : [X, b] = 0 for every basis element b}"""
    tol = tolerance(tol)
    n = a.ambient_dim
    if a.dim == 0:
        return MatrixAlgebra(OperatorSubspace.full(n), tol)
    return MatrixAlgebra(OperatorSubspace(n, _commuting_vectors(a.basis.basis, n, tol), tol),
                         tol)


def center(a, tol=None):
    return MatrixAlgebra(intersect(a.basis, commutant(a, tol).basis, tol), tol)


def _clusters(values, gap):
    """Group sorted eigenvalues separated by more than gap"""
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i] - values[i - 1] > gap:
            groups.append([])
        groups[-1].append(i)
    return groups


def _random_hermitian(hermitian_basis, rng):
    coeffs = rng.standard_normal(len(hermitian_basis))
    return sum(c * H for c, H in zip(coeffs, hermitian_basis))


def _spectral_groups(H, tol):
    """Eigenspaces of H, clustered with gap sqrt(tol) * spread; a spread below
    tol * max(1, |lambda|_max) counts as a single eigenvalue"""
    values, vectors = scipy.linalg.eigh(hermitian_part(H))
    if not values.size:
        return []
    spread = values[-1] - values[0]
    scale = max(1.0, float(np.max(np.abs(values))))
    if spread <= tol * scale:
        return [vectors]
    groups = _clusters(values, np.sqrt(tol) * spread)
    return [vectors[:, g] for g in groups]


def _block_columns(block_basis, k, tol, rng):
    """Columns of one central block, ordered s * d_F + f, in block coordinates.

    Returns (d_S, d_F, columns) or None when the random draw was degenerate."""
    compressed = span_basis(block_basis, dim=k, tol=tol)
    ds = int(round(np.sqrt(compressed.rank)))
    if ds * ds != compressed.rank or k % ds:
        return None
    df = k // ds
    if df == 1:
        return ds, df, np.eye(k, dtype=complex)

    comm = OperatorSubspace(k, _commuting_vectors(compressed.basis, k, tol), tol)
    if comm.rank != df * df:
        return None
    groups = _spectral_groups(_random_hermitian(comm.hermitian_basis(), rng), tol)
    if len(groups) != df or any(g.shape[1] != ds for g in groups):
        return None

    first = groups[0]
    columns = np.zeros((k, k), dtype=complex)
    columns[:, 0::df] = first
    for f, G in enumerate(groups[1:], start=1):
        # intertwiner from the commutant mapping the first eigenspace onto G
        overlaps = [G.conj().T @ c @ first for c in comm.basis]
        best = max(overlaps, key=lambda M: np.linalg.norm(M, 2))
        polar_u, _ = scipy.linalg.polar(best)
        columns[:, f::df] = G @ polar_u
    return ds, df, columns


def _centroid(P):
    """Deterministic position key of a central projector"""
    weights = np.real(np.diag(P))
    return float(np.dot(np.arange(len(weights)), weights) / max(weights.sum(), 1e-300))


def wedderburn(a, seed=None, tol=None, check_tol=None):
    """Block decomposition of a *-algebra by randomized spectral splitting"""
    tol = tolerance(tol)
    check_tol = residual_tolerance(check_tol)
    seed = get_settings().seed if seed is None else seed
    n = a.ambient_dim
    if a.dim == 0:
        return BlockDecomposition(np.eye(n), [], n)

    P = a.support
    basis = a.basis
    if not basis.contains(P):
        logger.debug("unitalizing algebra on its support (rank %d)", projector_rank(P))
        basis = span_vectors(n, np.hstack([basis.vectors, vec(P)[:, None]]), tol)
        a = MatrixAlgebra(basis, tol, seed)
    support = scipy.linalg.orth(P, rcond=tol)
    complement = scipy.linalg.null_space(dagger(support)) if support.shape[1] < n \
        else np.zeros((n, 0), dtype=complex)
    central = center(a, tol).basis.hermitian_basis()

    last_residual = None
    for draw in range(MAX_DRAWS):
        rng = np.random.default_rng(seed + draw)
        h = dagger(support) @ _random_hermitian(central, rng) @ support
        found = []
        for group in _spectral_groups(h, tol):
            Q = support @ group
            k = Q.shape[1]
            cols = _block_columns([dagger(Q) @ b @ Q for b in basis.basis], k, tol, rng)
            if cols is None:
                found = None
                break
            ds, df, local = cols
            found.append((ds, df, Q @ local))
        if found is None:
            logger.warning("degenerate draw %d in block decomposition, redrawing", draw)
            continue

        found.sort(key=lambda b: (-b[0], -b[1], _centroid(b[2] @ dagger(b[2]))))
        U = np.hstack([cols for _, _, cols in found] + [complement])
        decomposition = BlockDecomposition(U, [(ds, df) for ds, df, _ in found],
                                           complement.shape[1])
        last_residual = decomposition.round_trip_residual(basis)
        if last_residual <= check_tol:
            logger.debug("block decomposition %s (residual %.2e, draw %d)",
                         decomposition.blocks, last_residual, draw)
            return decomposition
        logger.warning("block decomposition draw %d failed round trip (%.2e), "
                       "redrawing", draw, last_residual)
    raise DecompositionError("block decomposition failed after %d draws" % MAX_DRAWS,
                             residual=last_residual)


class CompatibilityReport(object):
    def __init__(self, compatible, residual):
        self.compatible = compatible
        self.residual = residual

    def __bool__(self):
        return self.compatible

    def __repr__(self):
        return "CompatibilityReport(compatible=%s, residual=%.3e)" % (
            self.compatible, self.residual)


def _check_positive_on(rho, P, tol):
    W = scipy.linalg.orth(P, rcond=tol)
    values = scipy.linalg.eigvalsh(hermitian_part(dagger(W) @ rho @ W))
    if values[0] <= tol * max(values[-1], 1e-300):
        raise PositivityError("state is not positive definite on the algebra support",
                              residual=float(values[0]))


def is_compatible(rho, a, tol=None, check_tol=None):
    """Modular test: D_rho(a) must be invariant under X -> rho^{1/2} X rho^{-1/2}"""
    tol = tolerance(tol)
    rho = as_operator(rho, a.ambient_dim)
    _check_positive_on(rho, a.support, tol)
    D = DistortionMap(rho, tol)
    distorted = span_basis([D.distort(b) for b in a.basis.basis], dim=a.ambient_dim,
                           tol=tol)
    residual = max([distorted.residual(D.sqrt_sigma @ X @ D.inv_sqrt_sigma)
                    for X in distorted.basis] or [0.0])
    return CompatibilityReport(residual <= residual_tolerance(check_tol), residual)


def block_compatibility(rho, a, tol=None, check_tol=None):
    """Block test: U^dagger rho U = (+_l rho_S,l kron tau_F,l) on the support"""
    tol = tolerance(tol)
    rho = as_operator(rho, a.ambient_dim)
    _check_positive_on(rho, a.support, tol)
    dec = a.decomposition
    norm = np.linalg.norm(rho)
    rotated = dagger(dec.unitary) @ rho @ dec.unitary
    block_diag = np.zeros_like(rotated)
    worst = 0.0
    for index, (ds, df) in enumerate(dec.blocks):
        start = dec.offsets[index]
        stop = start + ds * df
        block = rotated[start:stop, start:stop]
        block_diag[start:stop, start:stop] = block
        realigned = block.reshape(ds, df, ds, df).transpose(0, 2, 1, 3).reshape(
            ds * ds, df * df)
        sv = scipy.linalg.svdvals(realigned)
        if sv.size > 1 and sv[0] > 0:
            worst = max(worst, float(sv[1] / sv[0]))
    supported = dec.dim - dec.residual_dim
    off = rotated[:supported, :supported] - block_diag[:supported, :supported]
    worst = max(worst, float(np.linalg.norm(off) / norm))
    return CompatibilityReport(worst <= residual_tolerance(check_tol), worst)


def _positive_on_support(V, W, tol):
    if np.linalg.norm(V - W @ (dagger(W) @ V @ W) @ dagger(W)) > tol * max(
            np.linalg.norm(V), 1.0):
        return False
    values = scipy.linalg.eigvalsh(hermitian_part(dagger(W) @ V @ W))
    return bool(values[0] > tol * max(abs(values[-1]), 1e-300))


def minimal_distortion_state(gens, candidates=(), tol=None):
    """Projection onto the center of alg(gens) of a positive element of gens"""
    tol = tolerance(tol)
    gens = _as_subspace(gens, tol)
    n = gens.dim_ambient
    P = support_projector(gens.basis, tol)
    W = scipy.linalg.orth(P, rcond=tol)

    V = None
    for X in candidates:
        X = hermitian_part(as_operator(X, n))
        if gens.contains(X) and _positive_on_support(X, W, tol):
            V = X
            break
    if V is None:
        hermitian = gens.hermitian_basis()
        if hermitian:
            average = sum(hermitian) / len(hermitian)
            if _positive_on_support(average, W, tol):
                V = average
            elif _positive_on_support(-average, W, tol):
                V = -average
            elif gens.contains(P):
                low = scipy.linalg.eigvalsh(dagger(W) @ average @ W)[0]
                V = average + (abs(low) + 1.0) * P
    if V is None:
        raise NoPositiveElementError("no positive definite element found in the span")

    alg = generated_algebra(gens, tol)
    sigma = hermitian_part(center(alg, tol).basis.project(V))
    if not _positive_on_support(sigma, W, tol):
        raise PositivityError("center projection is not positive definite")
    return sigma / np.trace(sigma).real


def _support_isometry(P, tol, block_dims=None):
    """Orthonormal basis W of range(P), taken block by block under a mask.

    Returns (W, dims) where dims are the per-block ranks (None without a mask)."""
    n = P.shape[0]
    if projector_rank(P) == n:
        return np.eye(n, dtype=complex), block_dims
    if block_dims is None:
        return scipy.linalg.orth(hermitian_part(P), rcond=tol), None
    columns, dims, start = [], [], 0
    for d in block_dims:
        part = hermitian_part(P[start:start + d, start:start + d])
        local = np.zeros((d, 0))
        if np.linalg.norm(part) > tol:
            local = scipy.linalg.orth(part, rcond=tol)
        if local.shape[1]:
            W = np.zeros((n, local.shape[1]), dtype=complex)
            W[start:start + d, :] = local
            columns.append(W)
            dims.append(local.shape[1])
        start += d
    W = np.hstack(columns) if columns else np.zeros((n, 0), dtype=complex)
    mismatch = np.linalg.norm(W @ dagger(W) - P)
    if mismatch > np.sqrt(tol):
        raise SupportError("support projector is not block diagonal under the mask",
                           residual=mismatch)
    return W, dims


def support_restriction_maps(P, tol=None, block_dims=None):
    """(R, J) for the support of P: J(x) = W x W^dagger and
    R(X) = W^dagger X W + tr((I - P) X) I_r / r, CPTP on the whole space"""
    tol = tolerance(tol)
    P = as_operator(P)
    n = P.shape[0]
    W, _ = _support_isometry(P, tol, block_dims)
    r = W.shape[1]
    if r == 0:
        raise SupportError("cannot restrict onto an empty support")
    complement = scipy.linalg.null_space(dagger(W)) if r < n else np.zeros((n, 0))
    kraus = [dagger(W)]
    for j in range(r):
        for c in complement.T:
            K = np.zeros((r, n), dtype=complex)
            K[j, :] = np.conj(c) / np.sqrt(r)
            kraus.append(K)
    return from_kraus(kraus), from_kraus([W])


def restricted_block_dims(P, block_dims, tol=None):
    """Block mask of the model restricted onto range(P)"""
    return _support_isometry(as_operator(P), tolerance(tol), block_dims)[1]


def restrict_to_support(m, P, tol=None, check_tol=None):
    """Model compressed onto range(P); P must be invariant for reachable operators"""
    tol = tolerance(tol)
    check_tol = residual_tolerance(check_tol)
    P = as_operator(P, m.dim)
    if projector_rank(P) == m.dim:
        return m
    for i, rho in enumerate(m.initial_states):
        leak = np.linalg.norm(rho - P @ rho @ P)
        if leak > check_tol:
            raise SupportError("initial state %d is not supported on the projector" % i,
                               residual=leak)
    for X in reachable_subspace(m, tol).basis:
        Y = m.map.apply(P @ X @ P)
        leak = np.linalg.norm(Y - P @ Y @ P)
        if leak > check_tol * max(np.linalg.norm(Y), 1.0):
            raise SupportError("support is not invariant under the dynamics",
                               residual=leak)
    R, J = support_restriction_maps(P, tol, m.block_dims)
    W = dagger(R.kraus[0])
    restricted = QhmModel(compose(R, compose(m.map, J)),
                          [dagger(W) @ C @ W for C in m.output_ops],
                          [dagger(W) @ rho @ W for rho in m.initial_states],
                          label=m.label,
                          block_dims=restricted_block_dims(P, m.block_dims, tol),
                          metadata=m.metadata, tol=tol)
    return restricted
