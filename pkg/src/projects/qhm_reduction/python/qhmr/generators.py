"""
generators.py

Built-in models: Grover search as a quantum walk, a system coupled to an
environment through a qubit interface, two small textbook examples with
known reductions and seeded random models.

Every generator returns a validated QhmModel; parameters are checked up
front and rejected with ValueError.
"""

import logging

import numpy as np
import scipy.linalg
from scipy.stats import unitary_group

from .channels import from_kraus
from .linalg import dagger, hermitian_part, random_density, unvec
from .subspace import QhmModel

logger = logging.getLogger(__name__)

PAULI = {
    "0": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}

STRUCTURES = ("generic", "block", "product")


def gell_mann(d):
    """Hilbert-Schmidt orthonormal Hermitian basis of d x d matrices.

    The first element is I / sqrt(d), then symmetric, antisymmetric and
    diagonal generalized Gell-Mann matrices, each of unit norm."""
    basis = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            S = np.zeros((d, d), dtype=complex)
            S[j, k] = S[k, j] = 1.0 / np.sqrt(2)
            basis.append(S)
            A = np.zeros((d, d), dtype=complex)
            A[j, k] = -1j / np.sqrt(2)
            A[k, j] = 1j / np.sqrt(2)
            basis.append(A)
    for l in range(1, d):
        D = np.zeros((d, d), dtype=complex)
        D[:l, :l] = np.eye(l)
        D[l, l] = -l
        basis.append(D / np.sqrt(l * (l + 1)))
    return basis


def random_hermitian(d, rng):
    G = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return hermitian_part(G)


def random_kraus(n_in, n_out, n_kraus, rng):
    """Kraus operators cut from a random isometry, so sum K^dagger K = I"""
    if n_kraus * n_out < n_in:
        raise ValueError("need n_kraus * n_out >= n_in for a trace-preserving map")
    G = (rng.standard_normal((n_kraus * n_out, n_in))
         + 1j * rng.standard_normal((n_kraus * n_out, n_in)))
    Q, _ = scipy.linalg.qr(G, mode="economic")
    return list(Q.reshape(n_kraus, n_out, n_in))


def _metadata(name, **params):
    meta = {"generator": name}
    meta.update({k: str(v) for k, v in params.items()})
    return meta


def grover_model(N=8, M=1, marked=None):
    """Grover walk A(X) = R O X O^dagger R^dagger with R = 2|psi><psi| - I,
    population outputs |i><i| and the uniform superposition as initial state"""
    N, M = int(N), int(M)
    if N < 2:
        raise ValueError("grover needs N >= 2")
    if not 0 < M < N or 2 * M == N:
        raise ValueError("grover needs 0 < M < N and M != N/2, got N=%d M=%d" % (N, M))
    marked = list(range(M)) if marked is None else sorted(int(j) for j in marked)
    if len(marked) != M or len(set(marked)) != M or not all(0 <= j < N for j in marked):
        raise ValueError("marked must list M distinct indices in [0, N)")

    psi = np.ones(N, dtype=complex) / np.sqrt(N)
    oracle = np.eye(N, dtype=complex)
    oracle[marked, marked] = -1.0
    reflection = 2.0 * np.outer(psi, psi.conj()) - np.eye(N)
    outputs = []
    for i in range(N):
        C = np.zeros((N, N), dtype=complex)
        C[i, i] = 1.0
        outputs.append(C)
    return QhmModel(from_kraus([reflection @ oracle]), outputs,
                    [np.outer(psi, psi.conj())], label="grover",
                    metadata=_metadata("grover", N=N, M=M, marked=marked))


def interface_model(d_s=2, d_e=3, p_i=0.1, p_s=0.05, p_e=0.05, dt=1.0, seed=0,
                    n_states=1):
    """System (d_s) - qubit interface - environment (d_e).

    U = exp(-i dt (H_S kron Z kron I + I kron Z kron H_E)) followed by an
    interface bit flip (p_i), a system unitary error (p_s) and an environment
    unitary error (p_e). Outputs are the Gell-Mann basis of the system
    tensored with the identity, i.e. the reduced system state."""
    d_s, d_e = int(d_s), int(d_e)
    if d_s < 1 or d_e < 1:
        raise ValueError("interface needs positive subsystem dimensions")
    probs = [float(p_i), float(p_s), float(p_e)]
    if min(probs) < 0 or sum(probs) > 1.0:
        raise ValueError("interface needs p_i, p_s, p_e >= 0 with p_i + p_s + p_e <= 1")

    rng = np.random.default_rng(seed)
    I_s, I_e = np.eye(d_s), np.eye(d_e)
    H_s = random_hermitian(d_s, rng)
    H_e = random_hermitian(d_e, rng)
    H = (np.kron(np.kron(H_s, PAULI["z"]), I_e)
         + np.kron(np.kron(I_s, PAULI["z"]), H_e))
    U = scipy.linalg.expm(-1j * float(dt) * H)
    U_s = unitary_group.rvs(d_s, random_state=rng) if d_s > 1 else np.eye(1)
    U_e = unitary_group.rvs(d_e, random_state=rng) if d_e > 1 else np.eye(1)

    errors = [
        (probs[0], np.kron(np.kron(I_s, PAULI["x"]), I_e)),
        (probs[1], np.kron(np.kron(U_s, np.eye(2)), I_e)),
        (probs[2], np.kron(np.kron(I_s, np.eye(2)), U_e)),
        (1.0 - sum(probs), np.eye(2 * d_s * d_e)),
    ]
    kraus = [np.sqrt(p) * K @ U for p, K in errors if p > 0]
    outputs = [np.kron(S, np.eye(2 * d_e)) for S in gell_mann(d_s)]
    n = 2 * d_s * d_e
    states = [random_density(n, rng) for _ in range(int(n_states))]
    return QhmModel(from_kraus(kraus), outputs, states, label="interface",
                    metadata=_metadata("interface", d_s=d_s, d_e=d_e, p_i=p_i,
                                       p_s=p_s, p_e=p_e, dt=dt, seed=seed))


def appendix_model():
    """Trivial dynamics on C^4 with outputs |0><0| + |2><2|, |1><1| + |3><3|
    and three diagonal initial states"""
    outputs = [np.diag([1.0, 0.0, 1.0, 0.0]).astype(complex),
               np.diag([0.0, 1.0, 0.0, 1.0]).astype(complex)]
    states = [np.eye(4, dtype=complex) / 4,
              np.diag([3.0, 0.0, 2.0, 2.0]).astype(complex) / 7,
              np.diag([7.0, 6.0, 3.0, 4.0]).astype(complex) / 20]
    return QhmModel(from_kraus([np.eye(4)]), outputs, states, label="appendix",
                    metadata=_metadata("appendix"))


def example3_model(tau=None):
    """Two qubits, identity dynamics, output tr(Z kron Z rho) and initial
    states (I/2 + X/4) kron tau, (I/2 + Y/4) kron tau"""
    tau = np.diag([0.75, 0.25]).astype(complex) if tau is None else \
        np.asarray(tau, dtype=complex)
    if tau.shape != (2, 2):
        raise ValueError("example3 needs a 2x2 tau")
    values = scipy.linalg.eigvalsh(hermitian_part(tau))
    if values[0] <= 0 or abs(values.sum() - 1.0) > 1e-12:
        raise ValueError("example3 needs a full-rank density tau")
    half = PAULI["0"] / 2
    states = [np.kron(half + PAULI["x"] / 4, tau), np.kron(half + PAULI["y"] / 4, tau)]
    return QhmModel(from_kraus([np.eye(4)]), [np.kron(PAULI["z"], PAULI["z"])], states,
                    label="example3",
                    metadata=_metadata("example3", tau=np.round(tau, 12).tolist()))


def identity_model(n=2):
    """Identity dynamics with a full tomographic output set and initial
    states spanning all operators; nothing can be reduced"""
    n = int(n)
    if n < 1:
        raise ValueError("identity needs n >= 1")
    states = []
    for i in range(n):
        e = np.eye(n, dtype=complex)[i]
        states.append(np.outer(e, e))
    for i in range(n):
        for j in range(i + 1, n):
            for phase in (1.0, 1j):
                v = (np.eye(n)[i] + phase * np.eye(n)[j]) / np.sqrt(2)
                states.append(np.outer(v, v.conj()))
    return QhmModel(from_kraus([np.eye(n)]), gell_mann(n), states, label="identity",
                    metadata=_metadata("identity", n=n))


def fixed_point_model(n=3, n_kraus=2, n_outputs=1, seed=0):
    """Random channel started in its (full-rank) fixed point"""
    rng = np.random.default_rng(seed)
    superop = from_kraus(random_kraus(n, n, int(n_kraus), rng))
    values, vectors = scipy.linalg.eig(superop.transfer)
    rho = unvec(vectors[:, np.argmin(np.abs(values - 1.0))], n)
    rho = hermitian_part(rho / np.trace(rho))
    outputs = [random_hermitian(n, rng) for _ in range(int(n_outputs))]
    return QhmModel(superop, outputs, [rho], label="fixed_point",
                    metadata=_metadata("fixed_point", n=n, n_kraus=n_kraus, seed=seed))


def _block_sizes(n):
    return [n - n // 2, n // 2] if n > 1 else [1]


def random_model(n=3, n_kraus=2, n_outputs=1, n_states=1, seed=0, structure="generic"):
    """Seeded random model.

    generic : random channel, random densities, random Hermitian outputs
    block   : the channel acts block-wise on two diagonal blocks (coherences
              between the blocks are destroyed), block-diagonal initial states
    product : n = d_s * 2, channel A_S kron (U . U^dagger), states rho_S kron tau
              with one shared tau, outputs C_S kron I"""
    n, n_kraus = int(n), int(n_kraus)
    if n < 1 or n_kraus < 1 or int(n_states) < 1 or int(n_outputs) < 0:
        raise ValueError("random needs n, n_kraus, n_states >= 1 and n_outputs >= 0")
    if structure not in STRUCTURES:
        raise ValueError("structure must be one of %s" % ", ".join(STRUCTURES))
    rng = np.random.default_rng(seed)

    if structure == "generic":
        kraus = random_kraus(n, n, n_kraus, rng)
        states = [random_density(n, rng) for _ in range(int(n_states))]
        outputs = [random_hermitian(n, rng) for _ in range(int(n_outputs))]
    elif structure == "block":
        sizes = _block_sizes(n)
        kraus, start = [], 0
        embeddings = []
        for d in sizes:
            E = np.zeros((n, d), dtype=complex)
            E[start:start + d, :] = np.eye(d)
            embeddings.append(E)
            kraus.extend(E @ K @ dagger(E) for K in random_kraus(d, d, n_kraus, rng))
            start += d
        states = []
        for _ in range(int(n_states)):
            weights = rng.dirichlet(np.ones(len(sizes)))
            states.append(sum(w * E @ random_density(d, rng) @ dagger(E)
                              for w, d, E in zip(weights, sizes, embeddings)))
        outputs = [random_hermitian(n, rng) for _ in range(int(n_outputs))]
    else:
        if n % 2 or n < 4:
            raise ValueError("product structure needs an even n >= 4")
        d_s = n // 2
        U_f = unitary_group.rvs(2, random_state=rng)
        kraus = [np.kron(K, U_f) for K in random_kraus(d_s, d_s, n_kraus, rng)]
        tau = random_density(2, rng)
        states = [np.kron(random_density(d_s, rng), tau) for _ in range(int(n_states))]
        outputs = [np.kron(random_hermitian(d_s, rng), np.eye(2))
                   for _ in range(int(n_outputs))]
    return QhmModel(from_kraus(kraus), outputs, states, label="random",
                    metadata=_metadata("random", n=n, n_kraus=n_kraus, seed=seed,
                                       structure=structure))


def tilted_pauli_span():
    """Operator span {xi kron X, xi kron Y, xi kron Z} with xi = 2 I + Z, and
    the central state xi kron I (normalized) that distorts it to I kron B(C^2)"""
    xi = 2 * PAULI["0"] + PAULI["z"]
    gens = [np.kron(xi, PAULI[k]) for k in ("x", "y", "z")]
    rho = np.kron(xi, PAULI["0"])
    return gens, rho / np.trace(rho).real


GENERATORS = {
    "grover": grover_model,
    "interface": interface_model,
    "appendix": appendix_model,
    "example3": example3_model,
    "random": random_model,
    "identity": identity_model,
    "fixed_point": fixed_point_model,
}


def generate(name, **params):
    if name not in GENERATORS:
        raise ValueError("unknown generator %r, expected one of %s"
                         % (name, ", ".join(sorted(GENERATORS))))
    model = GENERATORS[name](**params)
    logger.info("generated %r", model)
    return model
