"""
reduction.py

Model reduction by projection onto operator algebras.

    reduce_reachable   - projects onto the smallest distorted algebra holding
                         every reachable state (full state equivalence on the
                         initial states)
    reduce_observable  - projects onto the algebra generated by the observable
                         operators (output equivalence for every initial state)
    reduce_iterative   - alternates the two until the dimension stops changing
                         and packs the result in a ReductionCertificate
    verify_equivalence - replays full and reduced models and reports the
                         largest output deviation
"""

import logging

import numpy as np
import scipy.linalg

from .algebra import (center, distorted_generated_algebra, generated_algebra,
                      is_compatible, restrict_to_support, restricted_block_dims,
                      support_restriction_maps)
from .channels import Superoperator, check_cptp, compose, compose_all, validate_cptp
from .config import resolve
from .errors import CertificateMismatchError, ResidualGuardError
from .linalg import hermitian_part, projector_rank, random_density, support_projector
from .projections import (conditional_expectation, factor_states_from, factorize,
                          maximally_mixed_states, reduced_output_ops)
from .subspace import (QhmModel, add, linear_minimal_reduction, observable_complement,
                       reachable_subspace, span_basis)

logger = logging.getLogger(__name__)

KINDS = ("reachable", "observable", "support-restriction")
ALGORITHMS = ("reachable", "observable", "iterative")


class ReductionStep(object):
    """One projection: R maps the input model space onto the reduced one, J back.

    input_dim / output_dim are operator-space dimensions (sum of squared
    block sizes). A reachable step that had to restrict the model onto the
    support of its reachable operators already contains that restriction in
    R and J; the restriction alone is kept in `restriction` for reporting."""

    def __init__(self, kind, input_dim, output_dim, R, J, sigma=None,
                 diagnostics=None, restriction=None):
        if kind not in KINDS:
            raise ValueError("unknown reduction step kind %r" % kind)
        self.kind = kind
        self.input_dim = int(input_dim)
        self.output_dim = int(output_dim)
        self.R = R
        self.J = J
        self.sigma = sigma
        self.diagnostics = dict(diagnostics or {})
        self.restriction = restriction

    @property
    def reduced(self):
        return self.output_dim < self.input_dim

    def __repr__(self):
        return "ReductionStep(%s, %d -> %d)" % (self.kind, self.input_dim,
                                                self.output_dim)


class ReductionCertificate(object):
    """Composed maps R_star, J_star and the reduced model that witness
    output equivalence with the input model"""

    def __init__(self, steps, R_star, J_star, reduced, verified_horizon=0,
                 max_output_deviation=0.0, linear_lower_bound=None, iterations=0,
                 converged=True, input_dim=None):
        self.steps = list(steps)
        self.R_star = R_star
        self.J_star = J_star
        self.reduced = reduced
        self.verified_horizon = int(verified_horizon)
        self.max_output_deviation = float(max_output_deviation)
        self.linear_lower_bound = linear_lower_bound
        self.iterations = int(iterations)
        self.converged = bool(converged)
        self.input_dim = input_dim

    @property
    def dims(self):
        """Operator-space dimension before the first and after every step"""
        if not self.steps:
            return [self.reduced.operator_dim]
        return [self.steps[0].input_dim] + [s.output_dim for s in self.steps]

    @property
    def kinds(self):
        return sorted(set(s.kind for s in self.steps))

    def projection_residual(self):
        """||P o P - P|| for P = J_star o R_star"""
        P = compose(self.J_star, self.R_star)
        return P.distance(compose(P, P))

    def __repr__(self):
        return "ReductionCertificate(dims=%s, converged=%s)" % (self.dims, self.converged)


def trajectory_average(m):
    """(1 / (|S| n^2)) sum over initial states of sum_{t=0}^{n^2} A^t(rho)"""
    n = m.dim
    T = m.map.transfer
    total = np.zeros(n * n, dtype=complex)
    for rho in m.initial_states:
        x = rho.reshape(-1, order="F")
        for _ in range(n * n + 1):
            total += x
            x = T @ x
    average = total.reshape((n, n), order="F") / (len(m.initial_states) * n * n)
    return hermitian_part(average)


def _replay_horizon(m, settings):
    return min(2 * m.dim ** 2, settings.horizon)


def _state_deviation(m, R, J, reduced, horizon):
    """max_t ||A^t(rho) - J(A_red^t(R(rho)))|| over the initial states"""
    worst = 0.0
    for rho, x in zip(m.initial_states, reduced.initial_states):
        full = m.trajectory(rho, horizon)
        small = reduced.trajectory(x, horizon)
        for X, y in zip(full, small):
            worst = max(worst, float(np.linalg.norm(X - J.apply(y))))
    return worst


def _output_deviation(m, reduced, pairs, horizon):
    worst = 0.0
    for rho, x in pairs:
        if not m.output_ops:
            break
        diff = m.outputs(rho, horizon) - reduced.outputs(x, horizon)
        worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def _project(m, algebra, taus, kind, settings, diagnostics, restriction=None,
             outer=None):
    """Factorize E onto algebra and build the reduced model and its step.

    outer is the (model, R, J) of a support restriction applied before, in
    which case R and J of the step are composed with it."""
    tol = settings.tol
    ce = conditional_expectation(algebra, taus, tol)
    f = factorize(ce, tol, settings.residual_tol)
    reduced_map = compose(f.R, compose(m.map, f.J))
    check_cptp(reduced_map, tol, name="reduced map")

    diagnostics = dict(diagnostics)
    diagnostics.update(f.residuals(ce))
    diagnostics["blocks"] = [list(b) for b in ce.decomposition.blocks]
    diagnostics["module_residual"] = ce.module_residual(m.initial_states)

    R, J, source = f.R, f.J, m
    if outer is not None:
        source, R_res, J_res = outer
        R = compose(f.R, R_res)
        J = compose(J_res, f.J)
    reduced = QhmModel(reduced_map, reduced_output_ops(f, m.output_ops),
                       [hermitian_part(f.R.apply(rho)) for rho in m.initial_states],
                       label=source.label, block_dims=f.mask.dims,
                       metadata=source.metadata, tol=tol)
    input_dim = source.operator_dim
    if f.reduced_dim > input_dim:
        raise ResidualGuardError("%s step grew the operator space from %d to %d"
                                 % (kind, input_dim, f.reduced_dim))
    step = ReductionStep(kind, input_dim, f.reduced_dim, R, J, ce.sigma, diagnostics,
                         restriction)
    logger.info("%s step: %d -> %d, blocks %s", kind, input_dim, f.reduced_dim,
                diagnostics["blocks"])
    return reduced, step


def reduce_reachable(m, settings=None):
    """Projection onto the reachable algebra.

    The reduced model reproduces every state of the full trajectories from
    the initial states: A^t(rho) = J(A_red^t(R(rho))). Returns (model, step)."""
    s = resolve(settings)
    tol = s.tol
    original = m
    reach = reachable_subspace(m, tol)
    P = support_projector(reach.basis, tol)
    rank = projector_rank(P)
    restriction, outer = None, None
    if rank < m.dim:
        logger.info("restricting the model onto the rank-%d support of the reachable "
                    "operators", rank)
        R_res, J_res = support_restriction_maps(P, tol, m.block_dims)
        m = restrict_to_support(original, P, tol, s.residual_tol)
        dims = restricted_block_dims(P, original.block_dims, tol)
        restricted_dim = rank ** 2 if dims is None else sum(d * d for d in dims)
        restriction = ReductionStep("support-restriction", original.operator_dim,
                                    restricted_dim, R_res, J_res,
                                    diagnostics={"support_rank": rank})
        outer = (original, R_res, J_res)
        reach = reachable_subspace(m, tol)

    alg = generated_algebra(reach, tol, s.seed)
    Z = center(alg, tol)
    sigma = hermitian_part(Z.basis.project(trajectory_average(m)))
    values = scipy.linalg.eigvalsh(sigma)
    if values[0] <= tol * max(values[-1], 1e-300):
        raise ResidualGuardError("distortion state is rank deficient after restriction",
                                 residual=float(values[0]))
    sigma = sigma / np.trace(sigma).real

    D = distorted_generated_algebra(sigma, reach, tol, s.seed).base
    compat = is_compatible(sigma, D, tol, s.residual_tol)
    if not compat:
        raise ResidualGuardError("distortion state is not compatible with the "
                                 "reachable algebra", residual=compat.residual)
    taus = factor_states_from(sigma, D.decomposition)

    diagnostics = {
        "reachable_rank": reach.rank,
        "support_rank": rank,
        "algebra_dim": alg.dim,
        "center_dim": Z.dim,
        "distorted_algebra_dim": D.dim,
        "compatibility_residual": compat.residual,
    }
    reduced, step = _project(m, D, taus, "reachable", s, diagnostics, restriction, outer)
    step.sigma = sigma

    horizon = _replay_horizon(original, s)
    deviation = _state_deviation(original, step.R, step.J, reduced, horizon)
    step.diagnostics["state_deviation"] = deviation
    scale = max([1.0] + [np.linalg.norm(rho) for rho in original.initial_states])
    if deviation > s.residual_tol * scale:
        raise ResidualGuardError("reduced model does not reproduce the reachable states",
                                 residual=deviation)
    return reduced, step


def reduce_observable(m, settings=None):
    """Projection onto the observable algebra.

    The reduced model reproduces the outputs for every initial state:
    C(A^t(rho)) = C_red(A_red^t(R(rho))). Returns (model, step)."""
    s = resolve(settings)
    tol = s.tol
    observable = observable_complement(m, tol)
    gens = add(observable, span_basis([np.eye(m.dim)], tol=tol), tol)
    O = generated_algebra(gens, tol, s.seed)
    taus = maximally_mixed_states(O.decomposition)
    diagnostics = {
        "observable_rank": observable.rank,
        "algebra_dim": O.dim,
    }
    reduced, step = _project(m, O, taus, "observable", s, diagnostics)

    rng = np.random.default_rng(s.seed)
    samples = [random_density(m.dim, rng) for _ in range(s.trials)]
    horizon = _replay_horizon(m, s)
    deviation = _output_deviation(m, reduced,
                                  [(rho, step.R.apply(rho)) for rho in samples], horizon)
    step.diagnostics["random_state_deviation"] = deviation
    scale = max([1.0] + [np.linalg.norm(C) for C in m.output_ops])
    if deviation > s.residual_tol * scale:
        raise ResidualGuardError("reduced model does not reproduce the outputs of "
                                 "random initial states", residual=deviation)
    return reduced, step


STAGES = {
    "reachable": reduce_reachable,
    "observable": reduce_observable,
}


def _stage_order(order):
    if order == "observable-first":
        return ("observable", "reachable")
    return ("reachable", "observable")


def build_certificate(m, steps, reduced, settings=None, **extra):
    """Compose the step maps and check the result is a CPTP projection"""
    s = resolve(settings)
    if steps:
        R_star = compose_all(*[step.R for step in reversed(steps)])
        J_star = compose_all(*[step.J for step in steps])
    else:
        R_star = J_star = Superoperator.identity(m.dim)
    check_cptp(R_star, s.tol, name="composed reduction map")
    check_cptp(J_star, s.tol, name="composed injection map")
    cert = ReductionCertificate(steps, R_star, J_star, reduced,
                                input_dim=m.operator_dim, **extra)
    residual = cert.projection_residual()
    if residual > s.residual_tol * max(1.0, m.dim):
        raise ResidualGuardError("J_star o R_star is not idempotent", residual=residual)
    return cert


def reduce_iterative(m, max_iters=None, order=None, settings=None):
    """Alternate the two projections until one full pass leaves the
    operator-space dimension unchanged, or max_iters passes were run"""
    s = resolve(settings, max_iters=max_iters, order=order)
    current, steps = m, []
    converged, iterations = False, 0
    for iterations in range(1, s.max_iters + 1):
        start = current.operator_dim
        for stage in _stage_order(s.order):
            current, step = STAGES[stage](current, s)
            steps.append(step)
        logger.info("iteration %d: operator-space dimension %d -> %d", iterations,
                    start, current.operator_dim)
        if current.operator_dim == start:
            converged = True
            break
    if not converged:
        logger.warning("iterative reduction did not converge within %d iterations",
                       s.max_iters)
    return _finish(m, steps, current, s, iterations, converged)


def _finish(m, steps, reduced, settings, iterations, converged):
    lower = linear_minimal_reduction(m, settings.tol, settings.residual_tol).eff_dim
    cert = build_certificate(m, steps, reduced, settings, linear_lower_bound=lower,
                             iterations=iterations, converged=converged,
                             verified_horizon=settings.horizon)
    report = verify_equivalence(m, cert, settings.horizon, trials=0, settings=settings)
    cert.max_output_deviation = report.max_output_deviation
    if reduced.operator_dim < lower:
        logger.warning("reduced dimension %d is below the linear lower bound %d",
                       reduced.operator_dim, lower)
    return cert


def reduce(m, algorithm="iterative", settings=None):
    """Run one of the reduction algorithms and return its certificate"""
    s = resolve(settings)
    if algorithm == "iterative":
        return reduce_iterative(m, settings=s)
    if algorithm not in STAGES:
        raise ValueError("unknown algorithm %r, expected one of %s"
                         % (algorithm, ", ".join(ALGORITHMS)))
    reduced, step = STAGES[algorithm](m, s)
    return _finish(m, [step], reduced, s, 1, True)


class EquivalenceReport(object):
    """Deviations between a full model and a certified reduction"""

    def __init__(self, horizon, max_output_deviation, max_state_deviation=None,
                 max_trial_deviation=None, threshold=None):
        self.horizon = horizon
        self.max_output_deviation = max_output_deviation
        self.max_state_deviation = max_state_deviation
        self.max_trial_deviation = max_trial_deviation
        self.threshold = threshold

    @property
    def max_deviation(self):
        values = [self.max_output_deviation, self.max_state_deviation,
                  self.max_trial_deviation]
        return max(v for v in values if v is not None)

    @property
    def passed(self):
        return self.threshold is None or self.max_deviation <= self.threshold

    def as_dict(self):
        return {
            "horizon": self.horizon,
            "max_output_deviation": self.max_output_deviation,
            "max_state_deviation": self.max_state_deviation,
            "max_trial_deviation": self.max_trial_deviation,
            "threshold": self.threshold,
            "passed": self.passed,
        }


def check_certificate(full, cert):
    """Raise CertificateMismatchError unless cert was built for a model like full"""
    reduced = cert.reduced
    if cert.R_star.in_dim != full.dim or cert.J_star.out_dim != full.dim:
        raise CertificateMismatchError(
            "certificate maps act on dimension %d, model has dimension %d"
            % (cert.R_star.in_dim, full.dim))
    if cert.R_star.out_dim != reduced.dim or cert.J_star.in_dim != reduced.dim:
        raise CertificateMismatchError("certificate maps do not match its reduced model")
    if len(reduced.output_ops) != len(full.output_ops):
        raise CertificateMismatchError("certificate has %d outputs, model has %d"
                                       % (len(reduced.output_ops), len(full.output_ops)))
    if len(reduced.initial_states) != len(full.initial_states):
        raise CertificateMismatchError(
            "certificate has %d initial states, model has %d"
            % (len(reduced.initial_states), len(full.initial_states)))


def verify_equivalence(full, cert, T=None, trials=None, settings=None):
    """Replay both models on the initial states for t = 0..T.

    Certificates made of reachable steps only are also checked state by state
    (A^t(rho) = J_star(A_red^t(rho_red))); certificates made of observable
    steps only are also checked on `trials` random initial densities mapped
    through R_star."""
    s = resolve(settings, horizon=T, trials=trials)
    check_certificate(full, cert)
    reduced = cert.reduced
    T = s.horizon

    pairs = list(zip(full.initial_states, reduced.initial_states))
    deviation = _output_deviation(full, reduced, pairs, T)
    for rho, x in pairs:
        deviation = max(deviation, float(np.linalg.norm(cert.R_star.apply(rho) - x)))

    kinds = set(step.kind for step in cert.steps)
    state_deviation = None
    if kinds == {"reachable"}:
        state_deviation = _state_deviation(full, cert.R_star, cert.J_star, reduced, T)
    trial_deviation = None
    if kinds == {"observable"} and s.trials:
        rng = np.random.default_rng(s.seed)
        samples = [random_density(full.dim, rng) for _ in range(s.trials)]
        trial_deviation = _output_deviation(
            full, reduced, [(rho, cert.R_star.apply(rho)) for rho in samples], T)

    report = EquivalenceReport(T, deviation, state_deviation, trial_deviation,
                               threshold=s.residual_tol)
    logger.info("verification over t <= %d: max deviation %.3e", T, report.max_deviation)
    return report


def certificate_cptp_reports(cert, tol=None):
    """CPTP reports of every map a certificate carries"""
    reports = {"R_star": validate_cptp(cert.R_star, tol),
               "J_star": validate_cptp(cert.J_star, tol),
               "reduced_map": validate_cptp(cert.reduced.map, tol)}
    for i, step in enumerate(cert.steps):
        reports["step%d.R" % i] = validate_cptp(step.R, tol)
        reports["step%d.J" % i] = validate_cptp(step.J, tol)
    return reports
