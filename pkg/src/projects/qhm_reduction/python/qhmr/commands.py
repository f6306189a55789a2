"""
commands.py

The four command-line operations. Each cmd_* function prints a short
report to `out` and returns the process exit code:

    0  success
    1  the input could not be parsed (bad JSON, schema, dimensions, states)
    2  a map is not CPTP, or a certificate does not belong to the model
    3  an internal residual guard fired, or verify measured a deviation
       above the threshold
"""

import inspect
import logging
import sys
from pathlib import Path

import numpy as np

from .channels import validate_cptp
from .config import get_settings
from .errors import (CertificateMismatchError, CptpError, DimensionError,
                     ModelFormatError, QhmrError)
from .generators import GENERATORS, generate
from .model_io import load_certificate, load_model, save_certificate, save_model
from .reduction import ALGORITHMS, reduce, verify_equivalence
from .subspace import linear_minimal_reduction, observable_complement, reachable_subspace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_CPTP = 2
EXIT_RESIDUAL = 3


def exit_code_for(exc):
    if isinstance(exc, (ModelFormatError, DimensionError)):
        return EXIT_PARSE
    if isinstance(exc, (CptpError, CertificateMismatchError)):
        return EXIT_CPTP
    return EXIT_RESIDUAL


def _int_list(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _matrix(text):
    values = [complex(x.strip().replace("i", "j")) for x in text.split(",")]
    side = int(round(np.sqrt(len(values))))
    if side * side != len(values):
        raise ValueError("matrix parameter needs a square number of entries")
    return np.array(values).reshape(side, side)


PARAM_PARSERS = {
    "marked": _int_list,
    "tau": _matrix,
}


def parse_params(name, pairs):
    """key=value strings -> keyword arguments typed after the generator defaults"""
    if name not in GENERATORS:
        raise ValueError("unknown generator %r" % name)
    signature = inspect.signature(GENERATORS[name])
    params = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError("parameter %r is not of the form key=value" % pair)
        key, text = pair.split("=", 1)
        key = key.strip()
        if key not in signature.parameters:
            raise ValueError("generator %s has no parameter %r (known: %s)"
                             % (name, key, ", ".join(signature.parameters)))
        default = signature.parameters[key].default
        if key in PARAM_PARSERS:
            params[key] = PARAM_PARSERS[key](text)
        elif isinstance(default, bool):
            params[key] = text.lower() in ("1", "true", "yes")
        elif isinstance(default, int):
            params[key] = int(text)
        elif isinstance(default, float):
            params[key] = float(text)
        else:
            params[key] = text
    return params


def _load(path, settings):
    return load_model(path, settings.tol)


def cmd_generate(name, params=None, output_path=None, out=sys.stdout):
    """Write one of the built-in models to a model file"""
    try:
        model = generate(name, **parse_params(name, params))
    except (ValueError, TypeError) as exc:
        logger.error("invalid generator parameters: %s", exc)
        return EXIT_PARSE
    except QhmrError as exc:
        logger.error("%s", exc)
        return exit_code_for(exc)
    path = save_model(model, output_path or "%s.json" % name)
    print("generated %s: dim %d, %d outputs, %d initial states -> %s"
          % (name, model.dim, len(model.output_ops), len(model.initial_states), path),
          file=out)
    return EXIT_OK


def cmd_info(model_path, settings=None, out=sys.stdout):
    """Dimensions, CPTP residuals, reachable / observable ranks and the
    linear lower bound of a model file"""
    settings = settings or get_settings()
    try:
        m = _load(model_path, settings)
        report = validate_cptp(m.map, settings.tol)
        reach = reachable_subspace(m, settings.tol)
        observable = observable_complement(m, settings.tol)
        linear = linear_minimal_reduction(m, settings.tol, settings.residual_tol)
    except QhmrError as exc:
        logger.error("%s", exc)
        return exit_code_for(exc)

    print("model: %s" % (m.label or Path(model_path).name), file=out)
    print("dim: %d (operator-space dimension %d)" % (m.dim, m.operator_dim), file=out)
    if m.block_dims is not None:
        print("block mask: %s" % m.block_dims, file=out)
    print("outputs: %d, initial states: %d" % (len(m.output_ops), len(m.initial_states)),
          file=out)
    print("cptp: %s" % report, file=out)
    print("rank(reachable): %d" % reach.rank, file=out)
    print("rank(observable): %d" % observable.rank, file=out)
    print("eff_dim (linear lower bound): %d" % linear.eff_dim, file=out)
    return EXIT_OK


def _print_step(index, step, out):
    blocks = step.diagnostics.get("blocks")
    print("step %d %s: %d -> %d, blocks (d_S, d_F) %s"
          % (index, step.kind, step.input_dim, step.output_dim, blocks), file=out)
    if step.restriction is not None:
        print("  support restriction: rank %d (%d -> %d)"
              % (step.restriction.diagnostics["support_rank"],
                 step.restriction.input_dim, step.restriction.output_dim), file=out)
    residuals = ", ".join("%s=%.2e" % (key, step.diagnostics[key])
                          for key in sorted(step.diagnostics)
                          if isinstance(step.diagnostics[key], float))
    if residuals:
        print("  %s" % residuals, file=out)


def cmd_reduce(input_path, algorithm="iterative", output_path=None, settings=None,
               out=sys.stdout):
    """Reduce a model file and write its certificate"""
    settings = settings or get_settings()
    if algorithm not in ALGORITHMS:
        logger.error("unknown algorithm %r", algorithm)
        return EXIT_PARSE
    try:
        m = _load(input_path, settings)
    except QhmrError as exc:
        logger.error("cannot load %s: %s", input_path, exc)
        return exit_code_for(exc)
    try:
        cert = reduce(m, algorithm, settings)
    except QhmrError as exc:
        logger.error("reduction failed: %s", exc)
        return exit_code_for(exc)

    if output_path is None:
        source = Path(input_path)
        output_path = source.with_name(source.stem + ".certificate.json")
    save_certificate(cert, output_path)

    reduced = cert.reduced
    print("model: %s (dim %d, operator-space dimension %d)"
          % (m.label or Path(input_path).name, m.dim, m.operator_dim), file=out)
    print("algorithm: %s, order %s, tol %.1e, seed %d"
          % (algorithm, settings.order, settings.tol, settings.seed), file=out)
    for index, step in enumerate(cert.steps, start=1):
        _print_step(index, step, out)
    print("iterations: %d%s" % (cert.iterations, "" if cert.converged
                                 else " (not converged)"), file=out)
    print("reduced: dim %d, operator-space dimension %d, blocks %s"
          % (reduced.dim, reduced.operator_dim, reduced.block_dims), file=out)
    if reduced.operator_dim == m.operator_dim:
        print("no reduction possible", file=out)
    print("linear lower bound (eff_dim): %s" % cert.linear_lower_bound, file=out)
    print("max output deviation (t <= %d): %.3e"
          % (cert.verified_horizon, cert.max_output_deviation), file=out)
    print("certificate: %s" % output_path, file=out)
    return EXIT_OK


def cmd_verify(model_path, certificate_path, horizon=None, trials=None,
               max_deviation=None, settings=None, out=sys.stdout):
    """Replay a model against its certificate; exit 0 iff the deviation is
    within the threshold (residual_tol unless max_deviation is given)"""
    settings = settings or get_settings()
    try:
        m = _load(model_path, settings)
        cert = load_certificate(certificate_path, settings.tol)
        report = verify_equivalence(m, cert, horizon, trials, settings)
    except QhmrError as exc:
        logger.error("%s", exc)
        return exit_code_for(exc)

    threshold = report.threshold if max_deviation is None else float(max_deviation)
    report.threshold = threshold
    print("horizon: %d" % report.horizon, file=out)
    print("max output deviation: %.3e" % report.max_output_deviation, file=out)
    if report.max_state_deviation is not None:
        print("max state deviation: %.3e" % report.max_state_deviation, file=out)
    if report.max_trial_deviation is not None:
        print("max random-state deviation: %.3e" % report.max_trial_deviation, file=out)
    print("threshold: %.1e -> %s" % (threshold, "PASS" if report.passed else "FAIL"),
          file=out)
    return EXIT_OK if report.passed else EXIT_RESIDUAL
