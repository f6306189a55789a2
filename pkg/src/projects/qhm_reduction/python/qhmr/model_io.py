"""
model_io.py

JSON files for models and reduction certificates.

Complex matrices are stored row-major as nested lists of [re, im] pairs.
A map is stored either by its Kraus operators or by its transfer matrix;
when a file carries both they must agree.
"""

import json
import logging
from pathlib import Path

import numpy as np

from .channels import Superoperator, check_cptp, from_kraus
from .config import residual_tolerance, tolerance
from .errors import DimensionError, ModelFormatError, PositivityError
from .linalg import check_density
from .reduction import ReductionCertificate, ReductionStep
from .subspace import QhmModel

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"


def encode_matrix(M):
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def decode_matrix(data, name="matrix"):
    try:
        M = np.array(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ModelFormatError("%s is not a nested list of [re, im] pairs: %s" % (name, e))
    if M.ndim != 3 or M.shape[2] != 2:
        raise ModelFormatError("%s must be a matrix of [re, im] pairs, got shape %s"
                               % (name, M.shape))
    return M[:, :, 0] + 1j * M[:, :, 1]


def _plain(value):
    """JSON-friendly copy of diagnostics values"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def encode_superop(S):
    data = {"in_dim": S.in_dim, "out_dim": S.out_dim}
    if S.kraus is not None:
        data["kraus"] = [encode_matrix(K) for K in S.kraus]
    else:
        data["transfer"] = encode_matrix(S.transfer)
    return data


def decode_superop(data, name="map"):
    if not isinstance(data, dict):
        raise ModelFormatError("%s must be an object" % name)
    if "kraus" not in data and "transfer" not in data:
        raise ModelFormatError("%s needs 'kraus' or 'transfer'" % name)
    if "kraus" in data and not isinstance(data["kraus"], list):
        raise ModelFormatError("%s: 'kraus' must be a list of matrices" % name)
    in_dim = data.get("in_dim")
    out_dim = data.get("out_dim")
    try:
        S = None
        if "kraus" in data:
            S = from_kraus([decode_matrix(K, "%s Kraus operator" % name)
                            for K in data["kraus"]])
        if "transfer" in data:
            T = Superoperator(decode_matrix(data["transfer"], "%s transfer" % name),
                              in_dim, out_dim)
            if S is None:
                S = T
            elif S.distance(T) > residual_tolerance() * max(1.0, np.linalg.norm(T.transfer)):
                raise ModelFormatError("%s: Kraus operators and transfer matrix disagree"
                                       % name, residual=S.distance(T))
    except (DimensionError, TypeError) as e:
        raise ModelFormatError("%s: %s" % (name, e))
    if (in_dim is not None and S.in_dim != in_dim) or \
            (out_dim is not None and S.out_dim != out_dim):
        raise ModelFormatError("%s: declared dimensions %s -> %s do not match %d -> %d"
                               % (name, in_dim, out_dim, S.in_dim, S.out_dim))
    return S


def model_to_dict(m):
    return {
        "schema_version": SCHEMA_VERSION,
        "dim": m.dim,
        "label": m.label,
        "metadata": _plain(m.metadata),
        "block_dims": m.block_dims,
        "map": encode_superop(m.map),
        "output_ops": [encode_matrix(C) for C in m.output_ops],
        "initial_states": [encode_matrix(rho) for rho in m.initial_states],
    }


def _check_schema(data, what):
    if not isinstance(data, dict):
        raise ModelFormatError("%s file must hold a JSON object" % what)
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ModelFormatError("unsupported %s schema_version %r (expected %r)"
                               % (what, version, SCHEMA_VERSION))


def model_from_dict(data, tol=None):
    """Parse and validate a model; CPTP failures raise CptpError"""
    _check_schema(data, "model")
    for key in ("dim", "map", "initial_states"):
        if key not in data:
            raise ModelFormatError("model is missing %r" % key)
    n = data["dim"]
    if not isinstance(n, int) or n < 1:
        raise ModelFormatError("model dim must be a positive integer, got %r" % (n,))
    superop = decode_superop(data["map"])
    if superop.in_dim != n or superop.out_dim != n:
        raise ModelFormatError("map acts on dimension %d -> %d, model dim is %d"
                               % (superop.in_dim, superop.out_dim, n))
    outputs = [decode_matrix(C, "output operator %d" % i)
               for i, C in enumerate(data.get("output_ops", []))]
    states = [decode_matrix(rho, "initial state %d" % i)
              for i, rho in enumerate(data["initial_states"])]
    try:
        m = QhmModel(superop, outputs, states, label=data.get("label", ""),
                     block_dims=data.get("block_dims"), metadata=data.get("metadata"),
                     validate=False)
    except DimensionError as e:
        raise ModelFormatError(str(e))
    check_cptp(m.map, tol, name="model map")
    for i, rho in enumerate(m.initial_states):
        try:
            check_density(rho, tol, name="initial state %d" % i)
        except PositivityError as e:
            raise ModelFormatError(str(e))
    return m


def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ModelFormatError("invalid JSON in %s: %s" % (path, e))
    except OSError as e:
        raise ModelFormatError("cannot read %s: %s" % (path, e))


def _write_json(data, path):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=1)
        f.write("\n")
    logger.info("wrote %s", path)
    return path


def save_model(m, path):
    return _write_json(model_to_dict(m), path)


def load_model(path, tol=None):
    m = model_from_dict(_read_json(path), tolerance(tol))
    logger.info("loaded %r from %s", m, path)
    return m


def step_to_dict(step):
    return {
        "kind": step.kind,
        "input_dim": step.input_dim,
        "output_dim": step.output_dim,
        "R": encode_superop(step.R),
        "J": encode_superop(step.J),
        "sigma": None if step.sigma is None else encode_matrix(step.sigma),
        "diagnostics": _plain(step.diagnostics),
        "restriction": None if step.restriction is None else step_to_dict(step.restriction),
    }


def step_from_dict(data):
    try:
        return ReductionStep(
            data["kind"], data["input_dim"], data["output_dim"],
            decode_superop(data["R"], "step R"), decode_superop(data["J"], "step J"),
            None if data.get("sigma") is None else decode_matrix(data["sigma"], "sigma"),
            data.get("diagnostics"),
            None if data.get("restriction") is None else step_from_dict(data["restriction"]))
    except ModelFormatError:
        raise
    except (KeyError, TypeError) as e:
        raise ModelFormatError("malformed reduction step: %s" % e)
    except ValueError as e:
        raise ModelFormatError(str(e))


def certificate_to_dict(cert):
    return {
        "schema_version": SCHEMA_VERSION,
        "input_dim": cert.input_dim,
        "iterations": cert.iterations,
        "converged": cert.converged,
        "verified_horizon": cert.verified_horizon,
        "max_output_deviation": cert.max_output_deviation,
        "linear_lower_bound": cert.linear_lower_bound,
        "dims": cert.dims,
        "steps": [step_to_dict(step) for step in cert.steps],
        "R_star": encode_superop(cert.R_star),
        "J_star": encode_superop(cert.J_star),
        "reduced": model_to_dict(cert.reduced),
    }


def certificate_from_dict(data, tol=None):
    _check_schema(data, "certificate")
    for key in ("steps", "R_star", "J_star", "reduced"):
        if key not in data:
            raise ModelFormatError("certificate is missing %r" % key)
    return ReductionCertificate(
        [step_from_dict(s) for s in data["steps"]],
        decode_superop(data["R_star"], "R_star"),
        decode_superop(data["J_star"], "J_star"),
        model_from_dict(data["reduced"], tol),
        verified_horizon=data.get("verified_horizon", 0),
        max_output_deviation=data.get("max_output_deviation", 0.0),
        linear_lower_bound=data.get("linear_lower_bound"),
        iterations=data.get("iterations", 0),
        converged=data.get("converged", True),
        input_dim=data.get("input_dim"))


def save_certificate(cert, path):
    return _write_json(certificate_to_dict(cert), path)


def load_certificate(path, tol=None):
    return certificate_from_dict(_read_json(path), tolerance(tol))
