"""
config.py

Default tolerances and run parameters for the reduction pipeline.

Values come from the "reduction_defaults" block of the project config.json,
then from the QHMR_TOL environment variable, then from explicit overrides
(CLI flags). A missing or broken config file falls back to built-in defaults.
"""

import json
import logging
import os
from pathlib import Path

logger = logging.getLogger(__name__)

CONFIG_PATH = Path(__file__).parent.parent.parent / "config.json"
TOL_ENV_VAR = "QHMR_TOL"
ORDERS = ("reachable-first", "observable-first")


def get_fallback_defaults():
    """Defaults used when config.json is not available"""
    return {
        "tol": 1e-9,
        "residual_tol": 1e-8,
        "seed": 0,
        "max_iters": 16,
        "order": "reachable-first",
        "horizon": 64,
        "trials": 10,
    }


def load_reduction_defaults(config_path=CONFIG_PATH):
    """Load the reduction defaults from the project configuration file"""
    defaults = get_fallback_defaults()
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except FileNotFoundError:
        logger.error("Configuration file not found: %s, using fallback defaults",
                     config_path)
        return defaults
    except json.JSONDecodeError as e:
        logger.error("Invalid JSON in configuration file: %s, using fallback defaults", e)
        return defaults

    defaults.update(config.get("reduction_defaults", {}))
    return defaults


class Settings(object):
    """Immutable bag of run parameters shared by every module.

    tol is the relative tolerance of all rank / PSD / cluster decisions,
    residual_tol bounds verification residuals."""

    __slots__ = ("tol", "residual_tol", "seed", "max_iters", "order",
                 "horizon", "trials")

    def __init__(self, tol=1e-9, residual_tol=1e-8, seed=0, max_iters=16,
                 order="reachable-first", horizon=64, trials=10):
        if tol <= 0 or residual_tol <= 0:
            raise ValueError("tolerances must be positive")
        if max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if order not in ORDERS:
            raise ValueError("order must be one of %s" % ", ".join(ORDERS))
        object.__setattr__(self, "tol", float(tol))
        object.__setattr__(self, "residual_tol", float(residual_tol))
        object.__setattr__(self, "seed", int(seed))
        object.__setattr__(self, "max_iters", int(max_iters))
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "horizon", int(horizon))
        object.__setattr__(self, "trials", int(trials))

    def __setattr__(self, name, value):
        raise AttributeError("Settings is immutable, use replace()")

    def replace(self, **overrides):
        """Return a copy with some fields changed; None values are ignored"""
        values = self.as_dict()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return Settings(**values)

    def as_dict(self):
        return {name: getattr(self, name) for name in self.__slots__}

    def __eq__(self, other):
        return isinstance(other, Settings) and self.as_dict() == other.as_dict()

    def __hash__(self):
        return hash(tuple(sorted(self.as_dict().items())))

    def __repr__(self):
        return "Settings(%s)" % ", ".join(
            "%s=%r" % item for item in self.as_dict().items())


def settings_from_config(config_path=CONFIG_PATH, environ=None):
    """Build Settings from config.json and the QHMR_TOL environment variable"""
    values = load_reduction_defaults(config_path)
    environ = os.environ if environ is None else environ
    env_tol = environ.get(TOL_ENV_VAR)
    if env_tol:
        try:
            values["tol"] = float(env_tol)
        except ValueError:
            logger.warning("Ignoring invalid %s=%r", TOL_ENV_VAR, env_tol)
    return Settings(**values)


_default_settings = None


def get_settings():
    """Process-wide default settings, loaded lazily"""
    global _default_settings
    if _default_settings is None:
        _default_settings = settings_from_config()
    return _default_settings


def set_settings(settings):
    """Replace the process-wide defaults (used by the CLI after parsing flags)"""
    global _default_settings
    _default_settings = settings


def resolve(settings=None, **overrides):
    """Settings to use for one call: explicit settings or the defaults,
    with per-call overrides (None means "not given")"""
    base = settings if settings is not None else get_settings()
    if any(v is not None for v in overrides.values()):
        return base.replace(**overrides)
    return base


def tolerance(tol=None):
    """The rank/PSD tolerance to use when a caller passes tol=None"""
    return get_settings().tol if tol is None else float(tol)


def residual_tolerance(tol=None):
    return get_settings().residual_tol if tol is None else float(tol)
