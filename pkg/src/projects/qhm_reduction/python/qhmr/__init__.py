"""qhmr: exact CPTP model reduction of quantum hidden Markov models."""

__version__ = "0.1.0"

from .channels import Superoperator, compose, from_kraus, validate_cptp
from .config import Settings, get_settings, set_settings
from .errors import QhmrError
from .reduction import (ReductionCertificate, ReductionStep, reduce, reduce_iterative,
                        reduce_observable, reduce_reachable, verify_equivalence)
from .subspace import QhmModel
