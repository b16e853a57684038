"""Indirect quantum control: steering a system through a coupled probe.

Subpackages:
    opkit    dense complex-matrix kernel (kron, partial trace, eig, expm)
    qubit    two-level system + two-level probe closed forms and solver
    nlevel   N-level conditional decomposition, Kraus channels, reachability
    thermal  thermal probe preparation
    verify   brute-force composite-evolution oracle
    cli      the ``iqctl`` experiment runner
"""

from . import cli, nlevel, opkit, qubit, thermal, verify
from .errors import (
    DegenerateConditionError,
    DegenerateProbeError,
    DimensionError,
    DomainError,
    HermiticityError,
    InfeasibleError,
    IQControlError,
    NormalizationError,
    ProbabilityError,
    StateError,
)

__all__ = [
    "cli", "nlevel", "opkit", "qubit", "thermal", "verify",
    "IQControlError", "DimensionError", "HermiticityError", "StateError",
    "DegenerateProbeError", "DegenerateConditionError", "InfeasibleError",
    "NormalizationError", "ProbabilityError", "DomainError",
]

__version__ = "0.1.0"
