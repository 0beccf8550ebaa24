"""Simulate, optimize and bound entanglement-assisted communication protocols."""
from __future__ import annotations

from .linalg import DensityState, InvariantError, KrausChannel, Povm
from .protocol import (
    AdaptiveEAClassicalStrategy,
    Behavior,
    NonAdaptiveEAClassicalStrategy,
    QuantumMessageStrategy,
    QubitPrepareMeasure,
    behavior_of,
    check_nonadaptive,
    lift_to_adaptive,
)
from .tasks import (
    LinearFunctional,
    classical_bound,
    evaluate,
    facet_certificate,
    facet_functional,
    mesd_functional,
    mesd_rate,
    rac_functional,
)

__version__ = "0.1.0"

__all__ = [
    "DensityState", "InvariantError", "KrausChannel", "Povm",
    "AdaptiveEAClassicalStrategy", "Behavior", "NonAdaptiveEAClassicalStrategy",
    "QuantumMessageStrategy", "QubitPrepareMeasure", "behavior_of", "check_nonadaptive",
    "lift_to_adaptive", "LinearFunctional", "classical_bound", "evaluate", "facet_certificate",
    "facet_functional", "mesd_functional", "mesd_rate", "rac_functional", "__version__",
]
