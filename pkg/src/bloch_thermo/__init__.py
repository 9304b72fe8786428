"""Entropy-based thermodynamics of single-qubit Otto and Carnot engines on the Bloch ball."""

__version__ = "0.1.0"

from .bloch import (
    BlochState,
    DensityMatrix,
    LocalField,
    effective_temperature,
    energy,
    entropy,
    from_density,
    theta_angle,
    to_density,
)
from .cycles import (
    CarnotSpec,
    CyclePlan,
    CycleReport,
    OttoSpec,
    build_carnot,
    build_otto,
    carnot_analytics,
    entropy_production,
    otto_analytics,
    run_cycle,
)
from .ledger import EnergyLedger, clausius_entropy, first_law_residual, instantaneous_rates, integrate_ledger

__all__ = [
    "BlochState",
    "CarnotSpec",
    "CyclePlan",
    "CycleReport",
    "DensityMatrix",
    "EnergyLedger",
    "LocalField",
    "OttoSpec",
    "build_carnot",
    "build_otto",
    "carnot_analytics",
    "clausius_entropy",
    "effective_temperature",
    "energy",
    "entropy",
    "entropy_production",
    "first_law_residual",
    "from_density",
    "instantaneous_rates",
    "integrate_ledger",
    "otto_analytics",
    "run_cycle",
    "theta_angle",
    "to_density",
]
