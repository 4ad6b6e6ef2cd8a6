"""Optimal foraging strategies for the hungry-bat model.

A bat visits one of ``n`` cacti per round, drawn from a fixed probability
vector.  Cacti refill at individual rates and are emptied by competitors
with individual probabilities.  This package computes the unique visit
distribution maximizing the long-run collection rate, extracts small
cores that keep a (1 - eps) fraction of that rate, and validates the
closed forms against a seeded Monte Carlo simulation.
"""

from .core import (
    CoreResult,
    build_core,
    core_size,
    homogeneous_prefix_value,
    tightness_instance,
)
from .errors import (
    ConsistencyError,
    DomainError,
    EmptyInstanceError,
    HungryBatError,
    InstanceValidationError,
    InvalidRateError,
    InvalidStealProbError,
    LengthMismatchError,
)
from .instance import (
    Instance,
    OrderedInstance,
    instance_from_json,
    instance_to_json,
    order_by_chi,
    validate_instance,
)
from .payoff import (
    Strategy,
    b,
    b_prime,
    chi,
    gap_expected_amount,
    gap_pmf,
    total_rate,
)
from .simulator import (
    GapDistribution,
    SimEstimate,
    estimate_gap_amount,
    gap_tv_distance,
    sample_gap_distribution,
    simulate,
)
from .solver import (
    KktCertificate,
    SolveReport,
    build_linear_system,
    solve_optimal,
    verify_kkt,
    water_level,
)

__all__ = [
    "Instance",
    "OrderedInstance",
    "Strategy",
    "SolveReport",
    "KktCertificate",
    "CoreResult",
    "SimEstimate",
    "GapDistribution",
    "validate_instance",
    "instance_from_json",
    "instance_to_json",
    "order_by_chi",
    "chi",
    "gap_expected_amount",
    "gap_pmf",
    "b",
    "b_prime",
    "total_rate",
    "water_level",
    "build_linear_system",
    "solve_optimal",
    "verify_kkt",
    "core_size",
    "build_core",
    "tightness_instance",
    "homogeneous_prefix_value",
    "simulate",
    "sample_gap_distribution",
    "gap_tv_distance",
    "estimate_gap_amount",
    "HungryBatError",
    "DomainError",
    "LengthMismatchError",
    "InstanceValidationError",
    "EmptyInstanceError",
    "InvalidRateError",
    "InvalidStealProbError",
    "ConsistencyError",
]

__version__ = "0.1.0"
