"""Closed-form payoff quantities for a single cactus and for whole strategies.

Everything here is an exact formula: the long-run nectar level ``chi``, the
expected amount collected after a visit gap of ``x`` rounds, the distribution
of the gap straddling a random round, the per-round collection rate ``b`` as a
function of the visit probability, and its derivative.  These are the ground
truths that the solver optimizes and the Monte Carlo simulator is checked
against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import DomainError, LengthMismatchError

if TYPE_CHECKING:
    from .instance import Instance

__all__ = [
    "Strategy",
    "chi",
    "gap_expected_amount",
    "gap_pmf",
    "b",
    "b_prime",
    "total_rate",
]

#: Admissible deviation of a probability vector's total from 1.
PROB_SUM_TOL = 1e-12


def _check_rate(r: float) -> None:
    if not (math.isfinite(r) and r > 0.0):
        raise DomainError(f"nectar rate must be a finite positive real, got {r!r}")


def _check_steal_prob(s: float) -> None:
    if not (math.isfinite(s) and 0.0 < s < 1.0):
        raise DomainError(f"stealing probability must lie in (0, 1), got {s!r}")


def chi(r: float, s: float) -> float:
    """Asymptotic expected nectar held in a never-visited cactus: r(1-s)/s.

    Also the derivative of ``b`` at visit probability 0, which makes it the
    sort key for the cactus ordering used by the solver and the core builder.
    """
    _check_rate(r)
    _check_steal_prob(s)
    return r * (1.0 - s) / s


def gap_expected_amount(r: float, s: float, x: int) -> float:
    """Expected nectar collected by a visit that follows a gap of ``x`` rounds.

    Increases monotonically in ``x`` and saturates at ``chi(r, s)``.
    """
    _check_rate(r)
    _check_steal_prob(s)
    if x < 1:
        raise DomainError(f"gap length must be a positive number of rounds, got {x!r}")
    return (1.0 - s) / s * (1.0 - (1.0 - s) ** x) * r


def gap_pmf(p: float, x: int) -> float:
    """Probability that the visit gap straddling a fixed round has length ``x``.

    Under i.i.d. Bernoulli(p) visits a longer gap covers proportionally more
    rounds, so the straddling gap is the size-biased geometric
    ``x * p**2 * (1-p)**(x-1)``.
    """
    if not (math.isfinite(p) and 0.0 < p <= 1.0):
        raise DomainError(f"visit probability must lie in (0, 1], got {p!r}")
    if x < 1:
        raise DomainError(f"gap length must be a positive number of rounds, got {x!r}")
    return x * p * p * (1.0 - p) ** (x - 1)


def b(r: float, s: float, p: float) -> float:
    """Expected per-round nectar collected from one cactus visited w.p. ``p``.

    ``b(r, s, p) = r * p / (p + s/(1-s))``: increasing and strictly concave
    in ``p``, with ``b(r, s, 0) = 0``.
    """
    _check_rate(r)
    _check_steal_prob(s)
    if not (math.isfinite(p) and 0.0 <= p <= 1.0):
        raise DomainError(f"visit probability must lie in [0, 1], got {p!r}")
    return r * p / (p + s / (1.0 - s))


def b_prime(r: float, s: float, p: float) -> float:
    """Derivative of ``b`` in ``p``: r*a/(p+a)^2 with a = s/(1-s).

    Strictly positive and strictly decreasing on [0, 1].
    """
    _check_rate(r)
    _check_steal_prob(s)
    if not (math.isfinite(p) and 0.0 <= p <= 1.0):
        raise DomainError(f"visit probability must lie in [0, 1], got {p!r}")
    if p == 0.0:
        # At p=0 the derivative reduces to chi; return that form so solver
        # comparisons against chi are float-consistent.
        return r * (1.0 - s) / s
    a = s / (1.0 - s)
    return r * a / (p + a) ** 2


@dataclass(frozen=True)
class Strategy:
    """A purely-stochastic visiting strategy: one probability per cactus.

    The vector must sum to 1 within ``PROB_SUM_TOL``; entries must lie in
    [0, 1].  Immutable and safe to share between threads.
    """

    probs: tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(x) for x in self.probs)
        object.__setattr__(self, "probs", probs)
        if not probs:
            raise DomainError("strategy must have at least one entry")
        for i, p in enumerate(probs):
            if not (math.isfinite(p) and 0.0 <= p <= 1.0):
                raise DomainError(f"strategy entry {i + 1} must lie in [0, 1], got {p!r}")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise DomainError(
                f"strategy probabilities must sum to 1 within {PROB_SUM_TOL:g}, got {total!r}"
            )

    @property
    def n(self) -> int:
        return len(self.probs)

    def support(self) -> tuple[int, ...]:
        """Indices (0-based) of cacti visited with strictly positive probability."""
        return tuple(i for i, p in enumerate(self.probs) if p > 0.0)

    @classmethod
    def uniform(cls, n: int) -> "Strategy":
        if n < 1:
            raise DomainError(f"strategy length must be positive, got {n!r}")
        return cls((1.0 / n,) * n)

    @classmethod
    def point_mass(cls, n: int, index: int) -> "Strategy":
        if n < 1 or not 0 <= index < n:
            raise DomainError(f"point mass index {index!r} out of range for n={n!r}")
        probs = [0.0] * n
        probs[index] = 1.0
        return cls(tuple(probs))


def total_rate(inst: "Instance", strat: Strategy) -> float:
    """Total expected per-round collection: the sum of ``b`` over all cacti."""
    if strat.n != inst.n:
        raise LengthMismatchError(
            f"strategy has {strat.n} entries but instance has {inst.n} cacti"
        )
    return math.fsum(
        b(r, s, p) for r, s, p in zip(inst.rates, inst.steal_probs, strat.probs)
    )
