"""Hungry-bat instances and the chi-descending cactus ordering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import math

from . import payoff
from .errors import (
    DomainError,
    EmptyInstanceError,
    InvalidRateError,
    InvalidStealProbError,
    InstanceValidationError,
)

__all__ = [
    "Instance",
    "OrderedInstance",
    "validate_instance",
    "order_by_chi",
    "instance_from_json",
    "instance_to_json",
]


@dataclass(frozen=True)
class Instance:
    """An instance of the foraging problem: n cacti with rates and steal probabilities.

    Construct through :func:`validate_instance` (or :meth:`from_pairs`) so the
    parameter ranges are checked.  Immutable; cacti keep their input order.
    """

    rates: tuple[float, ...]
    steal_probs: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.rates)

    def cacti(self) -> list[tuple[float, float]]:
        """(r, s) pairs in original order."""
        return list(zip(self.rates, self.steal_probs))

    def restrict(self, indices: Sequence[int]) -> "Instance":
        """Sub-instance over the given 0-based cactus indices, in the given order."""
        return Instance(
            rates=tuple(self.rates[i] for i in indices),
            steal_probs=tuple(self.steal_probs[i] for i in indices),
        )

    @classmethod
    def from_pairs(cls, raw: Iterable[tuple[float, float]]) -> "Instance":
        return validate_instance(raw)


def validate_instance(raw: Iterable[tuple[float, float]]) -> Instance:
    """Validate (r, s) pairs and build an :class:`Instance`.

    Raises :class:`EmptyInstanceError` for an empty list,
    :class:`InvalidRateError` / :class:`InvalidStealProbError` naming the
    first offending cactus (1-based) otherwise.
    """
    pairs = list(raw)
    if not pairs:
        raise EmptyInstanceError("instance must contain at least one cactus")
    rates: list[float] = []
    steals: list[float] = []
    for i, (r, s) in enumerate(pairs, start=1):
        r = float(r)
        s = float(s)
        if not (math.isfinite(r) and r > 0.0):
            raise InvalidRateError(
                f"cactus {i}: nectar rate must be a finite positive real, got {r!r}",
                index=i,
            )
        if not (math.isfinite(s) and 0.0 < s < 1.0):
            raise InvalidStealProbError(
                f"cactus {i}: stealing probability must lie in (0, 1), got {s!r}",
                index=i,
            )
        rates.append(r)
        steals.append(s)
    return Instance(rates=tuple(rates), steal_probs=tuple(steals))


@dataclass(frozen=True)
class OrderedInstance:
    """An instance together with its chi-descending cactus order.

    ``perm[j]`` is the original (0-based) index of the cactus in position j;
    ``chi[j]`` is that cactus's chi value.  Ties are broken by ascending
    original index, so the ordering is stable and reproducible.
    """

    base: Instance
    perm: tuple[int, ...]
    chi: tuple[float, ...]

    @property
    def n(self) -> int:
        return self.base.n

    def ordered_rates(self) -> tuple[float, ...]:
        return tuple(self.base.rates[i] for i in self.perm)

    def ordered_steal_probs(self) -> tuple[float, ...]:
        return tuple(self.base.steal_probs[i] for i in self.perm)

    def inverse_perm(self) -> tuple[int, ...]:
        """Position of each original cactus in the chi-descending order."""
        inv = [0] * len(self.perm)
        for pos, orig in enumerate(self.perm):
            inv[orig] = pos
        return tuple(inv)


def order_by_chi(inst: Instance) -> OrderedInstance:
    """Sort cacti by chi = r(1-s)/s descending, stable on ties."""
    chis = [payoff.chi(r, s) for r, s in zip(inst.rates, inst.steal_probs)]
    perm = sorted(range(inst.n), key=lambda i: (-chis[i], i))
    return OrderedInstance(
        base=inst,
        perm=tuple(perm),
        chi=tuple(chis[i] for i in perm),
    )


def instance_from_json(text: str) -> Instance:
    """Parse the instance JSON schema ``{"cacti": [{"r": ..., "s": ...}, ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceValidationError(f"instance file is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "cacti" not in data:
        raise InstanceValidationError('instance JSON must be an object with a "cacti" list')
    cacti = data["cacti"]
    if not isinstance(cacti, list):
        raise InstanceValidationError('"cacti" must be a list of {"r": ..., "s": ...} objects')
    pairs = []
    for i, entry in enumerate(cacti, start=1):
        if not isinstance(entry, dict) or "r" not in entry or "s" not in entry:
            raise InstanceValidationError(
                f'cactus {i}: each entry must be an object with numeric "r" and "s"',
                index=i,
            )
        try:
            pairs.append((float(entry["r"]), float(entry["s"])))
        except (TypeError, ValueError) as exc:
            raise InstanceValidationError(
                f'cactus {i}: "r" and "s" must be numbers', index=i
            ) from exc
    return validate_instance(pairs)


def instance_to_json(inst: Instance) -> str:
    """Serialize an instance to the JSON schema accepted by :func:`instance_from_json`."""
    return json.dumps(
        {"cacti": [{"r": r, "s": s} for r, s in inst.cacti()]}, indent=2
    )
