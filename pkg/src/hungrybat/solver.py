"""Construction of the unique optimal strategy.

The objective ``sum_i b_i(p_i)`` is strictly concave on the probability
simplex, so a strategy is optimal exactly when every supported cactus has the
same derivative ``b'_i(p_i)`` (the water level ``mu``) and no unsupported
cactus has a larger derivative at 0.  After sorting cacti by ``chi`` the
optimal support is always a prefix, which yields an incremental algorithm:

1. Start with the prefix of length 1 (all mass on the top-chi cactus).
2. Given the optimal strategy of the length-``l`` prefix with water level
   ``mu_l``, admit cactus ``l+1`` iff ``chi_{l+1} > mu_l`` (strictly).
3. On the first failure, pad the current prefix strategy with zeros.

For a prefix known to be solid (full interior support) the equal-derivative
conditions invert in closed form: ``p_i = sqrt(r_i a_i / mu) - a_i`` with
``a_i = s_i/(1-s_i)``, and the normalization ``sum p_i = 1`` pins
``sqrt(1/mu) = (1 + sum a_i) / sum sqrt(r_i a_i)``.  The equivalent banded
linear system is kept as a cross-checking oracle, not the production path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DomainError
from .instance import Instance, OrderedInstance, order_by_chi
from .payoff import Strategy, b_prime, total_rate

__all__ = [
    "KktCertificate",
    "SolveReport",
    "water_level",
    "build_linear_system",
    "solve_optimal",
    "verify_kkt",
    "KKT_TOL",
]

#: Default tolerance for the optimality certificate.
KKT_TOL = 1e-9

# Most negative prefix probability tolerated as rounding noise before
# clamping; anything below this is an internal inconsistency.
_CLAMP_TOL = -1e-12


@dataclass(frozen=True)
class KktCertificate:
    """Numerical optimality certificate for a strategy.

    ``max_derivative_spread_on_support`` is the gap between the largest and
    smallest supported derivative; ``max_off_support_excess`` is how far any
    unsupported cactus's derivative at 0 exceeds the support level (clamped
    at 0).  Both are measured relative to the water level when it exceeds 1,
    so large-rate instances are judged at their own scale.
    """

    max_derivative_spread_on_support: float
    max_off_support_excess: float
    tolerance: float

    @property
    def passes(self) -> bool:
        return (
            self.max_derivative_spread_on_support <= self.tolerance
            and self.max_off_support_excess <= self.tolerance
        )


@dataclass(frozen=True)
class SolveReport:
    """Optimal strategy plus the evidence for its optimality.

    ``strategy`` is in original cactus order; ``perm`` is the chi-descending
    order (0-based original indices) under which the support is the prefix of
    length ``support_size``; ``mu`` is the common supported derivative.
    """

    strategy: Strategy
    support_size: int
    mu: float
    value: float
    perm: tuple[int, ...]
    kkt: KktCertificate


def _prefix_arrays(ordered: OrderedInstance) -> tuple[np.ndarray, np.ndarray]:
    """Per-cactus a = s/(1-s) and sqrt(r*a) in chi order."""
    r = np.asarray(ordered.ordered_rates())
    s = np.asarray(ordered.ordered_steal_probs())
    a = s / (1.0 - s)
    return a, np.sqrt(r * a)


def water_level(ordered: OrderedInstance, ell: int) -> tuple[float, np.ndarray]:
    """Closed-form water level and probabilities for the prefix of length ``ell``.

    Returns ``(mu, p)`` where ``p`` has length ``ell``, sums to 1, and
    every supported derivative equals ``mu`` up to rounding.  Positivity of
    ``p`` is not checked here: callers must only request prefixes that are
    solid (which :func:`solve_optimal` guarantees by its admission test).
    """
    if not 1 <= ell <= ordered.n:
        raise DomainError(f"prefix length must lie in [1, {ordered.n}], got {ell!r}")
    a, sqrt_ra = _prefix_arrays(ordered)
    a = a[:ell]
    sqrt_ra = sqrt_ra[:ell]
    inv_sqrt_mu = float((1.0 + a.sum()) / sqrt_ra.sum())
    mu = 1.0 / (inv_sqrt_mu * inv_sqrt_mu)
    p = sqrt_ra * inv_sqrt_mu - a
    p = p / math.fsum(p.tolist())
    return mu, p


def build_linear_system(ordered: OrderedInstance, ell: int) -> tuple[np.ndarray, np.ndarray]:
    """Equal-derivative equations for a solid prefix as a linear system.

    Row ``i`` (0-based, i < ell-1) encodes equality of the derivatives of
    consecutive cacti:

        sqrt(r_{i+1} a_{i+1}) p_i - sqrt(r_i a_i) p_{i+1}
            = a_{i+1} sqrt(r_i a_i) - a_i sqrt(r_{i+1} a_{i+1})

    and the last row is the normalization ``sum p = 1``.  Solving it must
    reproduce :func:`water_level` on every solid prefix; it exists as an
    independent oracle for that closed form.
    """
    if not 1 <= ell <= ordered.n:
        raise DomainError(f"prefix length must lie in [1, {ordered.n}], got {ell!r}")
    a, sqrt_ra = _prefix_arrays(ordered)
    matrix = np.zeros((ell, ell))
    rhs = np.zeros(ell)
    for i in range(ell - 1):
        matrix[i, i] = sqrt_ra[i + 1]
        matrix[i, i + 1] = -sqrt_ra[i]
        rhs[i] = a[i + 1] * sqrt_ra[i] - a[i] * sqrt_ra[i + 1]
    matrix[ell - 1, :] = 1.0
    rhs[ell - 1] = 1.0
    return matrix, rhs


def solve_optimal(inst: Instance, kkt_tol: float = KKT_TOL) -> SolveReport:
    """Compute the unique optimal strategy for ``inst``.

    Runs the incremental prefix algorithm over the chi-descending order and
    certifies the result with :func:`verify_kkt`.
    """
    ordered = order_by_chi(inst)
    n = inst.n
    a, sqrt_ra = _prefix_arrays(ordered)
    chi_arr = np.asarray(ordered.chi)

    # mu_l for every prefix, via running sums; the admission test for cactus
    # l+1 is chi_{l+1} > mu_l, strictly (equality adds only zero-mass cacti).
    cum_a = np.cumsum(a)
    cum_sqrt_ra = np.cumsum(sqrt_ra)
    mu_all = (cum_sqrt_ra / (1.0 + cum_a)) ** 2
    failed = np.nonzero(~(chi_arr[1:] > mu_all[:-1]))[0]
    ell = int(failed[0]) + 1 if failed.size else n

    mu, prefix = water_level(ordered, ell)
    if prefix.min() < _CLAMP_TOL:
        raise ConsistencyError(
            f"prefix probability {prefix.min()!r} below rounding tolerance on a solid prefix"
        )
    if prefix.min() < 0.0:
        prefix = np.maximum(prefix, 0.0)
        prefix = prefix / math.fsum(prefix.tolist())

    probs = [0.0] * n
    for j in range(ell):
        probs[ordered.perm[j]] = float(prefix[j])
    strategy = Strategy(tuple(probs))

    support_size = sum(1 for p in prefix if p > 0.0)
    if support_size != ell:
        # Clamping may zero the marginal cactus; the support must still be a
        # prefix of the chi order or the solve is inconsistent.
        if any(prefix[j] == 0.0 for j in range(support_size)):
            raise ConsistencyError("zero probability inside the solid prefix")

    return SolveReport(
        strategy=strategy,
        support_size=support_size,
        mu=float(mu),
        value=total_rate(inst, strategy),
        perm=ordered.perm,
        kkt=verify_kkt(inst, strategy, kkt_tol),
    )


def verify_kkt(inst: Instance, strat: Strategy, tol: float = KKT_TOL) -> KktCertificate:
    """Measure how far ``strat`` is from satisfying the optimality conditions."""
    if strat.n != inst.n:
        from .errors import LengthMismatchError

        raise LengthMismatchError(
            f"strategy has {strat.n} entries but instance has {inst.n} cacti"
        )
    support_derivs = []
    off_derivs = []
    for r, s, p in zip(inst.rates, inst.steal_probs, strat.probs):
        if p > 0.0:
            support_derivs.append(b_prime(r, s, p))
        else:
            off_derivs.append(b_prime(r, s, 0.0))
    mu_hat = max(support_derivs)
    spread = mu_hat - min(support_derivs)
    excess = max(0.0, max(off_derivs) - mu_hat) if off_derivs else 0.0
    scale = mu_hat if mu_hat > 1.0 else 1.0
    return KktCertificate(
        max_derivative_spread_on_support=spread / scale,
        max_off_support_excess=excess / scale,
        tolerance=tol,
    )
