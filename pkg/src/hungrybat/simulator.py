"""Seeded Monte Carlo simulation of the foraging process.

Each round, every cactus fills by its rate, each is then emptied
independently with its steal probability, and finally the bat visits one
cactus drawn from its strategy and collects (and zeroes) that cactus's
content.  The simulator estimates per-round collection rates to validate
the closed forms in :mod:`hungrybat.payoff`.

Randomness derivation
---------------------
All draws come from PCG64 generators keyed by ``numpy`` seed sequences:
replication ``j`` of :func:`simulate` draws stealing events from
``SeedSequence(entropy=seed, spawn_key=(j, 0))`` and visit choices from
``SeedSequence(entropy=seed, spawn_key=(j, 1))``.  Keeping the two streams
separate means changing the strategy never perturbs the stealing sample
path for a fixed seed, so strategies can be A/B-compared on common random
numbers.  Results are identical for any worker count because replications
are independent and reduced in replication order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .instance import Instance
from .payoff import Strategy, gap_pmf
from . import payoff

__all__ = [
    "SimEstimate",
    "GapDistribution",
    "simulate",
    "sample_gap_distribution",
    "gap_tv_distance",
    "estimate_gap_amount",
    "STEAL_STREAM",
    "VISIT_STREAM",
]

#: Stream labels used in ``spawn_key=(replication, stream)``.
STEAL_STREAM = 0
VISIT_STREAM = 1

# Rounds simulated per vectorized block.  Fixed so that chunking never
# changes which uniform lands where; PCG64 fills arrays sequentially, so
# any fixed chunk size reproduces the single-shot draw.
_CHUNK_ROUNDS = 1 << 16


@dataclass(frozen=True)
class SimEstimate:
    """Per-round collection-rate estimates with between-replication errors.

    ``total_rate`` is exactly the sum of ``per_cactus_rate``.  Standard
    errors use the sample standard deviation across replications (0.0 when
    there is a single replication).
    """

    per_cactus_rate: tuple[float, ...]
    per_cactus_se: tuple[float, ...]
    total_rate: float
    total_se: float
    rounds: int
    seed: int
    replications: int


@dataclass(frozen=True)
class GapDistribution:
    """Empirical distribution of the visit gap straddling a uniform round.

    ``counts[x]`` is the number of sampled rounds whose straddling gap was
    ``x`` (keys start at 1); their sum equals ``total`` exactly.
    """

    counts: dict[int, int]
    total: int
    p: float
    seed: int

    def probabilities(self) -> dict[int, float]:
        return {x: c / self.total for x, c in sorted(self.counts.items())}


def _stream(seed: int, replication: int, label: int) -> np.random.Generator:
    key = np.random.SeedSequence(entropy=seed, spawn_key=(replication, label))
    return np.random.Generator(np.random.PCG64(key))


def _simulate_replication(
    inst: Instance, strat: Strategy, rounds: int, seed: int, replication: int
) -> np.ndarray:
    """Mean per-round collection for each cactus over one replication."""
    n = inst.n
    rates = np.asarray(inst.rates)
    steal_probs = np.asarray(inst.steal_probs)
    cum = np.cumsum(np.asarray(strat.probs))
    cum[-1] = 1.0

    steal_rng = _stream(seed, replication, STEAL_STREAM)
    visit_rng = _stream(seed, replication, VISIT_STREAM)

    collected = np.zeros(n)
    # Round index (1-based) of the last event that zeroed each cactus.
    last_visit = np.zeros(n, dtype=np.int64)
    last_steal = np.zeros(n, dtype=np.int64)

    base = 0
    while base < rounds:
        chunk = min(_CHUNK_ROUNDS, rounds - base)
        stolen = steal_rng.random((chunk, n)) < steal_probs
        visits = np.searchsorted(cum, visit_rng.random(chunk), side="right")
        for i in range(n):
            vrounds = base + 1 + np.nonzero(visits == i)[0]
            srounds = base + 1 + np.nonzero(stolen[:, i])[0]
            if vrounds.size:
                prev_visit = np.concatenate(([last_visit[i]], vrounds[:-1]))
                if srounds.size:
                    idx = np.searchsorted(srounds, vrounds, side="right") - 1
                    steal_before = np.where(
                        idx >= 0, srounds[np.maximum(idx, 0)], last_steal[i]
                    )
                else:
                    steal_before = np.full(vrounds.shape, last_steal[i])
                # Content at collection: rate times rounds since the last
                # zeroing event (a steal this round counts, a visit does not).
                last_zero = np.maximum(prev_visit, steal_before)
                collected[i] += rates[i] * float((vrounds - last_zero).sum())
                last_visit[i] = vrounds[-1]
            if srounds.size:
                last_steal[i] = srounds[-1]
        base += chunk
    return collected / rounds


def simulate(
    inst: Instance,
    strat: Strategy,
    rounds: int,
    seed: int = 0,
    replications: int = 8,
    workers: int | None = None,
) -> SimEstimate:
    """Estimate per-round collection rates under ``strat``.

    ``workers`` bounds the thread pool used to run replications in
    parallel; the estimate is byte-identical for every worker count.
    """
    if strat.n != inst.n:
        from .errors import LengthMismatchError

        raise LengthMismatchError(
            f"strategy has {strat.n} entries but instance has {inst.n} cacti"
        )
    if rounds < 1:
        raise DomainError(f"rounds must be at least 1, got {rounds!r}")
    if replications < 1:
        raise DomainError(f"replications must be at least 1, got {replications!r}")
    if workers is not None and workers < 1:
        raise DomainError(f"workers must be at least 1, got {workers!r}")

    reps = range(replications)
    if workers is None or workers == 1:
        rows = [_simulate_replication(inst, strat, rounds, seed, j) for j in reps]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(
                pool.map(
                    lambda j: _simulate_replication(inst, strat, rounds, seed, j), reps
                )
            )

    per_rep = np.vstack(rows)
    per_cactus = tuple(
        math.fsum(per_rep[:, i].tolist()) / replications for i in range(inst.n)
    )
    per_rep_total = [math.fsum(row.tolist()) for row in rows]

    def _se(samples: np.ndarray) -> float:
        if replications == 1:
            return 0.0
        return float(np.std(samples, ddof=1) / math.sqrt(replications))

    return SimEstimate(
        per_cactus_rate=per_cactus,
        per_cactus_se=tuple(_se(per_rep[:, i]) for i in range(inst.n)),
        total_rate=math.fsum(per_cactus),
        total_se=_se(np.asarray(per_rep_total)),
        rounds=rounds,
        seed=seed,
        replications=replications,
    )


def sample_gap_distribution(p: float, window: int, seed: int = 0) -> GapDistribution:
    """Empirical pmf of the straddling gap over a Bernoulli visit sequence.

    Simulates ``window`` rounds of independent visits with probability
    ``p`` and, for every round lying between the first and last visit,
    records the gap between the last visit strictly before it and the
    first visit at or after it.  A round between consecutive visits that
    are ``x`` apart sees gap ``x``, and there are exactly ``x`` such
    rounds, which is what tilts the geometric law by its length.
    """
    p = float(p)
    if not 0.0 < p < 1.0 or math.isnan(p):
        raise DomainError(f"visit probability must lie strictly between 0 and 1, got {p!r}")
    if window < 1:
        raise DomainError(f"window must be at least 1, got {window!r}")
    rng = _stream(seed, 0, VISIT_STREAM)
    visits = np.nonzero(rng.random(window) < p)[0]
    if visits.size < 2:
        raise DomainError(
            f"window {window} produced {visits.size} visits; need at least 2 to observe a gap"
        )
    gaps = np.diff(visits)
    weights = np.bincount(gaps, weights=gaps)
    counts = {int(x): int(weights[x]) for x in np.nonzero(weights)[0]}
    return GapDistribution(
        counts=counts, total=int(visits[-1] - visits[0]), p=p, seed=seed
    )


def gap_tv_distance(dist: GapDistribution) -> float:
    """Total variation distance between ``dist`` and the exact gap law.

    Mass the exact law puts beyond the largest observed gap is counted in
    full, so the distance is never understated.
    """
    theory_seen = []
    diffs = []
    for x, c in dist.counts.items():
        t = gap_pmf(dist.p, x)
        theory_seen.append(t)
        diffs.append(abs(c / dist.total - t))
    observed = set(dist.counts)
    for x in range(1, max(observed) + 1):
        if x not in observed:
            t = gap_pmf(dist.p, x)
            theory_seen.append(t)
            diffs.append(t)
    tail = max(0.0, 1.0 - math.fsum(theory_seen))
    return 0.5 * (math.fsum(diffs) + tail)


def estimate_gap_amount(
    r: float, s: float, x: int, replications: int, seed: int = 0
) -> tuple[float, float]:
    """Monte Carlo mean of the amount collected after a gap of ``x`` rounds.

    Each replication runs ``x`` fill-then-steal rounds on an initially
    empty cactus and collects the survivor.  Returns ``(mean, se)``; the
    mean matches ``gap_expected_amount(r, s, x)`` up to noise.
    """
    payoff._check_rate(r)
    payoff._check_steal_prob(s)
    if x < 1:
        raise DomainError(f"gap length must be at least 1, got {x!r}")
    if replications < 1:
        raise DomainError(f"replications must be at least 1, got {replications!r}")
    rng = _stream(seed, 0, STEAL_STREAM)

    total = 0.0
    total_sq = 0.0
    done = 0
    chunk_reps = max(1, _CHUNK_ROUNDS // x)
    while done < replications:
        m = min(chunk_reps, replications - done)
        stolen = rng.random((m, x)) < s
        # Content is rate times the run of steal-free rounds at the end of
        # the gap (the full gap if nothing was stolen).
        rev_first = stolen[:, ::-1].argmax(axis=1)
        survive = np.where(stolen.any(axis=1), rev_first, x)
        amounts = r * survive.astype(np.float64)
        total += float(amounts.sum())
        total_sq += float((amounts * amounts).sum())
        done += m

    mean = total / replications
    if replications == 1:
        return mean, 0.0
    var = max(0.0, (total_sq - replications * mean * mean) / (replications - 1))
    return mean, math.sqrt(var / replications)
