"""Figure rendering for CLI reports.

Every function saves a PNG to the given path and returns the path.  The
Agg backend is forced so rendering works headless, and figures carry no
timestamps, so a rerun with identical inputs writes identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .core import CoreResult
from .instance import Instance
from .payoff import chi
from .simulator import SimEstimate
from .solver import SolveReport

__all__ = [
    "save_solve_figure",
    "save_core_figure",
    "save_simulate_figure",
    "save_sweep_figure",
    "save_tightness_figure",
]

_DPI = 100


def _finish(fig, path: str) -> str:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_solve_figure(inst: Instance, report: SolveReport, path: str) -> str:
    """Optimal probabilities per cactus, with derivatives at 0 and the water level."""
    idx = np.arange(1, inst.n + 1)
    chis = [chi(r, s) for r, s in inst.cacti()]
    supported = [p > 0.0 for p in report.strategy.probs]
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    top.bar(idx, report.strategy.probs, color=["C0" if f else "C7" for f in supported])
    top.set_ylabel("visit probability")
    top.set_title(f"optimal strategy: support {report.support_size}, value {report.value:.6g}")
    bottom.scatter(idx, chis, color=["C0" if f else "C7" for f in supported])
    bottom.axhline(report.mu, color="C3", linestyle="--", label=f"water level {report.mu:.6g}")
    bottom.set_ylabel("derivative at 0")
    bottom.set_xlabel("cactus")
    bottom.legend()
    fig.tight_layout()
    return _finish(fig, path)


def save_core_figure(inst: Instance, result: CoreResult, path: str) -> str:
    """Core membership and the re-optimized strategy."""
    idx = np.arange(1, inst.n + 1)
    members = set(result.core)
    colors = ["C1" if i - 1 in members else "C7" for i in idx]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.bar(idx, result.core_strategy.probs, color=colors)
    ax.set_xlabel("cactus")
    ax.set_ylabel("visit probability")
    ax.set_title(
        f"core k={result.k} (eps={result.epsilon:g}): "
        f"ratio {result.ratio:.6g} >= {1 - result.epsilon:.6g}"
    )
    fig.tight_layout()
    return _finish(fig, path)


def save_simulate_figure(est: SimEstimate, predicted: list[float], path: str) -> str:
    """Estimated per-cactus rates with error bars against closed-form predictions."""
    idx = np.arange(1, len(est.per_cactus_rate) + 1)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.errorbar(
        idx,
        est.per_cactus_rate,
        yerr=[3 * se for se in est.per_cactus_se],
        fmt="o",
        capsize=3,
        label="simulated (3 se)",
    )
    ax.scatter(idx, predicted, marker="_", s=200, color="C3", label="closed form")
    ax.set_xlabel("cactus")
    ax.set_ylabel("per-round rate")
    ax.set_title(
        f"T={est.rounds}, seed={est.seed}, replications={est.replications}: "
        f"total {est.total_rate:.6g}"
    )
    ax.legend()
    fig.tight_layout()
    return _finish(fig, path)


def save_sweep_figure(rows: list[tuple[int, float, float, float]], path: str) -> str:
    """Core quality ratio as a function of core size."""
    ks = [row[0] for row in rows]
    ratios = [row[3] for row in rows]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(ks, ratios, marker="o")
    ax.set_xlabel("core size k")
    ax.set_ylabel("core value / optimal value")
    ax.set_ylim(0, 1.05)
    ax.set_title("value retained by top-k cores")
    fig.tight_layout()
    return _finish(fig, path)


def save_tightness_figure(
    rows: list[tuple[int, float, float, int, float, bool]], path: str
) -> str:
    """Achieved ratio of the threshold-size core against the 1-eps target."""
    eps = [row[2] for row in rows]
    ratios = [row[4] for row in rows]
    targets = [1 - e for e in eps]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ax.plot(eps, ratios, marker="o", label="ratio at k_bound")
    ax.plot(eps, targets, marker="x", linestyle="--", color="C3", label="1 - eps")
    ax.set_xlabel("eps")
    ax.set_ylabel("ratio")
    ax.set_title(f"homogeneous tightness family (n={rows[0][0]}, s={rows[0][1]:g})")
    ax.legend()
    fig.tight_layout()
    return _finish(fig, path)
