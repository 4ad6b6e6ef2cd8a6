"""Acceptance suite: one test per release criterion.

Each test prints one ``[acceptance N] PASS/FAIL`` line per criterion,
bypassing output capture, so a plain ``pytest tests/test_acceptance.py``
run shows every verdict.  The line is printed before asserting, so
failures still leave a readable summary.
"""

import json
import math
import subprocess
import sys
import time

import numpy as np

from hungrybat.core import build_core, tightness_instance
from hungrybat.instance import order_by_chi
from hungrybat.payoff import gap_expected_amount, total_rate
from hungrybat.simulator import (
    estimate_gap_amount,
    gap_tv_distance,
    sample_gap_distribution,
    simulate,
)
from hungrybat.solver import solve_optimal, water_level

from oracles import random_instance, random_strategy, simplex_grid_max


def _verdict(capsys, num: int, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    with capsys.disabled():
        print(f"\n[acceptance {num}] {status}: {detail}")
    assert ok, f"criterion {num} failed: {detail}"


def test_criterion_1_simulation_matches_closed_form(capsys):
    rng = np.random.default_rng(1001)
    start = time.time()
    hits = 0
    for config in range(20):
        inst = random_instance(rng)
        strat = random_strategy(rng, inst.n)
        est = simulate(inst, strat, rounds=10**6, seed=config, replications=8)
        if abs(est.total_rate - total_rate(inst, strat)) <= 3.0 * est.total_se:
            hits += 1
    elapsed = time.time() - start
    _verdict(
        capsys,
        1,
        hits >= 18 and elapsed <= 120.0,
        f"simulated total within 3 pooled se in {hits}/20 configs "
        f"(need >= 18) in {elapsed:.1f}s (limit 120s)",
    )


def test_criterion_2_gap_law_total_variation(capsys):
    distances = {}
    for p in (0.2, 0.5, 0.8):
        dist = sample_gap_distribution(p, 10**6, seed=2)
        assert dist.total >= 10**5
        distances[p] = gap_tv_distance(dist)
    worst = max(distances.values())
    _verdict(
        capsys,
        2,
        worst < 0.01,
        "empirical straddling-gap pmf vs x*p^2*(1-p)^(x-1): worst tv "
        f"{worst:.5f} over p in {{0.2, 0.5, 0.8}} (need < 0.01)",
    )


def test_criterion_3_gap_amount_estimates(capsys):
    stated = {1: 0.5, 2: 0.75, 5: 0.96875}
    ok = True
    details = []
    for x in (1, 2, 5, 30):
        mean, se = estimate_gap_amount(1.0, 0.5, x, replications=10**6, seed=3)
        exact = gap_expected_amount(1.0, 0.5, x)
        if x in stated:
            ok = ok and exact == stated[x]
        z = (mean - exact) / se
        ok = ok and abs(mean - exact) <= 3.0 * se
        details.append(f"x={x}: z={z:+.2f}")
    _verdict(
        capsys, 3, ok, "gap-amount means within 3 se of closed form (" + ", ".join(details) + ")"
    )


def test_criterion_4_solver_beats_grid_oracle(capsys):
    rng = np.random.default_rng(1004)
    start = time.time()
    ok = True
    worst_gap = 0.0
    for _ in range(200):
        inst = random_instance(rng, max_n=4)
        report = solve_optimal(inst)
        oracle_value, _ = simplex_grid_max(inst)
        worst_gap = min(worst_gap, report.value - oracle_value)
        ok = ok and report.value >= oracle_value - 1e-6 and report.kkt.passes
    elapsed = time.time() - start
    _verdict(
        capsys,
        4,
        ok and elapsed <= 60.0,
        f"200 instances: value >= lattice oracle - 1e-6 (worst slack {worst_gap:.2e}) "
        f"and certificate at 1e-9, in {elapsed:.1f}s (limit 60s)",
    )


def test_criterion_5_linear_system_agrees_with_closed_form(capsys):
    from hungrybat.solver import build_linear_system

    rng = np.random.default_rng(1005)
    worst = 0.0
    for _ in range(100):
        inst = random_instance(rng, max_n=10)
        report = solve_optimal(inst)
        ordered = order_by_chi(inst)
        ell = report.support_size
        matrix, rhs = build_linear_system(ordered, ell)
        solved = np.linalg.solve(matrix, rhs)
        _, closed = water_level(ordered, ell)
        worst = max(worst, float(np.max(np.abs(solved - closed))))
    _verdict(
        capsys,
        5,
        worst < 1e-10,
        f"100 solid prefixes: componentwise gap {worst:.2e} between linear "
        "system and closed form (need < 1e-10)",
    )


def test_criterion_6_support_is_prefix(capsys):
    rng = np.random.default_rng(1006)
    ok = True
    for _ in range(500):
        inst = random_instance(rng, max_n=50)
        report = solve_optimal(inst)
        ordered_probs = [report.strategy.probs[i] for i in report.perm]
        positives = [p > 0.0 for p in ordered_probs]
        ok = ok and positives == sorted(positives, reverse=True)
    _verdict(capsys, 6, ok, "optimal support is a chi-order prefix on 500 instances (n <= 50)")


def test_criterion_7_core_guarantee(capsys):
    rng = np.random.default_rng(1007)
    ok = True
    for _ in range(1000):
        inst = random_instance(rng, max_n=100, s_range=(0.05, 0.95))
        sigma = min(inst.steal_probs)
        for eps in (0.1, 0.3, 0.5):
            result = build_core(inst, eps)
            bound = math.ceil(2.0 * (1.0 - sigma) / (eps * sigma))
            ok = ok and result.ratio >= 1.0 - eps and result.k <= max(1, bound)
    _verdict(
        capsys,
        7,
        ok,
        "1000 instances x eps in {0.1, 0.3, 0.5}: ratio >= 1 - eps and "
        "k <= ceil(2(1-sigma)/(eps*sigma))",
    )


def test_criterion_8_tightness_separation(capsys):
    s, eps, n = 0.5, 0.1, 1000
    k = math.floor((1.0 - s) / (2.0 * eps * s) + 1e-9)
    core_value = solve_optimal(tightness_instance(k, s)).value
    opt_value = solve_optimal(tightness_instance(n, s)).value
    ratio = core_value / opt_value
    ok = (
        k == 5
        and round(core_value, 4) == 0.8333
        and round(opt_value, 6) == 0.999001
        and round(ratio, 4) == 0.8342
        and ratio < 0.9
    )
    _verdict(
        capsys,
        8,
        ok,
        f"homogeneous n=1000, s=0.5: size-5 core value {core_value:.4f} vs "
        f"optimum {opt_value:.6f}, ratio {ratio:.4f} < 0.9",
    )


def test_criterion_9_cli_byte_determinism(tmp_path, capsys):
    inst_path = tmp_path / "inst.json"
    inst_path.write_text(
        '{"cacti": [{"r": 2, "s": 0.5}, {"r": 1, "s": 0.5}, {"r": 0.5, "s": 0.3}]}'
    )
    commands = [
        ["validate", "--instance", str(inst_path)],
        ["solve", "--instance", str(inst_path), "--format", "csv"],
        ["core", "--instance", str(inst_path), "--epsilon", "0.3"],
        [
            "simulate", "--instance", str(inst_path), "--rounds", "30000",
            "--seed", "5", "--replications", "8", "--workers", "4",
        ],
        ["sweep", "--instance", str(inst_path)],
        ["tightness", "--n", "100", "--s", "0.5", "--epsilon", "0.1", "--epsilon", "0.3"],
    ]
    ok = True
    for i, cmd in enumerate(commands):
        outputs = []
        for attempt in ("a", "b"):
            out = tmp_path / f"{i}{attempt}.out"
            extra = ["--output", str(out)]
            if cmd[0] == "solve":
                extra += ["--plot", str(tmp_path / f"{i}{attempt}.png")]
            proc = subprocess.run(
                [sys.executable, "-m", "hungrybat", *cmd, *extra],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr
            outputs.append(out.read_bytes())
        ok = ok and outputs[0] == outputs[1]
    png_a = (tmp_path / "1a.png").read_bytes()
    png_b = (tmp_path / "1b.png").read_bytes()
    ok = ok and png_a == png_b and png_a[:8] == b"\x89PNG\r\n\x1a\n"
    _verdict(
        capsys,
        9,
        ok,
        "all six subcommands (parallel replications and figure included) "
        "reproduce byte-identical output files",
    )
