import math

import numpy as np
import pytest
from hypothesis import given, settings

from hungrybat.errors import DomainError, LengthMismatchError
from hungrybat.instance import order_by_chi, validate_instance
from hungrybat.payoff import Strategy, total_rate
from hungrybat.solver import (
    KKT_TOL,
    build_linear_system,
    solve_optimal,
    verify_kkt,
    water_level,
)

from generators import instances
from oracles import grid_best_two, random_instance, simplex_grid_max


class TestWaterLevel:
    def test_symmetric_pair(self):
        ordered = order_by_chi(validate_instance([(1.0, 0.5), (1.0, 0.5)]))
        mu, p = water_level(ordered, 2)
        assert mu == pytest.approx(4.0 / 9.0, abs=1e-15)
        assert p == pytest.approx([0.5, 0.5], abs=1e-15)

    def test_asymmetric_pair_against_dense_grid(self):
        inst = validate_instance([(2.0, 0.5), (1.0, 0.5)])
        ordered = order_by_chi(inst)
        mu, p = water_level(ordered, 2)
        # independent 1e-6 grid over the 2-cactus objective
        grid_value, grid_p1 = grid_best_two(inst)
        assert abs(p[0] - grid_p1) < 2e-6
        assert mu == pytest.approx(((1.0 + math.sqrt(2.0)) / 3.0) ** 2, abs=1e-12)
        assert math.fsum(p.tolist()) == pytest.approx(1.0, abs=1e-15)
        value = total_rate(inst, Strategy(tuple(p)))
        assert value >= grid_value - 1e-9

    @pytest.mark.parametrize("ell", [0, 3, -1])
    def test_rejects_bad_prefix_length(self, ell):
        ordered = order_by_chi(validate_instance([(1.0, 0.5), (1.0, 0.5)]))
        with pytest.raises(DomainError):
            water_level(ordered, ell)


class TestBuildLinearSystem:
    def test_symmetric_pair_system(self):
        ordered = order_by_chi(validate_instance([(1.0, 0.5), (1.0, 0.5)]))
        matrix, rhs = build_linear_system(ordered, 2)
        assert matrix.tolist() == [[1.0, -1.0], [1.0, 1.0]]
        assert rhs.tolist() == [0.0, 1.0]
        assert np.linalg.solve(matrix, rhs) == pytest.approx([0.5, 0.5])

    def test_last_row_is_normalization(self):
        ordered = order_by_chi(validate_instance([(2.0, 0.3), (1.0, 0.6), (5.0, 0.8)]))
        matrix, rhs = build_linear_system(ordered, 3)
        assert matrix[-1].tolist() == [1.0, 1.0, 1.0]
        assert rhs[-1] == 1.0

    def test_sign_pattern(self):
        ordered = order_by_chi(validate_instance([(2.0, 0.3), (1.0, 0.6), (5.0, 0.8), (0.4, 0.2)]))
        ell = 4
        matrix, _ = build_linear_system(ordered, ell)
        for i in range(ell - 1):
            for j in range(ell):
                if j == i:
                    assert matrix[i, j] > 0.0
                elif j == i + 1:
                    assert matrix[i, j] < 0.0
                else:
                    assert matrix[i, j] == 0.0
        assert all(v > 0.0 for v in matrix[ell - 1])

    def test_agrees_with_water_level_on_solid_prefixes(self):
        rng = np.random.default_rng(2024)
        for _ in range(25):
            inst = random_instance(rng, max_n=8)
            report = solve_optimal(inst)
            ordered = order_by_chi(inst)
            ell = max(1, report.support_size)
            matrix, rhs = build_linear_system(ordered, ell)
            solved = np.linalg.solve(matrix, rhs)
            _, closed = water_level(ordered, ell)
            assert np.max(np.abs(solved - closed)) < 1e-10

    def test_rejects_bad_prefix_length(self):
        ordered = order_by_chi(validate_instance([(1.0, 0.5)]))
        with pytest.raises(DomainError):
            build_linear_system(ordered, 2)


class TestSolveOptimal:
    def test_identical_cacti_give_uniform(self):
        for n in (1, 2, 3, 7):
            inst = validate_instance([(2.0, 0.3)] * n)
            report = solve_optimal(inst)
            assert report.strategy.probs == pytest.approx([1.0 / n] * n, abs=1e-15)
            assert report.support_size == n

    def test_weak_cactus_dropped(self):
        inst = validate_instance([(10.0, 0.5), (0.01, 0.9)])
        report = solve_optimal(inst)
        assert report.strategy.probs == (1.0, 0.0)
        assert report.support_size == 1
        # grid search over the 2-cactus objective confirms the corner
        _, grid_p1 = grid_best_two(inst)
        assert grid_p1 == 1.0

    def test_boundary_equality_excludes(self):
        # chi_2 = 1 equals mu_1 = 1 exactly; the strict test fails
        inst = validate_instance([(4.0, 0.5), (1.0, 0.5)])
        report = solve_optimal(inst)
        assert report.strategy.probs == (1.0, 0.0)
        assert report.support_size == 1
        assert report.mu == 1.0
        _, grid_p1 = grid_best_two(inst)
        assert grid_p1 == 1.0

    def test_boundary_with_tied_excluded_cacti(self):
        inst = validate_instance([(4.0, 0.5), (1.0, 0.5), (1.0, 0.5)])
        report = solve_optimal(inst)
        assert report.strategy.probs == (1.0, 0.0, 0.0)
        value, _ = simplex_grid_max(inst)
        assert report.value >= value - 1e-6

    def test_report_value_matches_total_rate_exactly(self):
        inst = validate_instance([(2.0, 0.5), (1.0, 0.5), (0.3, 0.8)])
        report = solve_optimal(inst)
        assert report.value == total_rate(inst, report.strategy)

    def test_support_is_prefix_of_perm(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            inst = random_instance(rng, max_n=12)
            report = solve_optimal(inst)
            positions = [report.perm.index(i) for i in report.strategy.support()]
            assert sorted(positions) == list(range(report.support_size))

    def test_matches_simplex_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            inst = random_instance(rng, max_n=4)
            report = solve_optimal(inst)
            oracle_value, oracle_p = simplex_grid_max(inst)
            assert report.value >= oracle_value - 1e-6
            assert np.max(np.abs(np.asarray(report.strategy.probs) - oracle_p)) < 2e-4

    def test_uniqueness_probe(self):
        # shifting mass between any support pair strictly lowers the value
        inst = validate_instance([(2.0, 0.5), (1.0, 0.5), (1.5, 0.3)])
        report = solve_optimal(inst)
        support = report.strategy.support()
        delta = 1e-3
        for src in support:
            for dst in support:
                if src == dst:
                    continue
                probs = list(report.strategy.probs)
                if probs[src] < delta:
                    continue
                probs[src] -= delta
                probs[dst] += delta
                total = math.fsum(probs)
                perturbed = Strategy(tuple(x / total for x in probs))
                assert total_rate(inst, perturbed) < report.value

    def test_scale_equivariance(self):
        rng = np.random.default_rng(13)
        for _ in range(20):
            inst = random_instance(rng, max_n=6)
            c = float(rng.uniform(0.2, 50.0))
            scaled = validate_instance([(c * r, s) for r, s in inst.cacti()])
            base = solve_optimal(inst)
            other = solve_optimal(scaled)
            assert np.allclose(base.strategy.probs, other.strategy.probs, atol=1e-12)
            assert other.value == pytest.approx(c * base.value, rel=1e-12)
            assert base.support_size == other.support_size

    @given(instances(max_n=10))
    @settings(max_examples=150, deadline=None)
    def test_kkt_passes_and_support_is_prefix(self, inst):
        report = solve_optimal(inst)
        assert report.kkt.passes
        ordered_probs = [report.strategy.probs[i] for i in report.perm]
        seen_zero = False
        for p in ordered_probs:
            if p == 0.0:
                seen_zero = True
            else:
                assert not seen_zero


class TestVerifyKkt:
    def test_solver_output_passes(self):
        inst = validate_instance([(2.0, 0.5), (1.0, 0.5)])
        report = solve_optimal(inst)
        cert = verify_kkt(inst, report.strategy, KKT_TOL)
        assert cert.passes
        assert cert.tolerance == 1e-9

    def test_uniform_on_asymmetric_fails(self):
        inst = validate_instance([(2.0, 0.5), (1.0, 0.5)])
        cert = verify_kkt(inst, Strategy.uniform(2), KKT_TOL)
        assert not cert.passes
        assert cert.max_derivative_spread_on_support == pytest.approx(
            2.0 / 1.5**2 - 1.0 / 1.5**2, abs=1e-12
        )

    def test_off_support_excess_detected(self):
        inst = validate_instance([(1.0, 0.5), (1.0, 0.5)])
        cert = verify_kkt(inst, Strategy.point_mass(2, 0), KKT_TOL)
        assert not cert.passes
        assert cert.max_off_support_excess == pytest.approx(1.0 - 0.25, abs=1e-12)
        assert cert.max_derivative_spread_on_support == 0.0

    def test_length_mismatch(self):
        inst = validate_instance([(1.0, 0.5)])
        with pytest.raises(LengthMismatchError):
            verify_kkt(inst, Strategy((0.5, 0.5)), KKT_TOL)
