import math

import numpy as np
import pytest

from conftest import two_sample_hist
from record_election.coalescent import (
    StirlingTable,
    estimate_X1_limit,
    log_star_scaling_check,
    pmf_J,
    run_coalescent,
    sample_J,
    sample_X1_batch,
)
from record_election.election import sample_T_T0_batch
from record_election.numerics import modified_tetration
from record_election.stats import chi_square_gof, chi_square_two_sample


class TestStirlingTable:
    def test_known_values(self):
        t = StirlingTable(10)
        assert t.exact(1, 1) == 1
        assert t.exact(3, 2) == 3
        assert t.exact(4, 2) == 11
        assert t.exact(5, 3) == 35
        assert t.exact(9, 3) == 118124

    def test_row_identities(self):
        t = StirlingTable(40)
        for n in range(1, 41):
            assert sum(t.exact(n, k) for k in range(n + 1)) == math.factorial(n)
            assert t.exact(n, n) == 1
            assert t.exact(n, 1) == math.factorial(n - 1)
            assert t.exact(n, 0) == 0

    def test_log_rows_match_exact(self):
        # the log-domain recurrence must agree with big-int values past
        # the exact-table cap
        t = StirlingTable(64)
        exact_row = [0, 1]
        for n in range(1, 80):
            exact_row = ([0] +
                         [n * exact_row[k] + exact_row[k - 1]
                          for k in range(1, len(exact_row))] + [1])
        # exact_row is now row n = 80
        for k in (1, 5, 40, 80):
            got = t.log(80, k)
            want = math.log(exact_row[k])
            assert abs(got - want) < 1e-9


class TestPmfJ:
    def test_small_cases(self):
        # n=3: [3,1]=2, [3,2]=3, weights /(3!-1)
        assert abs(pmf_J(3, 1) - 0.4) < 1e-14
        assert abs(pmf_J(3, 2) - 0.6) < 1e-14

    def test_normalization(self):
        for theta in (0.5, 1.0, 2.0):
            for n in (2, 5, 12, 40, 120):
                s = sum(pmf_J(n, k, theta) for k in range(1, n))
                assert abs(s - 1.0) < 1e-10

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            pmf_J(5, 5)
        with pytest.raises(ValueError):
            pmf_J(5, 0)


class TestSampleJ:
    def test_matches_stirling_pmf(self, rng):
        n = 30000
        draws = np.bincount([sample_J(12, rng) for _ in range(n)],
                            minlength=12)[1:]
        want = [pmf_J(12, k) for k in range(1, 12)]
        assert chi_square_gof(draws, want).passed(0.01)

    def test_theta_variant(self, rng):
        n = 20000
        draws = np.bincount([sample_J(6, rng, theta=2.0) for _ in range(n)],
                            minlength=6)[1:]
        want = [pmf_J(6, k, 2.0) for k in range(1, 6)]
        assert chi_square_gof(draws, want).passed(0.01)

    def test_always_strictly_decreases(self, rng):
        for _ in range(500):
            assert sample_J(7, rng) < 7


class TestRunCoalescent:
    def test_trivial_cases(self, rng):
        assert run_coalescent(1, rng).collisions == 0
        assert all(run_coalescent(2, rng).collisions == 1 for _ in range(50))

    def test_path_strictly_decreasing(self, rng):
        for _ in range(100):
            chain = run_coalescent(30, rng)
            assert chain.path[0] == 30
            assert chain.path[-1] == 1
            assert all(b < a for a, b in zip(chain.path, chain.path[1:]))

    def test_tower_input(self, rng):
        chain = run_coalescent(modified_tetration(8, 2.0), rng)
        assert chain.path[-1] == 1
        assert chain.collisions >= 8

    def test_batch_matches_scalar(self, rng):
        n = 15000
        xb = sample_X1_batch(12, n, rng)
        xs = np.array([run_coalescent(12, rng).collisions for _ in range(n)])
        ha, hb = two_sample_hist(xb, xs)
        assert chi_square_two_sample(ha, hb).passed(0.01)


class TestBridge:
    def test_collisions_match_conclusive_rounds(self, rng):
        # X1(n) and T0(n) share one law (block mergers <-> conclusive rounds)
        n = 30000
        for m in (5, 20):
            x1 = sample_X1_batch(m, n, rng)
            _, t0 = sample_T_T0_batch(m, n, rng)
            ha, hb = two_sample_hist(x1, t0)
            assert chi_square_two_sample(ha, hb).passed(0.01)

    def test_theta_bridge(self, rng):
        n = 20000
        x1 = sample_X1_batch(8, n, rng, theta=2.0)
        _, t0 = sample_T_T0_batch(8, n, rng, theta=2.0)
        ha, hb = two_sample_hist(x1, t0)
        assert chi_square_two_sample(ha, hb).passed(0.01)


class TestLimitDiagnostics:
    def test_x1_shift_small_level(self, rng):
        # exp(exp(0)) = e: floor population 2, one forced merger
        shifts = estimate_X1_limit(0.0, 2, 200, rng)
        assert (shifts == -1).all()

    def test_log_star_scaling(self, rng):
        out = log_star_scaling_check([100, 10**5], rng, reps=400)
        for row in out:
            assert 0.4 <= row["ratio_mean"] <= 2.0

    def test_invalid_n(self, rng):
        with pytest.raises(ValueError):
            run_coalescent(0, rng)
