import math

import numpy as np
import pytest

from conftest import two_sample_hist
from record_election.election import (
    ElectionTrace,
    expected_T_exact,
    leader_election_statistic,
    run_election_exact,
    run_election_tower,
    sample_T_T0_batch,
)
from record_election.numerics import TowerReal, log_star, modified_tetration
from record_election.records import RecordSamplerConfig
from record_election.stats import (
    EmpiricalDist,
    chi_square_gof,
    chi_square_two_sample,
    mean_ci,
)


class TestExactElection:
    def test_single_player(self, rng):
        tr = run_election_exact(1, rng)
        assert tr.T == 1
        assert tr.T0 == 0
        assert tr.rounds[-1].population_after.floor_int() == 1

    def test_two_players_geometric(self, rng):
        # T(2) ~ 1 + Geometric(1/2): mean 2; T0(2) = 1 always
        n = 20000
        T, T0 = sample_T_T0_batch(2, n, rng)
        lo, hi = mean_ci(EmpiricalDist(T), 0.999)
        assert lo <= 2.0 <= hi
        assert (T0 == 1).all()

    def test_populations_nonincreasing(self, rng):
        for _ in range(100):
            tr = run_election_exact(50, rng)
            pops = [r.population_after.floor_int() for r in tr.rounds]
            assert all(b <= a for a, b in zip(pops, pops[1:]))
            assert pops[-1] == 1

    def test_conclusive_flags(self, rng):
        for _ in range(100):
            tr = run_election_exact(20, rng)
            pops = [20] + [r.population_after.floor_int() for r in tr.rounds]
            for before, after, rec in zip(pops, pops[1:], tr.rounds):
                assert rec.conclusive == (after < before)
        assert tr.T0 <= tr.T

    def test_markov_chain_oracle(self, rng):
        # independent analytic mean via the one-round transition kernel
        assert expected_T_exact(1) == 1.0
        assert abs(expected_T_exact(2) - 2.0) < 1e-12
        n = 30000
        T, _ = sample_T_T0_batch(10, n, rng)
        lo, hi = mean_ci(EmpiricalDist(T), 0.999)
        assert lo <= expected_T_exact(10) <= hi

    def test_batch_matches_scalar(self, rng):
        n = 15000
        Tb, T0b = sample_T_T0_batch(12, n, rng)
        scal = [run_election_exact(12, rng, keep_labels=False)
                for _ in range(n)]
        Ts = np.array([t.T for t in scal])
        T0s = np.array([t.T0 for t in scal])
        ha, hb = two_sample_hist(Tb, Ts)
        assert chi_square_two_sample(ha, hb).passed(0.01)
        ha, hb = two_sample_hist(T0b, T0s)
        assert chi_square_two_sample(ha, hb).passed(0.01)

    def test_inconclusive_round_probability(self, rng):
        # all k players survive with probability 1/k!
        n = 30000
        for k in (2, 3, 4):
            stuck = sum(
                run_election_exact(k, rng, keep_labels=False).rounds[0]
                .population_after.floor_int() == k
                for _ in range(n)
            )
            p = 1.0 / math.factorial(k)
            assert chi_square_gof([n - stuck, stuck], [1 - p, p]).passed(0.01)

    def test_theta_variant_runs(self, rng):
        cfg = RecordSamplerConfig(theta=2.0)
        tr = run_election_exact(30, rng, cfg)
        assert tr.T >= 1
        assert tr.rounds[-1].population_after.floor_int() == 1

    def test_invalid_population(self, rng):
        with pytest.raises(ValueError):
            run_election_exact(0, rng)


class TestLabels:
    def test_player_one_always_survives(self, rng):
        for _ in range(100):
            tr = run_election_exact(25, rng)
            for ls in tr.survivor_labels:
                assert ls[0] == 1

    def test_labels_nested_and_sized(self, rng):
        for _ in range(200):
            tr = run_election_exact(40, rng)
            labels = tr.survivor_labels
            pops = [r.population_after.floor_int() for r in tr.rounds]
            assert [len(ls) for ls in labels] == pops
            for a, b in zip(labels, labels[1:]):
                assert set(b) <= set(a)

    def test_survivor_duality(self, rng):
        # k-th survivor of round one is the k-th record time: within the
        # first j players there are >= k survivors iff label_k <= j
        n = 20000
        pos2 = [run_election_exact(10**6, rng, label_rounds=1)
                .survivor_labels[0] for _ in range(n)]
        second = np.array([ls[1] if len(ls) > 1 else 10**6 + 1 for ls in pos2])
        kmax = 50
        cnt = np.bincount(np.minimum(second, kmax + 1), minlength=kmax + 2)[2:]
        probs = [1.0 / ((k - 1) * k) for k in range(2, kmax + 1)]
        probs.append(1.0 - sum(probs))
        assert chi_square_gof(cnt, probs).passed(0.01)

    def test_label_rounds_limit(self, rng):
        tr = run_election_exact(100, rng, label_rounds=2)
        assert len(tr.survivor_labels) <= 2


class TestTraceSerialization:
    def test_round_trip(self, rng):
        tr = run_election_exact(30, rng)
        back = ElectionTrace.from_json(tr.to_json())
        assert back.T == tr.T
        assert back.T0 == tr.T0
        assert back.survivor_labels == tr.survivor_labels
        assert back.initial_population == tr.initial_population

    def test_tower_round_trip(self, rng):
        tr = run_election_tower(modified_tetration(5, 2.0), rng)
        back = ElectionTrace.from_json(tr.to_json())
        assert back.T == tr.T
        assert [r.exact for r in back.rounds] == [r.exact for r in tr.rounds]


class TestTowerElection:
    def test_surrogate_rounds_flagged(self, rng):
        tr = run_election_tower(modified_tetration(8, 2.0), rng)
        assert not tr.rounds[0].exact
        assert tr.rounds[-1].exact
        assert tr.rounds[-1].population_after.floor_int() == 1
        # the hybrid descends one tower level per surrogate round
        inexact = sum(1 for r in tr.rounds if not r.exact)
        assert inexact >= 5

    def test_small_input_is_exact(self, rng):
        tr = run_election_tower(100, rng)
        assert all(r.exact for r in tr.rounds)

    def test_theta_rejected_at_tower_scale(self, rng):
        with pytest.raises(ValueError):
            run_election_tower(modified_tetration(8, 2.0), rng,
                               RecordSamplerConfig(theta=2.0))

    def test_statistic_fields(self, rng):
        s = leader_election_statistic(10**4, rng)
        assert s.shift == s.T - s.log_star_M
        assert s.log_star_M == log_star(10.0**4)
        assert s.T0 <= s.T

    def test_statistic_tower_input(self, rng):
        M = modified_tetration(12, 2.0)
        s = leader_election_statistic(M, rng)
        assert s.log_star_M == log_star(M)
        assert abs(s.ratio - s.T / s.log_star_M) < 1e-12


class TestDomination:
    def test_T_minus_T0_mean_bound(self, rng):
        # E[T - T0] is at most sum 1/(k!-1), uniformly in the population
        bound = sum(1.0 / (math.factorial(k) - 1) for k in range(2, 40))
        n = 20000
        T, T0 = sample_T_T0_batch(10**4, n, rng)
        diff = (T - T0).astype(float)
        se = diff.std(ddof=1) / math.sqrt(n)
        assert diff.mean() <= bound + 3 * se

    def test_T0_monotone_mean_in_M(self, rng):
        n = 20000
        means = []
        for M in (10, 100, 1000):
            _, T0 = sample_T_T0_batch(M, n, rng)
            means.append(T0.mean())
        assert means[0] < means[1] < means[2] + 0.05
