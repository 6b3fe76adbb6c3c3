import math

import numpy as np
import pytest

from conftest import two_sample_hist
from record_election.coalescent import estimate_X1_limit
from record_election.limits import (
    check_fixed_point_psi,
    estimate_N_star,
    estimate_S_star_cdf,
    estimate_spacings,
    estimate_T0_star_pmf,
    estimate_T_star_pmf,
    estimate_T_tilde_star,
    forward_second_survivor,
    iterlog_grid,
    sample_S2_star,
    sample_S_star,
    sample_S_star_batch,
)
from record_election.numerics import conjugacy_f, modified_iterlog
from record_election.rng import make_rng
from record_election.stats import (
    EmpiricalDist,
    chi_square_two_sample,
    ks_two_sample,
)


class TestBackwardIteration:
    def test_joint_sample_structure(self, rng):
        out = sample_S_star_batch(16, 500, rng)
        coords = out["coords"]
        assert coords.shape == (500, 16)
        assert (coords[:, 0] == 1.0).all()
        assert (np.diff(coords, axis=1) >= -1e-12).all()
        assert (coords[:, 1:] > 1.0).all()

    def test_convergence_flags(self, rng):
        out = sample_S_star_batch(8, 300, rng)
        assert out["converged"].all()
        assert (out["levels_used"] >= 1).all()

    def test_single_sample_wrapper(self, rng):
        s = sample_S_star(8, rng, trajectory_levels=(1, 3))
        assert s.coords.shape == (8,)
        assert set(s.trajectory) == {1, 3}

    def test_continuity_proxy(self, rng):
        # the limit coordinates are continuous: no repeated values
        x2 = sample_S2_star(20000, rng)
        assert len(np.unique(np.round(x2, 12))) == len(x2)

    def test_invalid_args(self, rng):
        with pytest.raises(ValueError):
            sample_S_star_batch(1, 10, rng)
        with pytest.raises(ValueError):
            sample_S_star_batch(4, 10, rng, tol=-1.0)


class TestCdfEstimator:
    def test_rows_and_monotonicity(self, rng):
        est = estimate_S_star_cdf(3, 4000, rng)
        cdf = [r[2] for r in est.table]
        assert all(b >= a for a, b in zip(cdf, cdf[1:]))
        assert all(r[0] == 3 for r in est.table)
        assert 0.0 <= cdf[0] and cdf[-1] <= 1.0

    def test_k_validation(self, rng):
        with pytest.raises(ValueError):
            estimate_S_star_cdf(1, 100, rng)


class TestTStarPmf:
    def test_iterlog_grid_overflow(self):
        g = iterlog_grid(2.0, -8, 2)
        assert math.isinf(g[0])
        assert all(b <= a or math.isinf(a) for a, b in zip(g, g[1:]))

    def test_pmf_rows(self, rng):
        est = estimate_T_star_pmf(2.0, (-4, 4), 20000, rng)
        ps = [r[2] for r in est.table]
        assert all(0.0 <= p <= 1.0 for p in ps)
        assert sum(ps) <= 1.0 + 1e-12
        assert sum(ps) > 0.9
        # positivity of every atom in the central range (the far-left
        # atoms have doubly-exponentially small mass, below MC resolution)
        central = [r[2] for r in est.table if -2 <= r[1] <= 4]
        assert all(p > 0 for p in central)

    def test_rho_validation(self, rng):
        with pytest.raises(ValueError):
            estimate_T_star_pmf(1.0, (-2, 2), 100, rng)

    def test_domination_in_rho(self, rng):
        s2 = sample_S2_star(30000, rng)
        cdfs = {}
        for rho in (1.5, 3.0):
            est = estimate_T_star_pmf(rho, (-3, 3), len(s2), rng,
                                      s2_samples=s2)
            cdfs[rho] = np.cumsum([r[2] for r in est.table])
        sig = 3.0 * math.sqrt(0.25 / len(s2))
        assert (cdfs[1.5] >= cdfs[3.0] - sig).all()

    def test_tilde_composition(self):
        # same seed: the standard-tetration law is the modified one at f(rho)
        a = estimate_T_tilde_star(0.5, (-2, 2), 5000, make_rng(77, 0))
        b = estimate_T_star_pmf(conjugacy_f(0.5), (-2, 2), 5000, make_rng(77, 0))
        assert [r[2] for r in a.table] == [r[2] for r in b.table]
        assert a.params["f_rho"] == conjugacy_f(0.5)


class TestT0Star:
    def test_nondegenerate_pmf(self, rng):
        est = estimate_T0_star_pmf(2.0, 3, 3000, rng)
        big = [r for r in est.table if r[2] > 0.01]
        assert len(big) >= 2

    def test_monotone_in_rho(self, rng):
        # T0*(rho1) <= T0*(rho2) stochastically for rho1 < rho2
        n = 4000
        a = estimate_T0_star_pmf(1.5, 3, n, rng).dist.samples
        b = estimate_T0_star_pmf(4.0, 3, n, rng).dist.samples
        sig = 3.0 / math.sqrt(n)
        for k in range(-3, 6):
            assert (a <= k).mean() >= (b <= k).mean() - sig

    def test_stabilizes_across_levels(self, rng):
        n = 4000
        a = estimate_T0_star_pmf(2.0, 3, n, rng).dist.samples
        b = estimate_T0_star_pmf(2.0, 4, n, rng).dist.samples
        ha, hb = two_sample_hist(a, b)
        assert chi_square_two_sample(ha, hb).passed(0.01)

    def test_cross_check_with_collision_shift(self, rng):
        # X1([EE_n(rho)]) - n agrees with T0([E_n(f(rho))]) - n
        n = 3000
        a = estimate_X1_limit(0.0, 6, n, rng).astype(int)
        b = estimate_T0_star_pmf(conjugacy_f(0.0), 6, n, rng).dist.samples
        ha, hb = two_sample_hist(a, b)
        assert chi_square_two_sample(ha, hb).passed(0.01)


class TestSpacings:
    def test_shapes_and_positivity(self, rng):
        est = estimate_spacings(3, 2, 2000, rng)
        gaps = np.array(est.table)
        assert gaps.shape == (2000, 2)
        assert (gaps >= 0).all()

    def test_validation(self, rng):
        with pytest.raises(ValueError):
            estimate_spacings(1, 1, 100, rng)


class TestPsiFixedPoint:
    def test_small_J_rejected(self, rng):
        with pytest.raises(ValueError):
            check_fixed_point_psi(8, 100, rng)

    def test_coordinate_validity_guard(self, rng):
        # requesting coordinates whose record time usually exceeds J fails
        with pytest.raises(ValueError):
            check_fixed_point_psi(16, 200, rng, coords_out=10)

    def test_first_coordinate_identity(self, rng):
        res = check_fixed_point_psi(300, 500, rng, coords_out=2)
        assert np.allclose(res["psi"][:, 0], 1.0)


class TestNStar:
    def test_count_at_one(self, rng):
        est = estimate_N_star([1.0, 4.0], 1500, rng)
        assert (est.params["counts"][1.0] == 1).all()

    def test_monotone_in_rho(self, rng):
        est = estimate_N_star([1.0, 2.0, 5.0], 1500, rng)
        c = est.params["counts"]
        assert (c[1.0] <= c[2.0]).all()
        assert (c[2.0] <= c[5.0]).all()

    def test_domain_validation(self, rng):
        with pytest.raises(ValueError):
            estimate_N_star([0.5], 100, rng)


class TestForwardBackward:
    def test_conditioned_equality(self, rng):
        # forward L2(S2^(2)) from M=1e6 vs backward level-2 snapshot,
        # both conditioned on two survivors after two rounds
        n = 4000
        fwd = forward_second_survivor(10**6, 2, n, rng)
        fwd = fwd[~np.isnan(fwd)]
        back = sample_S_star_batch(2, n, rng,
                                   trajectory_levels=(2,))["snapshots"][2][:, 1]
        cut = float(modified_iterlog(2, 10.0**6))
        back = back[back <= cut]
        assert (fwd <= cut + 1e-9).all()
        rep = ks_two_sample(EmpiricalDist(fwd), EmpiricalDist(back))
        assert rep.passed(0.01)
