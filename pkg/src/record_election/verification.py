"""Named invariant checks behind ``record-election verify``.

Each check returns a dict ``{name, passed, statistic, detail}``; suites
aggregate them.  Sample sizes scale with a budget multiplier.  These are
the module-level invariants; the heavyweight distributional criteria live
in the acceptance test suite.
"""

from __future__ import annotations

import math

import numpy as np

from .coalescent import (
    StirlingTable,
    pmf_J,
    run_coalescent,
    sample_J,
    sample_X1_batch,
)
from .election import (
    expected_T_exact,
    run_election_exact,
    run_election_tower,
    sample_T_T0_batch,
)
from .limits import (
    _batched_coords,
    check_fixed_point_psi,
    estimate_N_star,
    estimate_T_star_pmf,
    forward_second_survivor,
    sample_S2_star,
    sample_S_star,
)
from .numerics import TowerReal, log_star, modified_iterlog, modified_tetration
from .records import (
    RecordSamplerConfig,
    approx_count_records,
    count_records,
    record_time,
    sample_round,
)
from .rng import make_rng
from .stats import (
    EmpiricalDist,
    chi_square_gof,
    chi_square_two_sample,
    ks_one_sample,
    ks_two_sample,
    mean_ci,
)

SUITES = ("records", "election", "limits", "coalescent")


def _n(base: int, budget: float) -> int:
    return max(int(base * budget), 100)


def _check(name, passed, statistic=None, detail=None):
    return {
        "name": name,
        "passed": bool(passed),
        "statistic": None if statistic is None else float(statistic),
        "detail": detail,
    }


def _normal_cdf(x):
    from scipy.special import ndtr

    return ndtr(x)


# ---------------------------------------------------------------------


def suite_records(seed: int, budget: float = 1.0) -> list[dict]:
    rng = make_rng(seed, 101)
    out = []

    o = sample_round(1, rng)
    out.append(_check("round_m1_survivor", list(o.survivors) == [1]))

    n = _n(20000, budget)
    full = sum(sample_round(2, rng).count == 2 for _ in range(n))
    rep = chi_square_gof([n - full, full], [0.5, 0.5])
    out.append(_check("round_m2_half", rep.passed(0.01), rep.statistic))

    n = _n(30000, budget)
    counts = np.bincount(
        [count_records(3, rng) for _ in range(n)], minlength=4
    )[1:]
    rep = chi_square_gof(counts, [1 / 3, 1 / 2, 1 / 6])
    out.append(_check("count_records_m3_pmf", rep.passed(0.01), rep.statistic))

    n = _n(30000, budget)
    nu2 = np.array([record_time(2, rng) for _ in range(n)])
    kmax = 50
    cnt = np.bincount(np.minimum(nu2, kmax + 1), minlength=kmax + 2)[2:]
    probs = [1.0 / ((k - 1) * k) for k in range(2, kmax + 1)] + [1.0 / kmax]
    rep = chi_square_gof(cnt, probs)
    out.append(_check("nu2_pmf", rep.passed(0.01), rep.statistic))

    lo, hi = mean_ci(EmpiricalDist(1.0 / nu2), 0.99)
    target = 2.0 - math.pi**2 / 6.0
    out.append(_check("nu2_inverse_mean", lo <= target <= hi, (lo + hi) / 2))

    ok = True
    for k in range(2, 11):
        vals = 1.0 / np.array([record_time(k, rng) for _ in range(_n(20000, budget))])
        se = vals.std(ddof=1) / math.sqrt(len(vals))
        if vals.mean() > 3.0 / (4.0 * k) + 3 * se:
            ok = False
    out.append(_check("inverse_record_time_bound", ok))

    n = _n(1000, budget)
    t = np.array([record_time(200, rng) for _ in range(n)]) - 1.0  # log nu
    rep = ks_one_sample(EmpiricalDist((t - 200.0) / math.sqrt(200.0)), _normal_cdf)
    out.append(_check("nu200_clt", rep.passed(0.01), rep.statistic))

    # consistency weld at the exact/CLT threshold: the log-domain sampler
    # at k = threshold must match the exact one in distribution
    n = _n(20000, budget)
    cfg14 = RecordSamplerConfig(exact_record_time_threshold=14)
    exact = np.array([math.log(record_time(15, rng)) for _ in range(n)])
    surro = np.array([record_time(15, rng, cfg14) - 1.0 for _ in range(n)])
    rep = ks_two_sample(EmpiricalDist(exact), EmpiricalDist(surro))
    out.append(_check("threshold_weld", rep.p_value > 0.001, rep.statistic))

    hits = sum(
        approx_count_records(modified_tetration(5, 2.0), rng).level == 4
        for _ in range(_n(1000, budget))
    )
    out.append(_check("approx_count_tower_level", hits >= 0.999 * _n(1000, budget)))

    return out


def suite_election(seed: int, budget: float = 1.0) -> list[dict]:
    rng = make_rng(seed, 102)
    out = []

    tr = run_election_exact(1, rng)
    out.append(_check("T_of_1", tr.T == 1 and tr.T0 == 0))

    n = _n(20000, budget)
    T2, T02 = sample_T_T0_batch(2, n, rng)
    lo, hi = mean_ci(EmpiricalDist(T2), 0.99)
    out.append(_check("T_of_2_geometric_mean", lo <= 2.0 <= hi, T2.mean()))
    out.append(_check("T0_of_2_always_1", bool((T02 == 1).all())))

    n = _n(20000, budget)
    T10, _ = sample_T_T0_batch(10, n, rng)
    lo, hi = mean_ci(EmpiricalDist(T10), 0.99)
    oracle = expected_T_exact(10)
    out.append(_check("T_of_10_markov_oracle", lo <= oracle <= hi, T10.mean()))

    ok = True
    for _ in range(_n(200, budget)):
        tr = run_election_exact(30, rng)
        labels = tr.survivor_labels or []
        pops = [r.population_after.floor_int() for r in tr.rounds]
        for i, ls in enumerate(labels):
            n_round = pops[i]
            # duality: N >= k  <=>  S_k <= M, for every k up to the count
            if len(ls) != n_round or any(
                ls[k - 1] > 30 for k in range(1, len(ls) + 1)
            ):
                ok = False
        for a, b in zip(labels, labels[1:]):
            if not set(b).issubset(set(a)):
                ok = False
    out.append(_check("duality_and_label_subsequence", ok))

    n = _n(20000, budget)
    for k in (2, 3, 4):
        stuck = sum(count_records(k, rng) == k for _ in range(n))
        p = 1.0 / math.factorial(k)
        rep = chi_square_gof([n - stuck, stuck], [1 - p, p])
        out.append(_check(f"inconclusive_prob_k{k}", rep.passed(0.01), stuck / n))

    n = _n(5000, budget)
    dom_mean = sum(1.0 / (math.factorial(k) - 1) for k in range(2, 40))
    T, T0 = sample_T_T0_batch(10**4, n, rng)
    diff = (T - T0).astype(float)
    se = diff.std(ddof=1) / math.sqrt(n)
    out.append(_check("T_minus_T0_domination",
                      diff.mean() <= dom_mean + 3 * se, diff.mean()))

    # T(M)/log* M concentrates near 1 only once log* M dwarfs the O(1)
    # stochastic tail, i.e. at tower-sized populations
    ok = True
    last = None
    for level in (12, 30):
        M = modified_tetration(level, 2.0)
        reps = _n(200, budget)
        ls = log_star(M)
        ratio = np.array(
            [run_election_tower(M, rng).T for _ in range(reps)]) / ls
        last = float(ratio.mean())
        if not (0.7 <= last <= 1.0 + 10.0 / ls):
            ok = False
    out.append(_check("lln_ratio_towers", ok, last))

    return out


def suite_limits(seed: int, budget: float = 1.0) -> list[dict]:
    rng = make_rng(seed, 103)
    out = []

    n = _n(2000, budget)
    res = _batched_coords(32, n, rng)
    coords = res["coords"]
    out.append(_check("X_coordinate_1_is_1", bool((coords[:, 0] == 1.0).all())))
    nondec = bool((np.diff(coords, axis=1) >= -1e-12).all())
    out.append(_check("coords_nondecreasing", nondec))

    x2 = sample_S2_star(_n(10000, budget), rng)
    rounded = np.round(x2, 12)
    out.append(_check("no_atoms_proxy_X2", len(np.unique(rounded)) == len(rounded)))

    # total-variation decay in j: mean sum of |increments| smaller at j=16
    def total_variation(j, reps):
        tv = []
        for _ in range(reps):
            s = sample_S_star(max(j, 2), rng,
                              trajectory_levels=tuple(range(1, 13)))
            traj = [s.trajectory[lv][j - 1] for lv in sorted(s.trajectory)]
            tv.append(sum(abs(b - a) for a, b in zip(traj, traj[1:])))
        return float(np.mean(tv))

    reps = _n(300, budget)
    tv2, tv16 = total_variation(2, reps), total_variation(16, reps)
    out.append(_check("increment_decay_in_j", tv16 <= tv2, tv16 / max(tv2, 1e-9)))

    res = check_fixed_point_psi(2000, _n(2000, budget), rng, coords_out=3)
    for j in (2, 3):
        a = res["psi"][:, j - 1]
        rep = ks_two_sample(EmpiricalDist(a[~np.isnan(a)]),
                            EmpiricalDist(res["orig"][:, j - 1]))
        out.append(_check(f"psi_fixed_point_j{j}", rep.passed(0.01), rep.statistic))

    n = _n(1500, budget)
    fwd = forward_second_survivor(10**6, 2, n, rng)
    back = _batched_coords(2, n, rng, trajectory_levels=(2,))["snapshots"][2][:, 1]
    cut = float(modified_iterlog(2, 10.0**6))
    rep = ks_two_sample(EmpiricalDist(fwd[~np.isnan(fwd)]),
                        EmpiricalDist(back[back <= cut]))
    out.append(_check("forward_backward_level2", rep.passed(0.01), rep.statistic))

    est = estimate_N_star([1.0, 8.0], _n(1500, budget), rng)
    n1 = est.params["counts"][1.0]
    out.append(_check("N_star_at_1", bool((n1 == 1).all())))
    mean8 = est.params["counts"][8.0].mean()
    out.append(_check("N_star_lln_band", 0.5 <= mean8 / 8.0 <= 1.5, mean8))

    s2 = sample_S2_star(_n(20000, budget), rng)
    ks = range(-3, 4)
    cdf = {}
    for rho in (1.5, 3.0):
        est = estimate_T_star_pmf(rho, (-3, 3), len(s2), rng, s2_samples=s2)
        pmf = [row[2] for row in est.table]
        cdf[rho] = np.cumsum(pmf)
    sig = math.sqrt(0.25 / len(s2))
    dom = bool((cdf[1.5] >= cdf[3.0] - 3 * sig).all())
    out.append(_check("T_star_domination_in_rho", dom))

    return out


def suite_coalescent(seed: int, budget: float = 1.0) -> list[dict]:
    rng = make_rng(seed, 104)
    out = []

    table = StirlingTable(40)
    ok = all(
        sum(table.exact(n, k) for k in range(n + 1)) == math.factorial(n)
        and table.exact(n, n) == 1
        and table.exact(n, 1) == math.factorial(n - 1)
        for n in range(1, 41)
    )
    out.append(_check("stirling_identities", ok))

    ok = True
    for theta in (0.5, 1.0, 2.0):
        for n in (3, 12, 40):
            s = sum(pmf_J(n, k, theta) for k in range(1, n))
            if abs(s - 1.0) > 1e-12:
                ok = False
    out.append(_check("pmf_J_normalization", ok))

    n = _n(30000, budget)
    draws = np.bincount([sample_J(3, rng) for _ in range(n)], minlength=3)[1:]
    rep = chi_square_gof(draws, [0.4, 0.6])
    out.append(_check("sample_J_n3", rep.passed(0.01), rep.statistic))

    n = _n(30000, budget)
    draws = np.bincount([sample_J(12, rng) for _ in range(n)], minlength=12)[1:]
    rep = chi_square_gof(draws, [pmf_J(12, k) for k in range(1, 12)])
    out.append(_check("sample_J_n12_stirling", rep.passed(0.01), rep.statistic))

    out.append(_check("X1_of_1_is_0", run_coalescent(1, rng).collisions == 0))
    out.append(_check(
        "X1_of_2_is_1",
        all(run_coalescent(2, rng).collisions == 1 for _ in range(100)),
    ))

    n = _n(20000, budget)
    for m in (5, 20):
        x1 = sample_X1_batch(m, n, rng)
        _, t0 = sample_T_T0_batch(m, n, rng)
        top = int(max(x1.max(), t0.max()))
        rep = chi_square_two_sample(
            np.bincount(x1, minlength=top + 1),
            np.bincount(t0, minlength=top + 1),
        )
        out.append(_check(f"bridge_X1_T0_n{m}", rep.passed(0.01), rep.statistic))

    x = sample_X1_batch(15, _n(500, budget), rng)
    ratio = x.mean() / log_star(15.0)
    out.append(_check("log_star_scaling_small_n", 0.6 <= ratio <= 1.4, ratio))

    return out


def run_suite(name: str, seed: int, budget: float = 1.0) -> dict:
    funcs = {
        "records": suite_records,
        "election": suite_election,
        "limits": suite_limits,
        "coalescent": suite_coalescent,
    }
    if name == "all":
        checks = []
        for s in SUITES:
            for c in funcs[s](seed, budget):
                c = dict(c, suite=s)
                checks.append(c)
    elif name in funcs:
        checks = [dict(c, suite=name) for c in funcs[name](seed, budget)]
    else:
        raise KeyError(name)
    return {
        "suite": name,
        "seed": seed,
        "budget": budget,
        "checks": checks,
        "all_passed": all(c["passed"] for c in checks),
    }
