"""Statistical verification kit: empirical distributions, KS/chi-square
tests with asymptotic null distributions, confidence intervals.

Discrete two-sample comparisons go through chi-square with pooled tails
(KS is conservative on ties); continuous ones through KS.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats as sps

__all__ = [
    "EmpiricalDist",
    "TestReport",
    "ks_one_sample",
    "ks_two_sample",
    "chi_square_gof",
    "chi_square_two_sample",
    "mean_ci",
]

ALPHA_LEVELS = (0.10, 0.05, 0.01)


@dataclass
class EmpiricalDist:
    """Sorted sample store with CDF/quantile/binning queries."""

    samples: np.ndarray

    def __init__(self, samples) -> None:
        arr = np.asarray(samples, dtype=np.float64).ravel()
        if arr.size == 0:
            raise ValueError("empty sample")
        self.samples = np.sort(arr)

    @property
    def n(self) -> int:
        return self.samples.size

    def cdf(self, x) -> np.ndarray | float:
        xs = np.asarray(x, dtype=np.float64)
        out = np.searchsorted(self.samples, xs, side="right") / self.n
        return float(out) if np.isscalar(x) else out

    def quantile(self, q: float) -> float:
        if not (0.0 <= q <= 1.0):
            raise ValueError("quantile level outside [0, 1]")
        idx = min(max(int(math.ceil(q * self.n)) - 1, 0), self.n - 1)
        return float(self.samples[idx])

    def mean(self) -> float:
        return float(self.samples.mean())

    def pmf_counts(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct values and counts (for integer-valued samples)."""
        vals, counts = np.unique(self.samples, return_counts=True)
        return vals, counts


@dataclass
class TestReport:
    """Outcome of one statistical test at the standard levels."""

    name: str
    statistic: float
    p_value: float
    critical_values: dict  # alpha -> critical statistic value
    rejected_at: dict      # alpha -> bool
    n: tuple
    details: dict = field(default_factory=dict)

    def passed(self, alpha: float = 0.01) -> bool:
        return not self.rejected_at[self._akey(alpha)]

    @staticmethod
    def _akey(alpha: float) -> str:
        return f"{alpha:g}"

    def to_json(self) -> str:
        return json.dumps(
            {
                "name": self.name,
                "statistic": self.statistic,
                "p_value": self.p_value,
                "critical_values": self.critical_values,
                "rejected_at": self.rejected_at,
                "n": list(self.n),
                "details": self.details,
            }
        )


def _ks_c(alpha: float) -> float:
    # asymptotic Kolmogorov critical coefficient
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


def _ks_report(name: str, d: float, n_eff: float, sizes: tuple,
               details: dict) -> TestReport:
    lam = math.sqrt(n_eff) * d
    p = float(special.kolmogorov(lam))
    crit = {TestReport._akey(a): _ks_c(a) / math.sqrt(n_eff) for a in ALPHA_LEVELS}
    rej = {k: d > v for k, v in crit.items()}
    return TestReport(name, d, p, crit, rej, sizes, details)


def ks_one_sample(dist: EmpiricalDist, reference_cdf) -> TestReport:
    """KS test of a sample against a reference CDF (asymptotic null)."""
    n = dist.n
    ref = np.asarray(reference_cdf(dist.samples), dtype=np.float64)
    hi = np.arange(1, n + 1) / n - ref
    lo = ref - np.arange(0, n) / n
    d = float(max(hi.max(), lo.max()))
    return _ks_report("ks_one_sample", d, n, (n,), {})


def ks_two_sample(a: EmpiricalDist, b: EmpiricalDist) -> TestReport:
    """Two-sample KS with asymptotic null."""
    grid = np.concatenate([a.samples, b.samples])
    grid.sort(kind="mergesort")
    fa = np.searchsorted(a.samples, grid, side="right") / a.n
    fb = np.searchsorted(b.samples, grid, side="right") / b.n
    d = float(np.abs(fa - fb).max())
    n_eff = a.n * b.n / (a.n + b.n)
    return _ks_report("ks_two_sample", d, n_eff, (a.n, b.n), {})


def _pool_tails(counts: np.ndarray, expected: np.ndarray,
                min_expected: float = 5.0) -> tuple[np.ndarray, np.ndarray]:
    """Merge cells from both ends until every expected count is >= 5."""
    c = list(map(float, counts))
    e = list(map(float, expected))
    while len(c) > 2 and e[0] < min_expected:
        c[1] += c[0]; e[1] += e[0]
        del c[0]; del e[0]
    while len(c) > 2 and e[-1] < min_expected:
        c[-2] += c[-1]; e[-2] += e[-1]
        del c[-1]; del e[-1]
    # interior low-expectation cells: merge into the right neighbor
    i = 0
    while i < len(c):
        if e[i] < min_expected and len(c) > 2:
            j = i + 1 if i + 1 < len(c) else i - 1
            c[j] += c[i]; e[j] += e[i]
            del c[i]; del e[i]
        else:
            i += 1
    return np.array(c), np.array(e)


def _chi2_report(name: str, stat: float, dof: int, sizes: tuple,
                 details: dict) -> TestReport:
    dof = max(dof, 1)
    p = float(special.chdtrc(dof, stat))
    crit = {TestReport._akey(a): float(sps.chi2.ppf(1 - a, dof))
            for a in ALPHA_LEVELS}
    rej = {k: stat > v for k, v in crit.items()}
    details = dict(details, dof=dof)
    return TestReport(name, stat, p, crit, rej, sizes, details)


def chi_square_gof(counts, expected_probs) -> TestReport:
    """Goodness of fit of observed counts against a discrete PMF."""
    counts = np.asarray(counts, dtype=np.float64)
    probs = np.asarray(expected_probs, dtype=np.float64)
    if counts.shape != probs.shape:
        raise ValueError("counts and expected_probs must have equal length")
    total = counts.sum()
    if total <= 0:
        raise ValueError("empty counts")
    c, e = _pool_tails(counts, probs * total)
    # renormalize pooled expectations to the observed total
    e = e * (total / e.sum())
    stat = float(np.sum((c - e) ** 2 / e))
    return _chi2_report("chi_square_gof", stat, len(c) - 1, (int(total),), {})


def chi_square_two_sample(counts_a, counts_b) -> TestReport:
    """Homogeneity chi-square between two count vectors over shared cells.

    Cells are pooled identically in both vectors until the expected count
    under the smaller sample is >= 5 per pooled cell.
    """
    a = np.asarray(counts_a, dtype=np.float64)
    b = np.asarray(counts_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("count vectors must have equal length")
    na, nb = a.sum(), b.sum()
    if na <= 0 or nb <= 0:
        raise ValueError("empty counts")
    scale = min(na, nb) / (na + nb)
    # greedy adjacent pooling: accumulate cells until the pooled
    # expectation clears the threshold, then flush
    pa, pb = [], []
    acc_a = acc_b = 0.0
    for i in range(len(a)):
        acc_a += a[i]
        acc_b += b[i]
        if (acc_a + acc_b) * scale >= 5.0:
            pa.append(acc_a); pb.append(acc_b)
            acc_a = acc_b = 0.0
    if acc_a or acc_b:
        if pa:
            pa[-1] += acc_a; pb[-1] += acc_b
        else:
            pa.append(acc_a); pb.append(acc_b)
    stat = 0.0
    for ca, cb in zip(pa, pb):
        tot = ca + cb
        if tot == 0:
            continue
        exp_a = tot * na / (na + nb)
        exp_b = tot * nb / (na + nb)
        stat += (ca - exp_a) ** 2 / exp_a + (cb - exp_b) ** 2 / exp_b
    return _chi2_report(
        "chi_square_two_sample", float(stat), len(pa) - 1,
        (int(na), int(nb)), {}
    )


def mean_ci(dist: EmpiricalDist, level: float = 0.99) -> tuple[float, float]:
    """Normal-approximation confidence interval for the mean."""
    if dist.n < 2:
        raise ValueError("need at least two observations")
    m = dist.mean()
    se = float(dist.samples.std(ddof=1)) / math.sqrt(dist.n)
    z = float(sps.norm.ppf(0.5 + level / 2.0))
    return m - z * se, m + z * se
