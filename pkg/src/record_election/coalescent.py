"""Poisson-Dirichlet coalescent block-count chain.

The block chain jumps from ``m`` to ``J_theta(m)`` with

    P{J_theta(n) = k} = theta^k [n,k] / ([theta]_n - theta^n),

where ``[n,k]`` is the unsigned Stirling number of the first kind and
``[theta]_n`` the rising factorial.  ``J_theta(n)`` is exactly the record
count ``K_theta(n)`` conditioned to be below ``n``, which gives an O(n)
rejection sampler; the Stirling rows serve as the verification oracle.

``X_theta(n)`` counts collisions until a single block remains; for
``theta = 1`` it has the same law as the number of conclusive election
rounds ``T0(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .numerics import TowerReal, log_star
from .records import (
    DEFAULT_CONFIG,
    RecordSamplerConfig,
    approx_count_records,
    count_records,
)

__all__ = [
    "StirlingTable",
    "CoalescentChain",
    "pmf_J",
    "sample_J",
    "run_coalescent",
    "sample_X1_batch",
    "estimate_X1_limit",
    "log_star_scaling_check",
]

DEFAULT_EXACT_CAP = 64


class StirlingTable:
    """Unsigned Stirling numbers of the first kind.

    Exact arbitrary-precision rows up to ``exact_cap`` via
    ``[n+1,k] = n[n,k] + [n,k-1]``; log-domain rows beyond, built with
    log-sum-exp on the same recurrence.
    """

    def __init__(self, exact_cap: int = DEFAULT_EXACT_CAP) -> None:
        if exact_cap < 1:
            raise ValueError("exact_cap must be >= 1")
        self.exact_cap = exact_cap
        self._rows: list[list[int]] = [[1]]  # row n=0: [0,0] = 1
        self._log_rows: dict[int, np.ndarray] = {}

    def _extend_exact(self, n: int) -> None:
        while len(self._rows) <= n:
            m = len(self._rows) - 1  # last computed n
            prev = self._rows[m]
            row = [0] * (m + 2)
            for k in range(1, m + 2):
                above = prev[k] if k <= m else 0
                row[k] = m * above + prev[k - 1]
            self._rows.append(row)

    def exact(self, n: int, k: int) -> int:
        """``[n, k]`` as an exact integer; requires ``n <= exact_cap``."""
        if n > self.exact_cap:
            raise ValueError(f"exact rows capped at n = {self.exact_cap}")
        if k < 0 or k > n:
            return 0
        self._extend_exact(n)
        return self._rows[n][k]

    def log(self, n: int, k: int) -> float:
        """``log [n, k]``; exact when available, recurrence in log domain."""
        if k < 1 or k > n:
            return -math.inf
        if n <= self.exact_cap:
            v = self.exact(n, k)
            return math.log(v) if v else -math.inf
        row = self._log_row(n)
        return float(row[k])

    def _log_row(self, n: int) -> np.ndarray:
        if n in self._log_rows:
            return self._log_rows[n]
        if n == self.exact_cap:
            self._extend_exact(n)
            with np.errstate(divide="ignore"):
                return np.log(np.array(self._rows[n], dtype=np.float64))
        prev = self._log_row(n - 1)
        m = n - 1
        row = np.full(n + 1, -np.inf)
        above = np.concatenate([prev, [-np.inf]])[1: n + 1] + math.log(m)
        shifted = prev[0:n]
        row[1:] = np.logaddexp(above, shifted)
        self._log_rows[n] = row
        return row


_SHARED_TABLE = StirlingTable()


def _log_rising_factorial(theta: float, n: int) -> float:
    return float(gammaln(theta + n) - gammaln(theta))


def pmf_J(n: int, k: int, theta: float = 1.0,
          table: StirlingTable | None = None) -> float:
    """``P{J_theta(n) = k}``, exact for n within the table cap."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if k < 1 or k >= n:
        raise ValueError("k must satisfy 1 <= k < n")
    if theta <= 0:
        raise ValueError("theta must be positive")
    table = table or _SHARED_TABLE
    log_num = k * math.log(theta) + table.log(n, k)
    # denominator [theta]_n - theta^n via log-diff-exp
    la = _log_rising_factorial(theta, n)
    lb = n * math.log(theta)
    if lb >= la:  # cannot happen for theta > 0, n >= 2; guard anyway
        raise ArithmeticError("degenerate denominator")
    log_den = la + math.log1p(-math.exp(lb - la))
    return math.exp(log_num - log_den)


def sample_J(n: int, rng: np.random.Generator, theta: float = 1.0,
             config: RecordSamplerConfig = DEFAULT_CONFIG) -> int:
    """One block-count jump: record count conditioned to be < n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    cfg = (config if config.theta == theta
           else RecordSamplerConfig(theta, config.exact_record_time_threshold,
                                    config.clt_population_threshold))
    while True:
        k = count_records(n, rng, cfg)
        if k < n:
            return k


@dataclass
class CoalescentChain:
    theta: float
    path: list  # decreasing populations from n down to 1 (TowerReal at tower scale)

    @property
    def collisions(self) -> int:
        return len(self.path) - 1


def run_coalescent(n, rng: np.random.Generator, theta: float = 1.0,
                   config: RecordSamplerConfig = DEFAULT_CONFIG) -> CoalescentChain:
    """Block chain from ``n`` blocks down to 1; counts collisions X_theta(n).

    Tower-sized ``n`` uses the normal record-count surrogate for the first
    jumps (the rejection probability 1/n! is negligible there).
    """
    cfg = (config if config.theta == theta
           else RecordSamplerConfig(theta, config.exact_record_time_threshold,
                                    config.clt_population_threshold))
    path = []
    if isinstance(n, TowerReal) or (not isinstance(n, int)):
        t = n if isinstance(n, TowerReal) else TowerReal.from_value(n)
        path.append(t)
        while t.value > cfg.clt_population_threshold:
            t = approx_count_records(t, rng, cfg)
            path.append(t)
        m = max(t.floor_int(), 1)
    else:
        if n < 1:
            raise ValueError("n must be >= 1")
        m = n
        path.append(m)
    while m > 1:
        m = sample_J(m, rng, theta, cfg)
        path.append(m)
    return CoalescentChain(theta, path)


def sample_X1_batch(n: int, n_samples: int, rng: np.random.Generator,
                    theta: float = 1.0) -> np.ndarray:
    """Vectorized collision counts X_theta(n) from integer ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    state = np.full(n_samples, n, dtype=np.int64)
    hits = np.zeros(n_samples, dtype=np.int64)
    while True:
        alive = state > 1
        if not alive.any():
            break
        for m in np.unique(state[alive]):
            rows = np.nonzero(alive & (state == m))[0]
            k = _batch_sample_J(int(m), rows.size, rng, theta)
            state[rows] = k
        hits[alive] += 1
    return hits


def _batch_sample_J(m: int, rows: int, rng: np.random.Generator,
                    theta: float) -> np.ndarray:
    from .election import _batch_count_records

    out = np.empty(rows, dtype=np.int64)
    pending = np.arange(rows)
    while pending.size:
        k = _batch_count_records(m, pending.size, rng, theta)
        ok = k < m
        out[pending[ok]] = k[ok]
        pending = pending[~ok]
    return out


def estimate_X1_limit(rho: float, n_level: int, n_samples: int,
                      rng: np.random.Generator, theta: float = 1.0,
                      config: RecordSamplerConfig = DEFAULT_CONFIG):
    """Empirical PMF of ``X_theta([EE_n(rho)]) - n`` (standard tetration)."""
    from .numerics import standard_tetration

    base = standard_tetration(n_level, rho)
    shifts = np.empty(n_samples, dtype=np.int64)
    if isinstance(base, TowerReal) and base.value > config.clt_population_threshold:
        for i in range(n_samples):
            chain = run_coalescent(base, rng, theta, config)
            shifts[i] = chain.collisions - n_level
    else:
        v = base.value if isinstance(base, TowerReal) else base
        m = max(int(math.floor(v)), 1)
        shifts = sample_X1_batch(m, n_samples, rng, theta) - n_level
    return shifts


def log_star_scaling_check(n_grid, rng: np.random.Generator,
                           theta: float = 1.0, reps: int = 200,
                           config: RecordSamplerConfig = DEFAULT_CONFIG):
    """Mean and std of X_theta(n)/log*_theta(n) over a grid of n."""
    out = []
    for n in n_grid:
        ls = log_star(n, theta)
        if isinstance(n, TowerReal) and n.value > config.clt_population_threshold:
            vals = np.array([
                run_coalescent(n, rng, theta, config).collisions
                for _ in range(reps)
            ], dtype=np.float64)
        else:
            v = n.value if isinstance(n, TowerReal) else float(n)
            vals = sample_X1_batch(int(v), reps, rng, theta).astype(np.float64)
        ratios = vals / max(ls, 1)
        out.append({
            "n": repr(n),
            "log_star": ls,
            "ratio_mean": float(ratios.mean()),
            "ratio_std": float(ratios.std(ddof=1)) if reps > 1 else 0.0,
        })
    return out
