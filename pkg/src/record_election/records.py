"""Record statistics: round survival, record counts, record times.

For the classical case ``theta = 1``, a round's survivor set is exactly the
set of record times among the population, so it is sampled through the
multiplicative record-time recursion

    R(1) = 1,   R(n+1) = ceil(R(n) / U_n),   U_n iid uniform(0,1),

in exact integer arithmetic (a uniform double is a dyadic rational with a
53-bit numerator, so the ceiling division is exact).  This gives O(#records)
work per round instead of O(population).

For ``theta != 1`` index ``i`` survives independently with probability
``theta / (i + theta - 1)`` via a vectorized Bernoulli scan.

Record times beyond a small exact threshold are carried in log scale:
``log R(k) = log R(threshold) + Gamma(k - threshold)``, since each further
recursion step adds an independent ``-log U`` (the ceiling corrections are
below ``exp(-threshold)`` at that point).  The sampler then returns the
once-iterated logarithm ``1 + log R(k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import EULER_GAMMA, TowerReal, tower_harmonic

__all__ = [
    "RecordSamplerConfig",
    "RoundOutcome",
    "sample_round",
    "count_records",
    "approx_count_records",
    "record_time",
    "williams_int_path",
]

_TWO53 = 1 << 53


@dataclass(frozen=True)
class RecordSamplerConfig:
    """Knobs for the record samplers.

    * ``theta`` -- record weight; 1 is the classical model.
    * ``exact_record_time_threshold`` -- largest index sampled by the exact
      integer recursion; beyond it the Gamma log-scale carry is used.
    * ``clt_population_threshold`` -- populations above this use the
      normal surrogate for the per-round record count.
    """

    theta: float = 1.0
    exact_record_time_threshold: int = 15
    clt_population_threshold: int = 10**7

    def __post_init__(self) -> None:
        if not (self.theta > 0):
            raise ValueError("theta must be positive")
        if self.exact_record_time_threshold < 2:
            raise ValueError("exact_record_time_threshold must be >= 2")
        if self.clt_population_threshold < 10:
            raise ValueError("clt_population_threshold too small")


DEFAULT_CONFIG = RecordSamplerConfig()


@dataclass
class RoundOutcome:
    """One round over populations ``1..m``: surviving indices and count."""

    survivors: np.ndarray  # 1-based indices, increasing; survivors[0] == 1
    count: int = field(init=False)

    def __post_init__(self) -> None:
        self.count = int(len(self.survivors))


def _u53(rng: np.random.Generator) -> int:
    """53-bit numerator of a uniform double; never 0."""
    while True:
        n = int(rng.random() * _TWO53)
        if n:
            return n


def williams_int_path(m: int, rng: np.random.Generator) -> list[int]:
    """Exact record times <= m (the survivor indices of one round)."""
    out = [1]
    r = 1
    while True:
        num = _u53(rng)
        r = (r * _TWO53 + num - 1) // num
        if r > m:
            return out
        out.append(r)


def sample_round(m: int, rng: np.random.Generator,
                 config: RecordSamplerConfig = DEFAULT_CONFIG) -> RoundOutcome:
    """Survivor indices of one round over players ``1..m``."""
    if m < 1:
        raise ValueError("population must be >= 1")
    if config.theta == 1.0:
        return RoundOutcome(np.array(williams_int_path(m, rng), dtype=np.int64))
    idx = np.arange(1, m + 1, dtype=np.float64)
    keep = rng.random(m) * (idx + config.theta - 1.0) < config.theta
    keep[0] = True  # index 1 is always a record
    return RoundOutcome(np.nonzero(keep)[0].astype(np.int64) + 1)


def count_records(m: int, rng: np.random.Generator,
                  config: RecordSamplerConfig = DEFAULT_CONFIG) -> int:
    """Number of records among ``1..m`` (one round's survivor count)."""
    if m < 1:
        raise ValueError("population must be >= 1")
    if config.theta == 1.0:
        count = 1
        r = 1
        while True:
            num = _u53(rng)
            r = (r * _TWO53 + num - 1) // num
            if r > m:
                return count
            count += 1
    idx = np.arange(2, m + 1, dtype=np.float64)
    extra = int(np.sum(rng.random(m - 1) * (idx + config.theta - 1.0)
                       < config.theta)) if m > 1 else 0
    return 1 + extra


def approx_count_records(m, rng: np.random.Generator,
                         config: RecordSamplerConfig = DEFAULT_CONFIG):
    """Normal surrogate for the record count at huge populations.

    ``K(m) ~ round(Normal(H_m, H_m - H_m^(2)))``; valid above the CLT
    population threshold.  Accepts floats and TowerReals, returns a
    TowerReal.  Only defined for ``theta = 1``.
    """
    if config.theta != 1.0:
        raise ValueError("normal record-count surrogate requires theta = 1")
    t = m if isinstance(m, TowerReal) else TowerReal.from_value(float(m))
    if t.value <= config.clt_population_threshold:
        raise ValueError("population below the CLT threshold; use count_records")
    mean, var = tower_harmonic(t)
    if isinstance(mean, TowerReal):
        # noise and rounding are below representable precision at this scale
        return mean
    k = round(rng.normal(mean, math.sqrt(max(var, 1.0))))
    k = max(k, 1.0)
    return TowerReal.from_value(k)


def record_time(k: int, rng: np.random.Generator,
                config: RecordSamplerConfig = DEFAULT_CONFIG):
    """Sample the k-th record time ``nu(k)``.

    Returns the exact integer for ``k`` up to the exact threshold.  Beyond
    it returns the once-iterated logarithm ``L_1(nu(k)) = 1 + log nu(k)``
    as a float (the value itself no longer fits), clamped to respect
    ``nu(k) >= k``.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if config.theta != 1.0:
        raise ValueError("record-time sampler requires theta = 1")
    thr = config.exact_record_time_threshold
    r = 1
    for _ in range(min(k, thr) - 1):
        num = _u53(rng)
        r = (r * _TWO53 + num - 1) // num
    if k <= thr:
        return r
    log_nu = math.log(r) + rng.gamma(float(k - thr))
    return 1.0 + max(log_nu, math.log(k))
