"""Forward simulation of the record-based leader election.

Each round, every current player draws an iid value and only record holders
survive; player 1 always survives.  The population chain therefore jumps
from ``m`` to ``K(m)``, the number of records among ``m`` observations.
``T(M)`` is the number of rounds until a single player remains, ``T0(M)``
counts the conclusive rounds (those that eliminated someone).

Two regimes:

* exact -- populations up to ~1e8, survivor labels available;
* tower hybrid -- populations above the CLT threshold are advanced by the
  normal record-count surrogate (always conclusive; an inconclusive round
  at population m has probability 1/m!), then the chain finishes exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import TowerReal, log_star
from .records import (
    DEFAULT_CONFIG,
    RecordSamplerConfig,
    approx_count_records,
    count_records,
    sample_round,
)

__all__ = [
    "ElectionTrace",
    "RoundRecord",
    "run_election_exact",
    "run_election_tower",
    "leader_election_statistic",
    "sample_T_T0_batch",
    "expected_T_exact",
]

DEFAULT_LABEL_CAP = 10**5


@dataclass(frozen=True)
class RoundRecord:
    population_after: TowerReal
    conclusive: bool
    exact: bool


@dataclass
class ElectionTrace:
    """One complete election run."""

    initial_population: TowerReal
    rounds: list[RoundRecord]
    survivor_labels: list[list[int]] | None = None

    @property
    def T(self) -> int:
        return len(self.rounds)

    @property
    def T0(self) -> int:
        return sum(1 for r in self.rounds if r.conclusive)

    def populations(self) -> list[TowerReal]:
        return [r.population_after for r in self.rounds]

    def to_json(self) -> str:
        obj = {
            "initial_population": self.initial_population.to_json(),
            "rounds": [
                {
                    "population_after": r.population_after.to_json(),
                    "conclusive": r.conclusive,
                    "exact": r.exact,
                }
                for r in self.rounds
            ],
            "T": self.T,
            "T0": self.T0,
            "survivor_labels": self.survivor_labels,
        }
        return json.dumps(obj)

    @staticmethod
    def from_json(text: str) -> "ElectionTrace":
        obj = json.loads(text)
        rounds = [
            RoundRecord(
                TowerReal.from_json(r["population_after"]),
                bool(r["conclusive"]),
                bool(r["exact"]),
            )
            for r in obj["rounds"]
        ]
        labels = obj.get("survivor_labels")
        if labels is not None:
            labels = [list(map(int, ls)) for ls in labels]
        return ElectionTrace(
            TowerReal.from_json(obj["initial_population"]), rounds, labels
        )


def run_election_exact(M: int, rng: np.random.Generator,
                       config: RecordSamplerConfig = DEFAULT_CONFIG,
                       keep_labels: bool = True,
                       label_cap: int = DEFAULT_LABEL_CAP,
                       label_rounds: int | None = None) -> ElectionTrace:
    """Exact election from an integer population ``M``.

    Survivor labels (original player numbers) are recorded while the
    survivor count stays within ``label_cap``, for up to ``label_rounds``
    rounds (all rounds if None).
    """
    if M < 1:
        raise ValueError("population must be >= 1")
    rounds: list[RoundRecord] = []
    labels: list[list[int]] | None = [] if keep_labels else None
    current: np.ndarray | None = None  # original labels of current players
    tracking = keep_labels
    m = M
    n = 0
    while True:
        n += 1
        if tracking and label_rounds is not None and n > label_rounds:
            tracking = False  # label tracking cannot resume once dropped
        if tracking:
            outcome = sample_round(m, rng, config)
            k = outcome.count
            if k <= label_cap:
                current = (outcome.survivors if current is None
                           else current[outcome.survivors - 1])
                labels.append([int(v) for v in current])
            else:
                tracking = False
                current = None
        else:
            k = count_records(m, rng, config)
        rounds.append(RoundRecord(TowerReal.from_value(k), k < m, True))
        m = k
        if m == 1:
            break
    return ElectionTrace(TowerReal.from_value(M), rounds, labels)


def run_election_tower(M, rng: np.random.Generator,
                       config: RecordSamplerConfig = DEFAULT_CONFIG) -> ElectionTrace:
    """Hybrid election from a possibly tower-sized population."""
    t = M if isinstance(M, TowerReal) else TowerReal.from_value(M)
    rounds: list[RoundRecord] = []
    pop = t
    while pop.value > config.clt_population_threshold:
        if config.theta != 1.0:
            raise ValueError("tower regime requires theta = 1")
        pop = approx_count_records(pop, rng, config)
        rounds.append(RoundRecord(pop, True, False))
    m = max(pop.floor_int(), 1)
    if m == 1 and rounds:
        return ElectionTrace(t, rounds, None)
    tail = run_election_exact(m, rng, config, keep_labels=False)
    rounds.extend(tail.rounds)
    return ElectionTrace(t, rounds, None)


@dataclass(frozen=True)
class ElectionStatistic:
    T: int
    T0: int
    log_star_M: int
    shift: int      # T - log* M
    ratio: float    # T / log* M


def leader_election_statistic(M, rng: np.random.Generator,
                              config: RecordSamplerConfig = DEFAULT_CONFIG) -> ElectionStatistic:
    """``T(M) - log* M`` (and the LLN ratio ``T(M)/log* M``)."""
    t = M if isinstance(M, TowerReal) else TowerReal.from_value(M)
    trace = run_election_tower(t, rng, config)
    ls = log_star(t, config.theta)
    return ElectionStatistic(trace.T, trace.T0, ls, trace.T - ls,
                             trace.T / ls if ls else math.inf)


# ---------------------------------------------------------------------
# batched absorption-time sampling (for the coalescent bridge and
# tightness checks at small populations)
# ---------------------------------------------------------------------


def sample_T_T0_batch(M: int, n_samples: int, rng: np.random.Generator,
                      theta: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (T, T0) samples from integer population ``M``.

    Processes all chains level-synchronously, grouping identical states so
    each distinct population size costs one vectorized Bernoulli block.
    """
    if M < 1:
        raise ValueError("population must be >= 1")
    state = np.full(n_samples, M, dtype=np.int64)
    T = np.zeros(n_samples, dtype=np.int64)
    T0 = np.zeros(n_samples, dtype=np.int64)
    done = np.zeros(n_samples, dtype=bool)
    while True:
        alive = ~done
        if not alive.any():
            break
        T[alive] += 1
        for m in np.unique(state[alive]):
            rows = np.nonzero(alive & (state == m))[0]
            k = _batch_count_records(int(m), rows.size, rng, theta)
            T0[rows] += (k < m)
            state[rows] = k
        # a chain is absorbed after the round in which it reaches 1
        done |= alive & (state == 1)
    return T, T0


def _batch_count_records(m: int, rows: int, rng: np.random.Generator,
                         theta: float) -> np.ndarray:
    if m == 1:
        return np.ones(rows, dtype=np.int64)
    if theta == 1.0:
        # vectorized multiplicative record-time recursion: O(log m) steps
        r = np.ones(rows)
        count = np.ones(rows, dtype=np.int64)
        active = np.ones(rows, dtype=bool)
        while active.any():
            u = rng.random(int(active.sum()))
            nxt = np.ceil(r[active] / u)
            r[active] = nxt
            inside = nxt <= m
            idx = np.nonzero(active)[0]
            count[idx[inside]] += 1
            active[idx[~inside]] = False
        return count
    idx = np.arange(2, m + 1, dtype=np.float64)
    u = rng.random((rows, m - 1))
    return 1 + (u * (idx + theta - 1.0) < theta).sum(axis=1).astype(np.int64)


# ---------------------------------------------------------------------
# exact expectation oracle (small populations)
# ---------------------------------------------------------------------


def expected_T_exact(M: int) -> float:
    """E[T(M)] by linear solve over the exact record-count kernel.

    Uses P{K(m)=k} = [m,k]/m! (unsigned Stirling numbers, theta=1).
    Independent of the samplers; used as a test oracle.
    """
    from .coalescent import StirlingTable

    if M < 1:
        raise ValueError("population must be >= 1")
    if M == 1:
        return 1.0
    table = StirlingTable(M)
    # tau(m) = E[T(m)]: tau(1) = 1; for m >= 2:
    # tau(m) = 1 + sum_{k=2..m} P(m->k) tau(k)   (tau enters itself at k=m)
    tau = {1: 1.0}
    for m in range(2, M + 1):
        fact = math.factorial(m)
        p_self = 1.0 / fact
        acc = 1.0
        for k in range(2, m):
            acc += (table.exact(m, k) / fact) * tau[k]
        tau[m] = acc / (1.0 - p_self)
    return tau[M]
