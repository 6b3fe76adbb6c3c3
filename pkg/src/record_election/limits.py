"""Monte-Carlo estimation of the limit objects.

The limit point process ``S* = (S*_1, S*_2, ...)`` is sampled by backward
iterations: fresh record-time maps ``nu^(n)`` are applied level by level,

    eta_j^(0) = j,    eta_j^(n) = nu^(n)(eta_j^(n-1)),

and the normalized values ``X_{n,j} = L_n(eta_j^(n))`` converge almost
surely.  Within a level, ALL coordinates are driven by one shared
record-time environment (one multiplicative recursion path), which is what
preserves the joint law -- spacings and the counting process N* would be
wrong under independent per-coordinate sampling.

Numerically, a coordinate's eta is carried

* as an exact integer while it is at most the exact record-time threshold,
* as ``log eta`` afterwards (one level's record map adds a Gamma(gap)
  increment to ``log eta`` between consecutive query points, exactly the
  sum of the ``-log U`` steps of the shared recursion),
* not at all once ``log eta`` exceeds ~50 (eta beyond 2^62): the remaining
  fluctuations of X sit below the convergence tolerance and the
  coordinate freezes.

Derived estimators: S* marginal CDFs, the T*(rho) PMF through the S_2*
connection ``P{T*(rho) <= k} = P{S_2* > L_k(rho)}``, spacings, N*(rho),
the psi fixed point, the forward-hybrid T0*(rho) PMF, and the tilde
versions through the conjugacy f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import TowerReal, conjugacy_f, modified_iterlog, modified_tetration
from .records import DEFAULT_CONFIG, RecordSamplerConfig, williams_int_path
from .stats import EmpiricalDist

__all__ = [
    "BackwardIterSample",
    "LimitEstimate",
    "sample_S_star",
    "sample_S_star_batch",
    "estimate_S_star_cdf",
    "estimate_T_star_pmf",
    "estimate_T_tilde_star",
    "estimate_T0_star_pmf",
    "estimate_spacings",
    "check_fixed_point_psi",
    "estimate_N_star",
    "forward_second_survivor",
    "iterlog_grid",
]

_ELL_FREEZE = 50.0  # log eta beyond this: eta > 2^62, increments < tol


@dataclass
class BackwardIterSample:
    """One backward-iteration realization."""

    coords: np.ndarray              # X*_j, j = 1..J
    levels_used: int
    converged: np.ndarray           # bool per coordinate
    trajectory: dict = field(default_factory=dict)  # level -> X snapshot


@dataclass
class LimitEstimate:
    kind: str
    params: dict
    dist: EmpiricalDist | None
    n_samples: int
    seed: int | None = None
    table: list = field(default_factory=list)  # rows for CSV export


# ---------------------------------------------------------------------
# batched backward iteration
# ---------------------------------------------------------------------

_STAGE_EXACT, _STAGE_LOG, _STAGE_FROZEN = 0, 1, 2


def sample_S_star_batch(J: int, n_batch: int, rng: np.random.Generator,
                        tol: float = 1e-9, cap: int = 60,
                        config: RecordSamplerConfig = DEFAULT_CONFIG,
                        trajectory_levels: tuple = ()) -> dict:
    """Vectorized backward iteration: ``n_batch`` joint samples of S*_{1..J}.

    Returns arrays ``coords (B,J)``, ``converged (B,J)``, ``levels_used
    (B,)`` and per-level snapshots for the requested levels.
    """
    if J < 2:
        raise ValueError("J must be >= 2")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if config.theta != 1.0:
        raise ValueError("backward iteration requires theta = 1")
    thr = config.exact_record_time_threshold
    B = n_batch

    j_idx = np.arange(1, J + 1, dtype=np.float64)
    eta = np.broadcast_to(j_idx, (B, J)).copy()       # exact stage value
    ell = np.where(j_idx > thr, np.log(j_idx), np.nan)
    ell = np.broadcast_to(ell, (B, J)).copy()          # log stage value
    stage = np.where(j_idx <= thr, _STAGE_EXACT, _STAGE_LOG)
    stage = np.broadcast_to(stage, (B, J)).copy().astype(np.int8)
    X = np.broadcast_to(j_idx, (B, J)).copy()          # X_{0,j} = j
    converged = np.zeros((B, J), dtype=bool)
    levels_used = np.zeros(B, dtype=np.int64)
    snapshots: dict[int, np.ndarray] = {}

    for n in range(1, cap + 1):
        active = stage != _STAGE_FROZEN
        rows = np.nonzero(active.any(axis=1))[0]
        if rows.size == 0:
            break
        levels_used[rows] = n

        # shared record-time environment per (row, level): one exact
        # multiplicative recursion path to the threshold index ...
        nr = rows.size
        path = np.empty((nr, thr))
        logpath = np.zeros((nr, thr))
        path[:, 0] = 1.0
        r = np.ones(nr)
        logr = np.zeros(nr)
        for k in range(1, thr):
            u = rng.random(nr)
            big = r > 2**52
            r = np.where(big, np.inf, np.ceil(r / np.where(big, 1.0, u)))
            logr = np.where(big, logr - np.log(u), np.log(np.minimum(r, 1e300)))
            path[:, k] = r
            logpath[:, k] = logr
        log_at_thr = logr

        sub_stage = stage[rows]
        sub_eta = eta[rows]
        sub_ell = ell[rows]

        ex = (sub_stage == _STAGE_EXACT)
        lg = (sub_stage == _STAGE_LOG)

        eta_new = np.full((nr, J), np.nan)
        ell_new = np.full((nr, J), np.nan)

        if ex.any():
            ri, ci = np.nonzero(ex)
            q = sub_eta[ri, ci].astype(np.int64)
            v = path[ri, q - 1]
            eta_new[ri, ci] = v
            with np.errstate(divide="ignore"):
                ell_new[ri, ci] = np.where(np.isinf(v), logpath[ri, q - 1],
                                           np.log(v))

        if lg.any():
            # ... then Gamma increments of log eta between consecutive
            # query points of the same row (the -log U sums of the shared
            # path between those indices), anchored at the threshold
            m = np.where(lg, np.exp(np.where(lg, sub_ell, 0.0)), float(thr))
            prev = np.maximum.accumulate(
                np.concatenate([np.full((nr, 1), float(thr)), m[:, :-1]], axis=1),
                axis=1,
            )
            gaps = np.where(lg, np.maximum(m - np.maximum(prev, float(thr)), 0.0), 0.0)
            incr = np.zeros_like(gaps)
            gmask = lg & (gaps > 0)
            if gmask.any():
                incr[gmask] = rng.gamma(gaps[gmask])
            cum = np.cumsum(np.where(lg, incr, 0.0), axis=1)
            lognu = log_at_thr[:, None] + cum
            ell_new = np.where(lg, np.maximum(lognu, np.where(lg, sub_ell, 0.0)),
                               ell_new)

        act = ex | lg
        new_exact = act & (eta_new <= thr)
        new_log = act & ~new_exact

        # X_{n,j} = L_n(eta): start from 1 + log eta, unwind n-1 more logs
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(new_exact, np.log(np.where(act, eta_new, 1.0)), ell_new)
        Xn = 1.0 + w
        for _ in range(n - 1):
            Xn = np.where(act, 1.0 + np.log(np.where(act, Xn, 1.0)), Xn)

        sub_X = X[rows]
        delta = np.abs(np.where(act, Xn - sub_X, 0.0))
        X[rows] = np.where(act, Xn, sub_X)
        eta[rows] = np.where(new_exact, eta_new, sub_eta)
        ell[rows] = np.where(new_log, ell_new, sub_ell)

        froze = act & ((delta < tol) | (np.where(act, ell_new, 0.0) > _ELL_FREEZE))
        ns = np.where(new_exact, _STAGE_EXACT, _STAGE_LOG).astype(np.int8)
        ns = np.where(froze, _STAGE_FROZEN, ns)
        stage[rows] = np.where(act, ns, sub_stage)
        conv = converged[rows]
        converged[rows] = np.where(froze, True, conv)

        if n in trajectory_levels:
            snapshots[n] = X.copy()

    return {
        "coords": X,
        "converged": converged,
        "levels_used": levels_used,
        "snapshots": snapshots,
    }


def sample_S_star(J: int, rng: np.random.Generator, tol: float = 1e-9,
                  cap: int = 60,
                  config: RecordSamplerConfig = DEFAULT_CONFIG,
                  trajectory_levels: tuple = ()) -> BackwardIterSample:
    """One joint backward-iteration sample of S*_{1..J}."""
    out = sample_S_star_batch(J, 1, rng, tol, cap, config, trajectory_levels)
    return BackwardIterSample(
        coords=out["coords"][0],
        levels_used=int(out["levels_used"][0]),
        converged=out["converged"][0],
        trajectory={lv: snap[0] for lv, snap in out["snapshots"].items()},
    )


_BATCH_CHUNK = 2000


def _batched_coords(J: int, n_samples: int, rng, tol=1e-9, cap=60,
                    config=DEFAULT_CONFIG, trajectory_levels=()) -> dict:
    chunks = []
    conv = []
    snaps: dict[int, list] = {lv: [] for lv in trajectory_levels}
    remaining = n_samples
    while remaining > 0:
        b = min(_BATCH_CHUNK, remaining)
        out = sample_S_star_batch(J, b, rng, tol, cap, config, trajectory_levels)
        chunks.append(out["coords"])
        conv.append(out["converged"])
        for lv in trajectory_levels:
            snaps[lv].append(out["snapshots"][lv])
        remaining -= b
    return {
        "coords": np.concatenate(chunks, axis=0),
        "converged": np.concatenate(conv, axis=0),
        "snapshots": {lv: np.concatenate(v, axis=0) for lv, v in snaps.items()},
    }


# ---------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------


def estimate_S_star_cdf(k: int, n_samples: int, rng: np.random.Generator,
                        grid: np.ndarray | None = None,
                        config: RecordSamplerConfig = DEFAULT_CONFIG) -> LimitEstimate:
    """Empirical CDF of S*_k (k >= 2) on a grid; rows for s_star_cdf.csv."""
    if k < 2:
        raise ValueError("k must be >= 2")
    J = max(k, 2)
    out = _batched_coords(J, n_samples, rng, config=config)
    samples = out["coords"][:, k - 1]
    dist = EmpiricalDist(samples)
    if grid is None:
        hi = float(np.quantile(samples, 0.999))
        grid = np.linspace(1.0, max(hi, 2.0), 200)
    rows = [(k, float(x), float(dist.cdf(float(x)))) for x in grid]
    return LimitEstimate("S_star_cdf", {"k": k}, dist, n_samples, table=rows)


def sample_S2_star(n_samples: int, rng: np.random.Generator,
                   config: RecordSamplerConfig = DEFAULT_CONFIG) -> np.ndarray:
    """S_2* samples (J=2 backward iteration), the T* workhorse."""
    return _batched_coords(2, n_samples, rng, config=config)["coords"][:, 1]


def iterlog_grid(rho: float, k_min: int, k_max: int) -> list[float]:
    """``L_k(rho)`` for k in [k_min-1, k_max], +inf when out of float range."""
    out = []
    for k in range(k_min - 1, k_max + 1):
        try:
            v = modified_iterlog(k, rho)
        except (OverflowError, ValueError):
            out.append(math.inf)
            continue
        out.append(v.value if isinstance(v, TowerReal) else float(v))
    return out


def estimate_T_star_pmf(rho: float, k_range: tuple, n_samples: int,
                        rng: np.random.Generator,
                        s2_samples: np.ndarray | None = None,
                        config: RecordSamplerConfig = DEFAULT_CONFIG) -> LimitEstimate:
    """PMF of T*(rho) over k_range via S_2* binning.

    ``P{T*(rho) = k} = P{L_k(rho) <= S_2* < L_{k-1}(rho)}`` (L_{-n} = E_n).
    """
    if rho <= 1.0:
        raise ValueError("rho must exceed 1")
    k_min, k_max = k_range
    if k_min > k_max:
        raise ValueError("empty k range")
    if s2_samples is None:
        s2_samples = sample_S2_star(n_samples, rng, config)
    n = s2_samples.size
    edges = iterlog_grid(rho, k_min, k_max)  # L_{k_min-1} .. L_{k_max}
    rows = []
    for i, k in enumerate(range(k_min, k_max + 1)):
        hi = edges[k - k_min]       # L_{k-1}(rho)
        lo = edges[k - k_min + 1]   # L_k(rho)
        p = float(np.mean((s2_samples >= lo) & (s2_samples < hi)))
        sigma = math.sqrt(max(p * (1 - p), 1e-300) / n)
        rows.append((rho, k, p, sigma))
    dist = EmpiricalDist(s2_samples)
    return LimitEstimate("T_star_pmf", {"rho": rho, "k_range": list(k_range)},
                         dist, n, table=rows)


def estimate_T_tilde_star(rho: float, k_range: tuple, n_samples: int,
                          rng: np.random.Generator,
                          s2_samples: np.ndarray | None = None,
                          config: RecordSamplerConfig = DEFAULT_CONFIG) -> LimitEstimate:
    """PMF of the standard-tetration version: T~*(rho) = T*(f(rho))."""
    est = estimate_T_star_pmf(conjugacy_f(rho), k_range, n_samples, rng,
                              s2_samples, config)
    est.kind = "T_tilde_star_pmf"
    est.params = {"rho": rho, "f_rho": est.params["rho"],
                  "k_range": list(k_range)}
    return est


def estimate_T0_star_pmf(rho: float, n_level: int, n_samples: int,
                         rng: np.random.Generator,
                         config: RecordSamplerConfig = DEFAULT_CONFIG) -> LimitEstimate:
    """PMF of T0([E_n(rho)]) - n via the forward hybrid at level n_level."""
    from .election import run_election_tower

    if rho <= 1.0:
        raise ValueError("rho must exceed 1")
    base = modified_tetration(n_level, rho)
    vals = np.empty(n_samples, dtype=np.int64)
    for i in range(n_samples):
        trace = run_election_tower(base, rng, config)
        vals[i] = trace.T0 - n_level
    dist = EmpiricalDist(vals)
    ks, counts = dist.pmf_counts()
    rows = [(rho, int(k), c / n_samples,
             math.sqrt((c / n_samples) * (1 - c / n_samples) / n_samples))
            for k, c in zip(ks, counts)]
    return LimitEstimate("T0_star_pmf", {"rho": rho, "n_level": n_level},
                         dist, n_samples, table=rows)


def estimate_spacings(k: int, m: int, n_samples: int,
                      rng: np.random.Generator,
                      config: RecordSamplerConfig = DEFAULT_CONFIG) -> LimitEstimate:
    """Joint samples of (S*_{k+1}-S*_k, ..., S*_{k+m}-S*_{k+m-1})."""
    if k < 2 or m < 1:
        raise ValueError("need k >= 2, m >= 1")
    J = k + m
    coords = _batched_coords(J, n_samples, rng, config=config)["coords"]
    gaps = np.diff(coords[:, k - 1: k + m], axis=1)
    dist = EmpiricalDist(gaps[:, 0])
    est = LimitEstimate("spacings", {"k": k, "m": m}, dist, n_samples)
    est.table = [tuple(row) for row in gaps]
    return est


def check_fixed_point_psi(J: int, n_samples: int, rng: np.random.Generator,
                          coords_out: int | None = None,
                          config: RecordSamplerConfig = DEFAULT_CONFIG) -> dict:
    """Apply psi: x -> (L_1(x_{nu(j)}))_j with fresh record times to S* samples.

    Returns per-coordinate sample pairs (psi(S*)_j vs S*_j) for j up to
    ``coords_out`` (default ~log J).  A coordinate's psi value exists only
    when the fresh record time nu(j) lands within J; other entries are NaN
    (probability ~ j/J for small j).  A coordinate with under 90% valid
    entries raises: J is insufficient for it.
    """
    if J < 16:
        raise ValueError("J too small for the psi check")
    m_out = coords_out or max(2, int(math.log(J)))
    coords = _batched_coords(J, n_samples, rng, config=config)["coords"]
    psi_vals = np.full((n_samples, m_out), np.nan)
    for i in range(n_samples):
        nu = williams_int_path(J, rng)  # fresh shared record times <= J
        m = min(len(nu), m_out)
        idx = np.array(nu[:m], dtype=np.int64)
        psi_vals[i, :m] = 1.0 + np.log(coords[i, idx - 1])
    valid_frac = (~np.isnan(psi_vals)).mean(axis=0)
    if valid_frac.min() < 0.9:
        raise ValueError(
            f"J={J} insufficient: coordinate validity {valid_frac.tolist()}"
        )
    return {
        "psi": psi_vals,
        "orig": coords[:, :m_out],
        "valid_frac": valid_frac,
        "m_out": m_out,
    }


def estimate_N_star(rho_grid, n_samples: int, rng: np.random.Generator,
                    config: RecordSamplerConfig = DEFAULT_CONFIG) -> LimitEstimate:
    """N*(rho) = #{k: S*_k <= rho} over a grid of rho."""
    rho_grid = [float(r) for r in rho_grid]
    if any(r < 1.0 for r in rho_grid):
        raise ValueError("rho grid must lie in [1, inf)")
    J = int(max(rho_grid) * 2 + 40)
    coords = _batched_coords(J, n_samples, rng, config=config)["coords"]
    rows = []
    counts = {}
    for r in rho_grid:
        c = (coords <= r).sum(axis=1)
        counts[r] = c
        rows.append((r, float(c.mean()),
                     float(c.std(ddof=1) / math.sqrt(n_samples))))
    est = LimitEstimate("N_star", {"rho_grid": rho_grid},
                        EmpiricalDist(counts[rho_grid[0]]), n_samples,
                        table=rows)
    est.params["counts"] = counts
    return est


def forward_second_survivor(M: int, level: int, n_samples: int,
                            rng: np.random.Generator,
                            config: RecordSamplerConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Forward oracle: L_level(S_2^(level)) from population M.

    Returns NaN for runs where fewer than two players survive ``level``
    rounds (the event S_2^(level) > M; callers condition accordingly).
    """
    from .election import run_election_exact

    out = np.full(n_samples, np.nan)
    for i in range(n_samples):
        trace = run_election_exact(M, rng, config, keep_labels=True,
                                   label_rounds=level)
        if trace.survivor_labels is None or len(trace.survivor_labels) < level:
            continue
        labels = trace.survivor_labels[level - 1]
        if len(labels) < 2:
            continue
        out[i] = modified_iterlog(level, float(labels[1]))
    return out
