"""Command-line front end.

Subcommands
-----------
simulate   run leader elections or block-merging chains, one CSV row per rep
estimate   Monte-Carlo estimators of the limit laws, CSV per grid point
verify     named invariant suites, JSON report, exit 1 on failure

Populations accept plain integers or tower literals: ``E(n,rho)`` is the
modified n-fold exponential (exp(x-1) iterated), ``EE(n,rho)`` the plain
n-fold exponential.  Same seed and parameters give byte-identical output.
Seed falls back to the ``RE_SEED`` environment variable.  Exit codes:
0 ok, 1 verification failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys

import numpy as np

from .coalescent import estimate_X1_limit, run_coalescent
from .election import leader_election_statistic
from .limits import (
    estimate_N_star,
    estimate_S_star_cdf,
    estimate_spacings,
    estimate_T0_star_pmf,
    estimate_T_star_pmf,
)
from .numerics import TowerReal, conjugacy_f, modified_tetration, standard_tetration
from .records import RecordSamplerConfig
from .rng import make_rng, seed_from_env
from .stats import EmpiricalDist, mean_ci
from .verification import SUITES, run_suite

_TOWER_RE = re.compile(r"^(EE?)\((\d+),([-+0-9.eE]+)\)$")


def parse_population(text: str):
    """Integer, or tower literal E(n,rho) / EE(n,rho)."""
    m = _TOWER_RE.match(text.strip())
    if m is None:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"expected an integer or E(n,rho)/EE(n,rho), got {text!r}"
            )
        if v < 1:
            raise argparse.ArgumentTypeError("population must be >= 1")
        return v
    kind, n, rho = m.group(1), int(m.group(2)), float(m.group(3))
    try:
        val = (modified_tetration(n, rho) if kind == "E"
               else standard_tetration(n, rho))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))
    return val if isinstance(val, TowerReal) else TowerReal.from_value(val)


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.12g}"
    return str(v)


def _write_table(path, columns, rows, fmt, summary=None):
    if fmt == "json":
        payload = {
            "columns": list(columns),
            "rows": [[(None if isinstance(v, float) and math.isnan(v)
                       else v) for v in map(_coerce, row)] for row in rows],
        }
        if summary is not None:
            payload["summary"] = summary
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        _emit(path, text)
        return
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _emit(path, buf.getvalue())


def _coerce(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    return v


def _emit(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as f:
            f.write(text)


def _rngs(seed, streams):
    return [make_rng(seed, i) for i in range(streams)]


def _split(total, streams):
    base, extra = divmod(total, streams)
    return [base + (1 if i < extra else 0) for i in range(streams)]


# ---------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = RecordSamplerConfig(theta=args.theta)
    rows = []
    rep = 0
    if args.kind == "election":
        columns = ("rep", "T", "T0", "log_star_M", "shift", "ratio")
        for rng, count in zip(_rngs(args.seed, args.streams),
                              _split(args.reps, args.streams)):
            for _ in range(count):
                s = leader_election_statistic(args.M, rng, cfg)
                rows.append((rep, s.T, s.T0, s.log_star_M, s.shift, s.ratio))
                rep += 1
        vals = np.array([r[1] for r in rows], dtype=float)
    else:
        columns = ("rep", "collisions")
        for rng, count in zip(_rngs(args.seed, args.streams),
                              _split(args.reps, args.streams)):
            for _ in range(count):
                chain = run_coalescent(args.n, rng, args.theta, cfg)
                rows.append((rep, chain.collisions))
                rep += 1
        vals = np.array([r[1] for r in rows], dtype=float)
    summary = None
    if len(vals) >= 2 and vals.std() > 0:
        lo, hi = mean_ci(EmpiricalDist(vals), 0.99)
        summary = {"mean": float(vals.mean()), "ci99": [lo, hi]}
    elif len(vals) >= 1:
        summary = {"mean": float(vals.mean()), "ci99": None}
    _write_table(args.out, columns, rows, args.format, summary)
    if args.out not in (None, "-") and summary is not None:
        sys.stdout.write(
            f"wrote {len(rows)} rows to {args.out}; "
            f"mean {columns[1]} = {_fmt(summary['mean'])}\n")
    return 0


# ---------------------------------------------------------------------
# estimate
# ---------------------------------------------------------------------


def cmd_estimate(args) -> int:
    rng = make_rng(args.seed, args.stream)
    t = args.target
    if t == "s-star-cdf":
        grid = None
        if args.grid_max is not None:
            grid = np.linspace(args.grid_min, args.grid_max, args.grid_points)
        est = estimate_S_star_cdf(args.k, args.samples, rng, grid=grid)
        _write_table(args.out, ("k", "x", "cdf"), est.table, args.format)
    elif t == "t-star-pmf":
        rows = []
        s2 = None
        for rho in args.rho:
            est = estimate_T_star_pmf(rho, (args.kmin, args.kmax),
                                      args.samples, rng, s2_samples=s2)
            s2 = est.dist.samples  # share one sample set across the grid
            rows.extend(est.table)
        _write_table(args.out, ("rho", "k", "pmf", "mc_sigma"), rows, args.format)
    elif t == "t0-star-pmf":
        rows = []
        for rho in args.rho:
            est = estimate_T0_star_pmf(rho, args.level, args.samples, rng)
            rows.extend(est.table)
        _write_table(args.out, ("rho", "k", "pmf", "mc_sigma"), rows, args.format)
    elif t == "x1-shift":
        rows = []
        for rho in args.rho:
            shifts = estimate_X1_limit(rho, args.level, args.samples, rng)
            ks, counts = EmpiricalDist(shifts).pmf_counts()
            n = len(shifts)
            for k, c in zip(ks, counts):
                p = c / n
                rows.append((rho, int(k), p, math.sqrt(p * (1 - p) / n)))
        _write_table(args.out, ("rho", "k", "pmf", "mc_sigma"), rows, args.format)
    elif t == "f-curve":
        zs = []
        z = args.zmin
        while z <= args.zmax + 1e-12:
            zs.append(round(z, 12))
            z += args.step
        rows = [(z, conjugacy_f(z)) for z in zs]
        _write_table(args.out, ("z", "f"), rows, args.format)
    elif t == "spacings":
        est = estimate_spacings(args.k, args.m, args.samples, rng)
        columns = ("rep",) + tuple(f"gap_{args.k + i}" for i in range(args.m))
        rows = [(i, *map(float, g)) for i, g in enumerate(est.table)]
        _write_table(args.out, columns, rows, args.format)
    elif t == "n-star":
        est = estimate_N_star(args.rho, args.samples, rng)
        _write_table(args.out, ("rho", "mean", "mc_sigma"), est.table, args.format)
    else:  # pragma: no cover - argparse restricts choices
        raise SystemExit(2)
    return 0


# ---------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------


def cmd_verify(args) -> int:
    report = run_suite(args.suite, args.seed, args.budget)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    _emit(args.out, text)
    if args.out not in (None, "-"):
        n_ok = sum(c["passed"] for c in report["checks"])
        sys.stdout.write(
            f"{args.suite}: {n_ok}/{len(report['checks'])} checks passed\n")
    return 0 if report["all_passed"] else 1


# ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="record-election",
        description="Record-based leader elections, their iterated-log "
                    "limit laws, and the block-merging chain they bridge to.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, streams=False):
        sp.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default: RE_SEED env or built-in)")
        sp.add_argument("--out", default=None,
                        help="output path ('-' or omitted: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        if streams:
            sp.add_argument("--streams", type=int, default=1,
                            help="split reps across independent substreams")
        else:
            sp.add_argument("--stream", type=int, default=0,
                            help="substream index for this invocation")

    sim = sub.add_parser("simulate", help="run simulations, one row per rep")
    simsub = sim.add_subparsers(dest="kind", required=True)
    se = simsub.add_parser("election")
    se.add_argument("--M", type=parse_population, required=True,
                    help="population: integer or E(n,rho)/EE(n,rho)")
    se.add_argument("--theta", type=float, default=1.0)
    se.add_argument("--reps", type=int, default=100)
    common(se, streams=True)
    sc = simsub.add_parser("coalescent")
    sc.add_argument("--n", type=parse_population, required=True,
                    help="initial block count: integer or tower literal")
    sc.add_argument("--theta", type=float, default=1.0)
    sc.add_argument("--reps", type=int, default=100)
    common(sc, streams=True)

    est = sub.add_parser("estimate", help="Monte-Carlo limit-law estimators")
    estsub = est.add_subparsers(dest="target", required=True)

    e = estsub.add_parser("s-star-cdf")
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--samples", type=int, default=10000)
    e.add_argument("--grid-min", type=float, default=1.0)
    e.add_argument("--grid-max", type=float, default=None)
    e.add_argument("--grid-points", type=int, default=200)
    common(e)

    e = estsub.add_parser("t-star-pmf")
    e.add_argument("--rho", type=_float_list, default=[2.0],
                   help="comma-separated rho values (> 1)")
    e.add_argument("--kmin", type=int, default=-4)
    e.add_argument("--kmax", type=int, default=4)
    e.add_argument("--samples", type=int, default=10000)
    common(e)

    e = estsub.add_parser("t0-star-pmf")
    e.add_argument("--rho", type=_float_list, default=[2.0])
    e.add_argument("--level", type=int, default=3)
    e.add_argument("--samples", type=int, default=2000)
    common(e)

    e = estsub.add_parser("x1-shift")
    e.add_argument("--rho", type=_float_list, default=[2.0])
    e.add_argument("--level", type=int, default=3)
    e.add_argument("--samples", type=int, default=2000)
    common(e)

    e = estsub.add_parser("f-curve")
    e.add_argument("--zmin", type=float, default=-6.0)
    e.add_argument("--zmax", type=float, default=4.0)
    e.add_argument("--step", type=float, default=0.05)
    common(e)

    e = estsub.add_parser("spacings")
    e.add_argument("--k", type=int, default=2)
    e.add_argument("--m", type=int, default=1)
    e.add_argument("--samples", type=int, default=5000)
    common(e)

    e = estsub.add_parser("n-star")
    e.add_argument("--rho", type=_float_list, default=[1.0, 2.0, 4.0, 8.0],
                   help="comma-separated rho grid in [1, inf)")
    e.add_argument("--samples", type=int, default=2000)
    common(e)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=SUITES + ("all",))
    v.add_argument("--budget", type=float, default=1.0,
                   help="sample-size multiplier for all checks")
    common(v)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.seed = seed_from_env(args.seed)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        if args.command == "estimate":
            return cmd_estimate(args)
        return cmd_verify(args)
    except (ValueError, OverflowError) as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
