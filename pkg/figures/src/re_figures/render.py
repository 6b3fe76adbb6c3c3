"""Deterministic matplotlib rendering of the validated tables.

The renderer computes nothing: every plotted value comes straight from
the CSV.  Output PNGs are byte-stable given identical inputs (Agg
backend, fixed geometry, metadata stripped).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .validate import Table  # noqa: E402

_FIGSIZE = (6.4, 4.2)
_DPI = 150


def _new_axes(xlabel, ylabel):
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def _save(fig, out_path):
    fig.tight_layout()
    fig.savefig(out_path, dpi=_DPI, metadata={"Software": None})
    plt.close(fig)


def render_fig1(table: Table, out_path: str) -> None:
    """Shift-statistic PMF curves, one per rho, with MC error bars."""
    fig, ax = _new_axes("k", "probability")
    for rho, rows in sorted(table.groups("rho").items()):
        ks = [r["k"] for r in rows]
        ps = [r["pmf"] for r in rows]
        es = [3.0 * r["mc_sigma"] for r in rows]
        ax.errorbar(ks, ps, yerr=es, marker="o", markersize=3,
                    capsize=2, label=f"rho = {rho:g}")
    ax.legend()
    _save(fig, out_path)


def render_fig2(table: Table, out_path: str) -> None:
    """Empirical CDF curves of the limit coordinates, one per k."""
    fig, ax = _new_axes("x", "cumulative probability")
    for k, rows in sorted(table.groups("k").items()):
        xs = [r["x"] for r in rows]
        cs = [r["cdf"] for r in rows]
        ax.step(xs, cs, where="post", label=f"k = {int(k)}")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    _save(fig, out_path)


def render_fig3(table: Table, out_path: str) -> None:
    """The conjugacy curve f(z)."""
    fig, ax = _new_axes("z", "f(z)")
    ax.plot(table.column("z"), table.column("f"), lw=1.5)
    _save(fig, out_path)


RENDERERS = {1: render_fig1, 2: render_fig2, 3: render_fig3}
