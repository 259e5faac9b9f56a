"""Figure rendering for the CLI report path.

Each function takes already-computed results and writes a PNG next to the
delimited output.  Plotting is opt-in (`--plot`); no numerical code depends
on anything here.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.0, 4.2),
        "figure.dpi": 150,
        "savefig.bbox": "tight",
        "axes.grid": True,
        "grid.alpha": 0.3,
        "grid.linestyle": ":",
        "lines.linewidth": 1.6,
    }
)


def save_region_figure(curve, comm, est, path: str) -> None:
    """Rate vs MSE-decay tradeoff: achievable curve (solid) and the
    classical-bound outer curve (dashed), with the two operating points."""
    pts = [p for p in curve.points if p.alpha_atbcrb is not None]
    alpha_a = [p.alpha_atbcrb for p in pts]
    alpha_b = [p.alpha_bcrb for p in pts]
    rate = [p.rate_bits for p in pts]
    fig, ax = plt.subplots()
    ax.plot(alpha_a, rate, "-", color="tab:blue", label="achievable (ATBCRB)")
    ax.plot(alpha_b, rate, "--", color="tab:red", label="BCRB outer bound")
    ax.plot([comm.alpha_atbcrb], [comm.rate_bits], "o", color="tab:blue", ms=9,
            mfc="none", label="communication-optimal")
    ax.plot([est.alpha_atbcrb], [est.rate_bits], "s", color="tab:blue", ms=9,
            mfc="none", label="estimation-optimal")
    ax.set_xlabel(r"MSE decay constant $\alpha$ (n $\times$ MSE)")
    ax.set_ylabel("rate (bits/symbol)")
    ax.set_xlim(left=0.0)
    ax.legend(fontsize=9)
    fig.savefig(path)
    plt.close(fig)


def save_bounds_figure(rows, path: str) -> None:
    """n * bound versus n with the asymptotic constants as horizontal lines."""
    n = [r["n"] for r in rows]
    fig, ax = plt.subplots()
    ax.semilogx(n, [r["n_times_atbcrb"] for r in rows], "o-", label="n * ATBCRB(n)")
    ax.semilogx(n, [r["n_times_bcrb"] for r in rows], "s-", label="n * BCRB(n)")
    ax.axhline(rows[0]["alpha_atbcrb"], color="tab:blue", ls=":", label=r"$\alpha$ (ATBCRB)")
    ax.axhline(rows[0]["alpha_bcrb"], color="tab:orange", ls=":", label=r"$\alpha$ (BCRB)")
    ax.set_xlabel("block length n")
    ax.set_ylabel("n * MSE lower bound")
    ax.legend(fontsize=9)
    fig.savefig(path)
    plt.close(fig)


def save_simulate_figure(rows, path: str) -> None:
    """Empirical n * MSE with 3-sigma error bars against the reference lines."""
    n = np.asarray([r.n for r in rows], dtype=float)
    n_mse = [r.n_mse for r in rows]
    err = [3.0 * r.n * r.stderr for r in rows]
    fig, ax = plt.subplots()
    ax.errorbar(n, n_mse, yerr=err, fmt="o-", capsize=3,
                label=f"empirical n * MSE ({rows[0].estimator})")
    ax.semilogx(n, [r.n_atbcrb_finite for r in rows], "--", label="n * ATBCRB(n)")
    ax.semilogx(n, [r.n_bcrb_finite for r in rows], "-.", label="n * BCRB(n)")
    ax.axhline(rows[0].alpha_atbcrb, color="tab:blue", ls=":", label=r"$\alpha$ (ATBCRB)")
    ax.axhline(rows[0].alpha_bcrb, color="tab:orange", ls=":", label=r"$\alpha$ (BCRB)")
    ax.set_xscale("log")
    ax.set_xlabel("block length n")
    ax.set_ylabel("n * MSE")
    ax.legend(fontsize=9)
    fig.savefig(path)
    plt.close(fig)


def save_fisher_figure(rows, labels, path: str) -> None:
    """Per-label Fisher curves, the design mixture, and the prior term."""
    s = [r["s"] for r in rows]
    fig, ax = plt.subplots()
    for lab in labels:
        ax.plot(s, [r[f"J_{lab}"] for r in rows], alpha=0.7, label=f"J[{lab}](s)")
    ax.plot(s, [r["mixture"] for r in rows], "k-", lw=2.2, label="mixture")
    ax.plot(s, [r["prior_term"] for r in rows], "k--", label="prior term")
    ax.set_xlabel("state s")
    ax.set_ylabel("Fisher information")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)


def save_rate_figure(rows, path: str) -> None:
    """Time-sharing rate profile and its pieces over the band fraction."""
    t1 = [r["t1"] for r in rows]
    fig, ax = plt.subplots()
    ax.plot(t1, [r["total"] for r in rows], "k-", lw=2.2, label="total rate")
    ax.plot(t1, [r["h2"] for r in rows], ":", label="H2(t1)")
    ax.plot(t1, [r["t1"] * r["c1"] for r in rows], "--", label="t1 * C1")
    ax.plot(t1, [(1 - r["t1"]) * r["c2_worst"] for r in rows], "-.", label="t2 * C2(worst)")
    ax.set_xlabel("band-1 fraction t1")
    ax.set_ylabel("bits/symbol")
    ax.legend(fontsize=9)
    fig.savefig(path)
    plt.close(fig)
