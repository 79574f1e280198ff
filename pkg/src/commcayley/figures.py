"""Figure rendering for report-style outputs.

Each function takes the already-serialized report dictionary (the same
object emitted on stdout) and writes one figure file, so a run's JSON
and its figures can never disagree.
"""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def ball_growth_figure(report: dict, path: str | Path) -> None:
    plt = _pyplot()
    sizes = report["layer_sizes"]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(range(len(sizes)), sizes, color="#4878a8")
    ax.set_xlabel("distance from center")
    ax.set_ylabel("new words")
    ax.set_title(
        f"S_{report['L']} ball growth around {report['center'] or 'id'} "
        f"(size {report['size']})"
    )
    ax.set_xticks(range(len(sizes)))
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def scl_sequence_figure(report: dict, path: str | Path) -> None:
    plt = _pyplot()
    from fractions import Fraction

    ns = range(1, report["n_max"] + 1)
    ratios = [
        None if u == "unknown" else u / n for n, u in zip(ns, report["uppers"])
    ]
    minima = [None if m is None else float(Fraction(m)) for m in report["minima"]]
    fig, ax = plt.subplots(figsize=(5, 3.2))
    known = [(n, r) for n, r in zip(ns, ratios) if r is not None]
    if known:
        ax.plot(*zip(*known), "o", color="#b04030", label="cl_upper(g^n)/n")
    known_min = [(n, m) for n, m in zip(ns, minima) if m is not None]
    if known_min:
        ax.step(*zip(*known_min), where="post", color="#4878a8", label="running min")
    ax.set_xlabel("n")
    ax.set_ylabel("bound")
    ax.set_title(f"scl upper bounds for {report['word']}")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def endpath_profile_figure(report: dict, path: str | Path) -> None:
    plt = _pyplot()
    from fractions import Fraction

    bounds = [float(Fraction(v["bound"])) for v in report["vertices"]]
    fig, ax = plt.subplots(figsize=(6.4, 3.2))
    ax.plot(range(len(bounds)), bounds, "-", color="#4878a8", lw=1.2)
    shades = ["#f0e0c0", "#d8e8d0", "#d0dce8", "#e8d0d8"]
    labels = ["climb", "peel", "rebuild", "descend"]
    for (lo, hi), color, label in zip(report["segments"], shades, labels):
        if hi > lo:
            ax.axvspan(lo - 0.5, hi - 0.5, color=color, alpha=0.6, label=label)
    if report.get("analytic_r") is not None:
        ax.axhline(
            max(0.0, float(Fraction(report["analytic_r"]))),
            color="#808080",
            ls="--",
            lw=0.8,
            label="analytic r",
        )
    ax.set_xlabel("vertex index")
    ax.set_ylabel("certified lower bound on d(v, id)")
    ax.set_title(
        f"avoidance path {report['g']} -> {report['h']} "
        f"(N={report['N']}, r_min={report['r_min']})"
    )
    ax.legend(frameon=False, fontsize=7, ncol=3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
