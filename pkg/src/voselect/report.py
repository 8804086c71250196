"""Report rendering for finished runs: a delimited variant table plus
matplotlib figures written next to it."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import Run  # noqa: E402


def write_variant_table(run: Run, path: Path) -> None:
    role_names = run.role_names()
    metrics = [f"{p.metric}[{p.scope}]" for p in run.spec.performance_requirements]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["rank", "fitness", *role_names, *metrics, "stale"])
        for v in run.variants:
            perf = v.performance or [None] * len(metrics)
            writer.writerow([v.rank, f"{v.fitness:.6f}", *v.genome,
                             *["" if c is None else f"{c:.6f}" for c in perf],
                             "yes" if v.stale else "no"])


def plot_fitness(run: Run, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(7, 4))
    positions = range(1, len(run.variants) + 1)
    ax.bar(positions, [v.fitness for v in run.variants], color="#4878a8")
    ax.axhline(run.spec.thresholds.phase3_fitness, color="#c44e52",
               linestyle="--", label="phase-3 threshold")
    ax.set_xlabel("variant (sorted)")
    ax.set_ylabel("social fitness")
    ax.set_ylim(0, 1.05)
    ax.set_title(f"run {run.run_id}: variant fitness")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_performance(run: Run, path: Path) -> bool:
    """Scatter of the first two performance components; returns False when
    fewer than two components are available."""
    preqs = run.spec.performance_requirements
    if len(preqs) < 2:
        return False
    points = [(v.performance[0], v.performance[1], v.rank)
              for v in run.variants
              if v.performance and v.performance[0] is not None
              and v.performance[1] is not None]
    if not points:
        return False
    fig, ax = plt.subplots(figsize=(6, 5))
    xs, ys, ranks = zip(*points)
    scatter = ax.scatter(xs, ys, c=ranks, cmap="viridis_r")
    best = min(points, key=lambda p: p[2])
    ax.annotate("rank 1", (best[0], best[1]),
                textcoords="offset points", xytext=(6, 6))
    ax.set_xlabel(f"{preqs[0].metric} ({preqs[0].direction})")
    ax.set_ylabel(f"{preqs[1].metric} ({preqs[1].direction})")
    ax.set_title(f"run {run.run_id}: performance components")
    fig.colorbar(scatter, label="rank")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return True


def render_report(run: Run, out_dir: str) -> List[str]:
    """Writes variants.csv plus figures into out_dir; returns written paths."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    table = root / "variants.csv"
    write_variant_table(run, table)
    written.append(str(table))
    if run.variants:
        fitness_png = root / "fitness.png"
        plot_fitness(run, fitness_png)
        written.append(str(fitness_png))
        perf_png = root / "performance.png"
        if plot_performance(run, perf_png):
            written.append(str(perf_png))
    return written
