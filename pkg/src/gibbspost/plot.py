"""CSV to SVG conversion for a run directory; no analysis happens here."""
from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path


def _read(path: Path) -> list[dict]:
    with path.open(newline="") as fh:
        return list(csv.DictReader(fh))


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed hash salt keeps SVG output stable across runs
    matplotlib.rcParams["svg.hashsalt"] = "gibbspost"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def plot_run(run_dir: Path, out_dir: Path) -> list[Path]:
    """Write ``trajectory_*.svg`` line plots and, for 2-D grids, ``posterior_final.svg``."""
    plt = _pyplot()
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    rows = _read(run_dir / "trajectory.csv")
    series = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r["quantity"] in ("weight", "ball_mass"):
            key = (r["quantity"], r["target"])
            series[key][int(r["replica"])].append((int(r["n"]), float(r["value"])))
    for (quantity, target), reps in sorted(series.items()):
        fig, ax = plt.subplots(figsize=(6, 4))
        for _, pts in sorted(reps.items()):
            ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=0.8, alpha=0.6)
        label = f"node {target}" if quantity == "weight" else f"delta {target}"
        ax.set_xlabel("n")
        ax.set_ylabel("posterior mass")
        ax.set_title(f"{quantity}, {label}")
        ax.set_ylim(-0.02, 1.02)
        path = out_dir / f"trajectory_{quantity}_{target}.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)

    final = _read(run_dir / "posterior_final.csv")
    if final and "theta_2" in final[0] and "theta_3" not in final[0]:
        acc = defaultdict(float)
        reps = {r["replica"] for r in final}
        for r in final:
            acc[(float(r["theta_1"]), float(r["theta_2"]))] += float(r["weight"]) / len(reps)
        xs = sorted({k[0] for k in acc})
        ys = sorted({k[1] for k in acc})
        grid = [[acc[(x, y)] for x in xs] for y in ys]
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(grid, origin="lower", extent=(xs[0], xs[-1], ys[0], ys[-1]), aspect="auto")
        fig.colorbar(im, ax=ax, label="mean posterior weight")
        ax.set_xlabel("theta_1")
        ax.set_ylabel("theta_2")
        path = out_dir / "posterior_final.svg"
        fig.savefig(path, metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written
