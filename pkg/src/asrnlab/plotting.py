"""SVG line charts for the three figure analogues. CSVs stay the source of truth."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .metrics import smooth


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "asrnlab"
    return plt


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()
    return path


def plot_success(steps, right_fraction, path: Path, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(steps, right_fraction, color="tab:red", lw=1.2)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel("step")
    ax.set_ylabel("fraction preferring right arm")
    ax.set_title(title or "agents choosing the interesting arm")
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_loss(steps, loss_right, loss_left, path: Path, window: int = 50, title: str = "") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(steps, smooth(loss_right, window), color="tab:green", lw=1.0, label="chose right")
    ax.plot(steps, smooth(loss_left, window), color="tab:red", lw=1.0, label="chose left")
    ax.set_xlabel("step")
    ax.set_ylabel(f"mean squared TD error ({window}-step average)")
    ax.set_title(title or "loss by choice")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def plot_q(steps, q, path: Path, title: str = "") -> Path:
    plt = _pyplot()
    q = np.asarray(q)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(steps, q[:, 1], color="tab:green", lw=1.0, label="Q right")
    ax.plot(steps, q[:, 0], color="tab:red", lw=1.0, label="Q left")
    ax.set_xlabel("step")
    ax.set_ylabel("Q value")
    ax.set_title(title or "Q table of one agent")
    ax.legend()
    fig.tight_layout()
    out = _save(fig, path)
    plt.close(fig)
    return out


def _f(x: str) -> float:
    return math.nan if x == "" else float(x)


def read_aggregate(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    steps = np.array([int(r["step"]) for r in rows])
    rf = np.array([_f(r["right_fraction"]) for r in rows])
    mr = np.array([_f(r["mean_loss_right"]) for r in rows])
    ml = np.array([_f(r["mean_loss_left"]) for r in rows])
    return steps, rf, mr, ml


def read_agent_q(path: Path, agent_id: int | None = None):
    """Steps and Q rows of one agent from steps.csv (the first agent by default)."""
    steps, q = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        qcols = [i for i, h in enumerate(header) if h.startswith("q_")]
        a_col, s_col = header.index("agent_id"), header.index("step")
        for row in reader:
            aid = int(row[a_col])
            if agent_id is None:
                agent_id = aid
            if aid != agent_id:
                if steps:
                    break
                continue
            steps.append(int(row[s_col]))
            q.append([float(row[i]) for i in qcols])
    return np.array(steps), np.array(q).reshape(len(steps), -1)


def render_all(out_dir: str | Path, result=None) -> list[Path]:
    """Write fig1.svg, fig2.svg and fig3.svg into ``out_dir``.

    Uses ``result`` when given, otherwise re-reads the CSVs in ``out_dir``.
    """
    out = Path(out_dir)
    if result is not None:
        steps, rf, mr, ml = result.steps, result.right_fraction, result.mean_loss_right, result.mean_loss_left
        tr = result.traces[0] if result.traces else None
        qsteps, q = (tr.steps, tr.q) if tr is not None else (np.empty(0), np.empty((0, 2)))
        name = result.run_id
    else:
        steps, rf, mr, ml = read_aggregate(out / "aggregate.csv")
        qsteps, q = read_agent_q(out / "steps.csv")
        name = out.name
    paths = []
    if len(steps):
        paths.append(plot_success(steps, rf, out / "fig1.svg", title=f"{name}: right-arm preference"))
        paths.append(plot_loss(steps, mr, ml, out / "fig2.svg", title=f"{name}: loss by choice"))
    if len(qsteps):
        paths.append(plot_q(qsteps, q, out / "fig3.svg", title=f"{name}: Q table of agent 0"))
    return paths
