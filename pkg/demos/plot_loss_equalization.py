"""
Loss by arm, before and after noising starts
============================================

Noising is switched on at step 1000. Before that, agents pulling the left arm
have zero TD error while those pulling right carry the full reward variance.
Afterwards the left arm's loss is lifted towards the right arm's.
"""
from dataclasses import replace
from pathlib import Path

import numpy as np

from asrnlab import preset, run_experiment
from asrnlab.plotting import plot_loss

cfg = replace(preset("fig2"), n_agents=30, n_steps=6000)
res = run_experiment(cfg)

for lo, hi in ((0, 1000), (1100, cfg.n_steps)):
    sl = slice(lo, hi)
    print(f"steps {lo}-{hi}: loss right {np.nanmean(res.mean_loss_right[sl]):.3f}, "
          f"left {np.nanmean(res.mean_loss_left[sl]):.3f}")

out = Path("demo_out")
out.mkdir(exist_ok=True)
plot_loss(res.steps, res.mean_loss_right, res.mean_loss_left, out / "loss_equalization.svg", title="noising from step 1000")
