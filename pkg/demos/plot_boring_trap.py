"""
A population falling into the boring arm
========================================

Agents start with correct values for both arms of the broken-armed bandit:
left always pays 0, right pays N(1, 2.5^2). Exploration makes them pull
right, and unlucky draws push Q_right under zero. Once epsilon has decayed
nothing pushes it back up, because the left arm never surprises anyone.
"""
from dataclasses import replace
from pathlib import Path

from asrnlab import preset, run_experiment
from asrnlab.plotting import plot_success

# fewer agents than the full preset to keep the demo quick
cfg = replace(preset("fig1_no_asrn"), n_agents=30, n_steps=8000)
res = run_experiment(cfg)

for t in (0, 1000, 2000, 4000, cfg.n_steps - 1):
    print(f"step {t:5d}  share preferring right = {res.right_fraction[t]:.2f}")

out = Path("demo_out")
out.mkdir(exist_ok=True)
plot_success(res.steps, res.right_fraction, out / "boring_trap.svg", title="no noising")
