"""
Trap episodes of a single agent
===============================

With a slightly noisy left arm the trap is not absorbing: a run of low left
rewards can drag Q_left below Q_right again. Quieter left arms make those
runs rarer, so episodes last longer.
"""
from dataclasses import replace
from pathlib import Path

from asrnlab import preset, run_agent, run_experiment, trap_duration_stats
from asrnlab.experiment import sigma_sweep_configs
from asrnlab.plotting import plot_q

cfg = preset("fig3")
tr = run_agent(cfg, 0)
for ev in tr.events[:5]:
    print(f"trapped at step {ev.entry_step}, released at {ev.exit_step}")

out = Path("demo_out")
out.mkdir(exist_ok=True)
plot_q(tr.steps, tr.q, out / "trap_episode.svg")

# median episode length against the left arm's noise
base = replace(preset("sigma_sweep"), n_agents=50)
for c in sigma_sweep_configs(base):
    stats = trap_duration_stats(run_experiment(c).events, c.n_steps)
    print(f"sigma_left {c.env.arms[0].sigma:4g}: median trap length {stats.median_duration}")
