"""Population analytics: who prefers which arm, loss by arm, trap episodes.

Arm 0 is "left" (the boring arm) and arm 1 is "right" (the interesting arm)
throughout; for wider bandits pass other indices explicitly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bandit import EnvSpec
from .rng import NormalParams


@dataclass(frozen=True)
class StepRecord:
    step: int
    agent_id: int
    action: int
    raw_reward: float
    emitted_reward: float
    delta: float
    q_snapshot: tuple[float, ...]
    epsilon: float
    interest: float | None = None
    i_med: float | None = None


@dataclass(frozen=True)
class TrapEvent:
    agent_id: int
    entry_step: int
    exit_step: int | None = None

    def __post_init__(self) -> None:
        if self.exit_step is not None and self.exit_step <= self.entry_step:
            raise ValueError("exit_step must come after entry_step")


@dataclass(frozen=True)
class TrapStats:
    median_duration: float | None
    never_exit_fraction: float
    durations: tuple[float, ...]


def preference_scores(q: np.ndarray, left: int = 0, right: int = 1) -> np.ndarray:
    """1 where Q_right > Q_left, 0 where Q_left > Q_right, 0.5 on a tie.

    ``q`` has arms on the last axis.
    """
    q = np.asarray(q, dtype=float)
    qr, ql = q[..., right], q[..., left]
    return np.where(qr > ql, 1.0, np.where(ql > qr, 0.0, 0.5))


def right_fraction(q_snapshots, left: int = 0, right: int = 1) -> float:
    """Share of agents whose greedy preference is the right arm.

    ``q_snapshots`` holds one Q table per agent, all taken at the same step.
    """
    q = np.asarray(q_snapshots, dtype=float)
    if q.ndim != 2 or q.shape[0] == 0:
        raise ValueError("right_fraction needs a non-empty population of Q tables")
    return float(preference_scores(q, left, right).mean())


@dataclass(frozen=True)
class LossByChoice:
    mean_loss_right: float | None
    mean_loss_left: float | None
    n_right: int
    n_left: int


def loss_groups(actions, q_snapshots, by: str = "action", left: int = 0, right: int = 1):
    """Boolean masks (right_group, left_group) over agents at one step.

    ``by="action"`` groups on the arm actually pulled; ``by="preference"``
    groups on the greedy arm of the post-update table and drops ties.
    """
    if by == "action":
        a = np.asarray(actions)
        return a == right, a == left
    if by == "preference":
        s = preference_scores(q_snapshots, left, right)
        return s == 1.0, s == 0.0
    raise ValueError(f"unknown grouping {by!r}; use 'action' or 'preference'")


def mean_loss_by_choice(deltas, actions=None, q_snapshots=None, by: str = "action",
                        left: int = 0, right: int = 1) -> LossByChoice:
    """Mean squared TD error of right- and left-choosing agents at one step."""
    d2 = np.asarray(deltas, dtype=float) ** 2
    gr, gl = loss_groups(actions, q_snapshots, by, left, right)
    nr, nl = int(gr.sum()), int(gl.sum())
    return LossByChoice(
        float(d2[gr].mean()) if nr else None,
        float(d2[gl].mean()) if nl else None,
        nr,
        nl,
    )


def loss_curves(deltas: np.ndarray, actions: np.ndarray, q: np.ndarray, by: str = "action",
                left: int = 0, right: int = 1):
    """Vectorised :func:`mean_loss_by_choice` over a whole run.

    ``deltas`` and ``actions`` are (agents, steps); ``q`` is (agents, steps, arms).
    Returns (mean_right, mean_left, n_right, n_left) with NaN for empty groups.
    """
    d2 = np.asarray(deltas, dtype=float) ** 2
    gr, gl = loss_groups(actions, q, by, left, right)
    nr = gr.sum(axis=0)
    nl = gl.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mr = np.where(nr > 0, (d2 * gr).sum(axis=0) / nr, np.nan)
        ml = np.where(nl > 0, (d2 * gl).sum(axis=0) / nl, np.nan)
    return mr, ml, nr.astype(int), nl.astype(int)


def smooth(values: Sequence[float], window: int = 50) -> np.ndarray:
    """Trailing moving average that skips NaNs; for plotting only."""
    v = np.asarray(values, dtype=float)
    ok = ~np.isnan(v)
    cs = np.concatenate([[0.0], np.cumsum(np.where(ok, v, 0.0))])
    cn = np.concatenate([[0], np.cumsum(ok)])
    idx = np.arange(1, len(v) + 1)
    lo = np.maximum(0, idx - window)
    n = cn[idx] - cn[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(n > 0, (cs[idx] - cs[lo]) / n, np.nan)


def trap_events_from_q(steps: Sequence[int], q: np.ndarray, agent_id: int = 0,
                       left: int = 0, right: int = 1) -> list[TrapEvent]:
    """Scan a Q trajectory for trap entries (Q_l > Q_r) and exits (Q_r > Q_l).

    Equality keeps the current regime. The run counts as untrapped at its
    first snapshot unless Q_l > Q_r there.
    """
    q = np.asarray(q, dtype=float)
    events: list[TrapEvent] = []
    trapped = False
    entry = 0
    for t, row in zip(steps, q):
        ql, qr = row[left], row[right]
        if not trapped and ql > qr:
            trapped, entry = True, int(t)
        elif trapped and qr > ql:
            events.append(TrapEvent(agent_id, entry, int(t)))
            trapped = False
    if trapped:
        events.append(TrapEvent(agent_id, entry, None))
    return events


def detect_trap_events(trace: Iterable[StepRecord], left: int = 0, right: int = 1) -> list[TrapEvent]:
    records = list(trace)
    if not records:
        return []
    return trap_events_from_q([r.step for r in records], [r.q_snapshot for r in records],
                              records[0].agent_id, left, right)


def trap_duration_stats(events: Iterable[TrapEvent], horizon: int) -> TrapStats:
    """Median trap length with unexited traps censored at ``horizon``.

    A trap that never ends is counted with duration ``horizon``.
    """
    durations = []
    open_count = 0
    n = 0
    for ev in events:
        n += 1
        if ev.exit_step is None:
            open_count += 1
            durations.append(float(horizon))
        else:
            durations.append(float(ev.exit_step - ev.entry_step))
    if n == 0:
        return TrapStats(None, 0.0, ())
    return TrapStats(float(np.median(durations)), open_count / n, tuple(durations))


def var_delta_samples(env: EnvSpec, arm: int, gamma: float, n_samples: int,
                      seed: int | np.random.Generator = 0, bootstrap: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Rewards and squared TD errors of a value table trained to convergence on
    the policy "always pull ``arm``".

    The table is frozen at its optimal values and the continuation value is the
    pulled arm's own entry, so delta = Q[arm] - (r + gamma Q[arm]) = mu - r and
    E[delta^2] is the arm's reward variance. For the best arm this coincides
    with the greedy agent's TD error. Evaluated directly with numpy, without the
    agent code, so it can serve as an oracle for it.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    arm = env.arm_index(arm)
    mus = np.array(env.means, dtype=float)
    if bootstrap:
        if not 0.0 <= gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        q = mus / (1.0 - gamma)
    else:
        q = mus.copy()
    gen = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    p: NormalParams = env.arms[arm].params
    if p.sigma == 0.0:
        rewards = np.full(n_samples, p.mu)
    else:
        rewards = p.mu + p.sigma * gen.standard_normal(n_samples)
    target = rewards + gamma * q[arm] if bootstrap else rewards
    return rewards, (q[arm] - target) ** 2


def var_delta_oracle(env: EnvSpec, arm: int | str, gamma: float, n_samples: int,
                     seed: int | np.random.Generator = 0, bootstrap: bool = True) -> float:
    """Monte Carlo E[delta^2] at the optimal table; tends to the arm's variance."""
    _, d2 = var_delta_samples(env, arm, gamma, n_samples, seed, bootstrap)
    return float(d2.mean())


def standard_error(x: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        return math.inf
    return float(x.std(ddof=1) / math.sqrt(x.size))
