"""Tabular Q-learning on a single-state bandit.

The update is ``Q[a] <- (1 - alpha) Q[a] + alpha (r + gamma max Q)`` with the
max taken over the table *before* the update. Setting ``bootstrap=False``
drops the ``gamma max Q`` term, which turns each entry into an exponentially
weighted mean of its arm's rewards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bandit import EnvSpec
from .rng import RngStream

INIT_MODES = ("optimal", "iid_sample", "constant")


@dataclass(frozen=True)
class AgentConfig:
    alpha: float = 0.05
    gamma: float = 0.95
    epsilon0: float = 1.0
    epsilon_decay: float = 0.001
    epsilon_min: float = 0.0
    init_mode: str = "optimal"
    init_value: float = 0.0
    bootstrap: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}"
                             + (" (optimal init divides by 1 - gamma)" if self.gamma == 1.0 else ""))
        if not 0.0 <= self.epsilon0 <= 1.0:
            raise ValueError(f"epsilon0 must be in [0, 1], got {self.epsilon0}")
        if not 0.0 <= self.epsilon_min <= self.epsilon0:
            raise ValueError(f"epsilon_min must be in [0, epsilon0], got {self.epsilon_min}")
        if not 0.0 <= self.epsilon_decay <= 1.0:
            raise ValueError(f"epsilon_decay must be in [0, 1], got {self.epsilon_decay}")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}, got {self.init_mode!r}")
        if not math.isfinite(self.init_value):
            raise ValueError("init_value must be finite")


@dataclass
class AgentState:
    q: list[float]
    epsilon: float
    config: AgentConfig
    step_count: int = 0
    _ties: list[int] = field(default_factory=list, repr=False)

    @property
    def n_arms(self) -> int:
        return len(self.q)

    def greedy_arm(self) -> int | None:
        """Strict argmax of the table, or None on a tie for the top."""
        best = max(self.q)
        top = [a for a, v in enumerate(self.q) if v == best]
        return top[0] if len(top) == 1 else None


def optimal_values(env: EnvSpec, config: AgentConfig) -> list[float]:
    """Fixed point of the expected update when every arm is pulled forever.

    With bootstrapping this is the discounted return mu / (1 - gamma); without
    it the table just estimates the mean reward.
    """
    if config.bootstrap:
        if config.gamma >= 1.0:
            raise ValueError("optimal init needs gamma < 1")
        return [a.mu / (1.0 - config.gamma) for a in env.arms]
    return [a.mu for a in env.arms]


def init_agent(config: AgentConfig, env: EnvSpec, rng: RngStream) -> AgentState:
    if config.init_mode == "optimal":
        q = optimal_values(env, config)
    elif config.init_mode == "iid_sample":
        # one draw per arm from that arm's own reward distribution
        q = [a.mu + a.sigma * rng.standard_normal() if a.sigma > 0 else a.mu for a in env.arms]
    else:
        q = [float(config.init_value)] * env.n_arms
    return AgentState(q=[float(v) for v in q], epsilon=config.epsilon0, config=config)


def select_action(agent: AgentState, rng: RngStream) -> int:
    """Epsilon-greedy choice; ties for the max are broken uniformly."""
    q = agent.q
    n = len(q)
    if rng.random() < agent.epsilon:
        return rng.integer(n)
    if n == 2:
        if q[0] > q[1]:
            return 0
        if q[1] > q[0]:
            return 1
        return rng.integer(2)
    best = max(q)
    ties = agent._ties
    ties.clear()
    ties.extend(a for a in range(n) if q[a] == best)
    if len(ties) == 1:
        return ties[0]
    return ties[rng.integer(len(ties))]


def td_error(agent: AgentState, arm: int, reward: float) -> float:
    """Q[arm] - (reward + gamma max Q). Pure."""
    if not 0 <= arm < len(agent.q):
        raise IndexError(f"arm index {arm} out of range")
    cfg = agent.config
    if cfg.bootstrap:
        return agent.q[arm] - (reward + cfg.gamma * max(agent.q))
    return agent.q[arm] - reward


def q_update(agent: AgentState, arm: int, reward: float) -> AgentState:
    """Move Q[arm] toward the one-step target; other entries are untouched."""
    if not 0 <= arm < len(agent.q):
        raise IndexError(f"arm index {arm} out of range")
    if not math.isfinite(reward):
        raise ValueError(f"reward must be finite, got {reward}")
    cfg = agent.config
    q = agent.q
    target = reward + cfg.gamma * max(q) if cfg.bootstrap else reward
    q[arm] = (1.0 - cfg.alpha) * q[arm] + cfg.alpha * target
    agent.step_count += 1
    return agent


def decay_epsilon(agent: AgentState) -> AgentState:
    cfg = agent.config
    agent.epsilon = max(cfg.epsilon_min, agent.epsilon * (1.0 - cfg.epsilon_decay))
    return agent
