"""Single-state Gaussian bandits and the reward-filter hook."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence

from .rng import NormalParams, RngStream, sample_normal


@dataclass(frozen=True)
class ArmSpec:
    params: NormalParams

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def sigma(self) -> float:
        return self.params.sigma


@dataclass(frozen=True)
class EnvSpec:
    arms: tuple[ArmSpec, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "arms", tuple(self.arms))
        if len(self.arms) < 2:
            raise ValueError(f"a bandit needs at least 2 arms, got {len(self.arms)}")
        if self.names is not None:
            object.__setattr__(self, "names", tuple(self.names))
            if len(self.names) != len(self.arms):
                raise ValueError("names must match the number of arms")

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> list[float]:
        return [a.mu for a in self.arms]

    @property
    def sigmas(self) -> list[float]:
        return [a.sigma for a in self.arms]

    def arm_index(self, arm: int | str) -> int:
        """Resolve an arm given by index or by label."""
        if isinstance(arm, str):
            if self.names is None or arm not in self.names:
                raise KeyError(f"unknown arm label {arm!r}")
            return self.names.index(arm)
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"arm index {arm} out of range for {self.n_arms} arms")
        return int(arm)


def make_env(mus: Sequence[float], sigmas: Sequence[float], names: Sequence[str] | None = None) -> EnvSpec:
    if len(mus) != len(sigmas):
        raise ValueError("mus and sigmas must have the same length")
    if names is None and len(mus) == 2:
        names = ("left", "right")
    arms = tuple(ArmSpec(NormalParams(float(m), float(s))) for m, s in zip(mus, sigmas))
    return EnvSpec(arms, tuple(names) if names is not None else None)


def broken_armed_bandit() -> EnvSpec:
    """Left arm pays exactly 0, right arm pays N(1, 2.5^2)."""
    return make_env([0.0, 1.0], [0.0, 2.5])


def fig3_bandit(sigma_left: float = 0.5) -> EnvSpec:
    """Low-variance left arm N(0, 0.5^2) against a wide right arm N(1, 7^2)."""
    return make_env([0.0, 1.0], [sigma_left, 7.0])


ENV_PRESETS = {
    "broken_armed": broken_armed_bandit,
    "fig3": fig3_bandit,
}


def env_preset(name: str, mus: Sequence[float] | None = None, sigmas: Sequence[float] | None = None) -> EnvSpec:
    """Look up a named bandit. ``custom`` takes explicit per-arm mus and sigmas."""
    if name == "custom":
        if mus is None or sigmas is None:
            raise ValueError("custom environment needs explicit mus and sigmas")
        return make_env(mus, sigmas)
    try:
        return ENV_PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown environment preset {name!r}; choose from "
                       f"{sorted(ENV_PRESETS) + ['custom']}") from None


def sample_reward(env: EnvSpec, arm: int, rng: RngStream) -> float:
    if not 0 <= arm < env.n_arms:
        raise IndexError(f"arm index {arm} out of range for {env.n_arms} arms")
    return sample_normal(rng, env.arms[arm].params)


class RewardFilter(Protocol):
    """Transforms a raw reward before the learner sees it.

    Implementations may keep state. Whatever they do must leave the expected
    reward of every arm unchanged.
    """

    def __call__(self, raw_reward: float, arm: int, step: int, rng: RngStream) -> float: ...


class IdentityFilter:
    def __call__(self, raw_reward: float, arm: int, step: int, rng: RngStream) -> float:
        return raw_reward
