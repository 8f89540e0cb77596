"""Adaptive Symmetric Reward Noising.

A small ensemble of randomly initialised online reward predictors is trained
on the raw rewards. The ensemble's mean absolute error on the current reward is
the step's *interest grade*. Grades go into a sliding window of the last K
steps; a step whose grade is strictly below the window median gets zero-mean
Gaussian noise added to its reward before the learner sees it. Boring arms are
predictable, so they are the ones that get noised, which evens out the reward
variance across arms without moving any arm's mean.
"""
from __future__ import annotations

import bisect
import math
from collections import deque
from dataclasses import dataclass, field
from statistics import NormalDist

from .rng import RngStream

NOISE_SCALE_MODES = ("scaled_median", "median", "variance_matching", "literal")

# median |Z| for Z ~ N(0, 1); dividing a median absolute deviation by this
# gives a consistent estimate of the standard deviation
MAD_TO_STD = NormalDist().inv_cdf(0.75)


@dataclass(frozen=True)
class AsrnConfig:
    ensemble_size: int = 5
    window_k: int = 5000
    predictor_lr: float = 0.1
    predictor_init_sigma: float = 1.0
    activation_step: int = 0
    noise_scale_mode: str = "scaled_median"
    warmup: int | None = None  # grades needed before any noising; None -> min(K, 100)

    def __post_init__(self) -> None:
        if self.ensemble_size < 1:
            raise ValueError(f"ensemble_size must be >= 1, got {self.ensemble_size}")
        if self.window_k < 1:
            raise ValueError(f"window_k must be >= 1, got {self.window_k}")
        if not 0.0 < self.predictor_lr <= 1.0:
            raise ValueError(f"predictor_lr must be in (0, 1], got {self.predictor_lr}")
        if not (self.predictor_init_sigma >= 0.0 and math.isfinite(self.predictor_init_sigma)):
            raise ValueError(f"predictor_init_sigma must be finite and >= 0, got {self.predictor_init_sigma}")
        if self.activation_step < 0:
            raise ValueError(f"activation_step must be >= 0, got {self.activation_step}")
        if self.noise_scale_mode not in NOISE_SCALE_MODES:
            raise ValueError(f"noise_scale_mode must be one of {NOISE_SCALE_MODES}, "
                             f"got {self.noise_scale_mode!r}")
        if self.warmup is not None and self.warmup < 1:
            raise ValueError(f"warmup must be >= 1, got {self.warmup}")

    @property
    def min_grades(self) -> int:
        return self.warmup if self.warmup is not None else min(self.window_k, 100)


def ensemble_learning_rates(base_lr: float, size: int) -> list[float]:
    """Learning rates spread evenly over [0.5, 1.5] x base_lr, capped at 1."""
    if size == 1:
        return [base_lr]
    return [min(1.0, base_lr * (0.5 + i / (size - 1))) for i in range(size)]


@dataclass
class PredictorEnsemble:
    estimates: list[list[float]]  # [predictor][arm]
    lrs: list[float]

    @property
    def size(self) -> int:
        return len(self.estimates)


class InterestWindow:
    """The last K interest grades, with an O(log K) running median."""

    def __init__(self, k: int):
        self.k = k
        self._fifo: deque[float] = deque()
        self._sorted: list[float] = []

    def __len__(self) -> int:
        return len(self._fifo)

    def append(self, grade: float) -> None:
        if len(self._fifo) == self.k:
            old = self._fifo.popleft()
            del self._sorted[bisect.bisect_left(self._sorted, old)]
        self._fifo.append(grade)
        bisect.insort(self._sorted, grade)

    def median(self) -> float:
        s = self._sorted
        n = len(s)
        if n == 0:
            return math.inf
        mid = n // 2
        if n % 2:
            return s[mid]
        return 0.5 * (s[mid - 1] + s[mid])

    def values(self) -> list[float]:
        """Grades oldest first."""
        return list(self._fifo)


@dataclass
class AsrnState:
    config: AsrnConfig
    ensemble: PredictorEnsemble
    window: InterestWindow
    step_count: int = 0
    # diagnostics from the most recent filter_reward call
    last_interest: float = field(default=math.nan)
    last_median: float = field(default=math.inf)
    last_scale: float = 0.0


def init_asrn(config: AsrnConfig, n_arms: int, rng: RngStream) -> AsrnState:
    if n_arms < 1:
        raise ValueError(f"n_arms must be >= 1, got {n_arms}")
    sigma = config.predictor_init_sigma
    estimates = []
    for _ in range(config.ensemble_size):
        if sigma > 0:
            estimates.append([sigma * rng.standard_normal() for _ in range(n_arms)])
        else:
            estimates.append([0.0] * n_arms)
    ensemble = PredictorEnsemble(estimates, ensemble_learning_rates(config.predictor_lr, config.ensemble_size))
    return AsrnState(config=config, ensemble=ensemble, window=InterestWindow(config.window_k))


def interest_grade(asrn: AsrnState, arm: int, raw_reward: float) -> float:
    """Mean absolute error of the ensemble's predictions for ``arm``."""
    est = asrn.ensemble.estimates
    total = 0.0
    for row in est:
        total += abs(row[arm] - raw_reward)
    return total / len(est)


def update_predictors(asrn: AsrnState, arm: int, raw_reward: float, grade: float | None = None) -> AsrnState:
    """One online step for every predictor on ``arm``; logs the step's grade.

    ``grade`` is the interest grade of this step as computed before the update;
    it is recomputed when omitted.
    """
    if grade is None:
        grade = interest_grade(asrn, arm, raw_reward)
    ens = asrn.ensemble
    for row, lr in zip(ens.estimates, ens.lrs):
        row[arm] += lr * (raw_reward - row[arm])
    asrn.window.append(grade)
    return asrn


def median_interest(asrn: AsrnState) -> float:
    """Median of the window; +inf while the window is empty."""
    return asrn.window.median()


def noise_scale(mode: str, grade: float, median: float) -> float:
    if mode == "scaled_median":
        return median / MAD_TO_STD
    if mode == "median":
        return median
    if mode == "variance_matching":
        return math.sqrt(max(0.0, median * median - grade * grade))
    return grade


def filter_reward(asrn: AsrnState, arm: int, raw_reward: float, rng: RngStream) -> float:
    """Reward the learner should see for this step.

    Noise is added only once ``activation_step`` is reached and the window
    holds enough grades. The predictors always train on ``raw_reward``.
    """
    cfg = asrn.config
    grade = interest_grade(asrn, arm, raw_reward)
    med = asrn.window.median()
    emitted = raw_reward
    scale = 0.0
    if (asrn.step_count >= cfg.activation_step
            and len(asrn.window) >= cfg.min_grades
            and grade < med):
        scale = noise_scale(cfg.noise_scale_mode, grade, med)
        if scale > 0.0:
            emitted = raw_reward + scale * rng.standard_normal()
    asrn.last_interest = grade
    asrn.last_median = med
    asrn.last_scale = scale
    update_predictors(asrn, arm, raw_reward, grade)
    asrn.step_count += 1
    return emitted


class AsrnFilter:
    """Adapter exposing an :class:`AsrnState` through the reward-filter call shape."""

    def __init__(self, state: AsrnState):
        self.state = state

    def __call__(self, raw_reward: float, arm: int, step: int, rng: RngStream) -> float:
        return filter_reward(self.state, arm, raw_reward, rng)
