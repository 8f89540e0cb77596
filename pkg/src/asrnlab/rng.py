"""Seeded random streams and Gaussian sampling.

Every stream is a PCG64 generator seeded from a single 64-bit integer. Child
seeds are derived with ``numpy.random.SeedSequence((parent_seed, index))``,
which hashes the pair into fresh entropy, so ``derive_seed(s, i)`` is stable
across runs, platforms and numpy releases that keep the SeedSequence contract.

Per-agent layout used by the experiment runner::

    agent_seed = derive_seed(master_seed, agent_index)
    policy stream = make_rng(derive_seed(agent_seed, 0))   # epsilon-greedy, init
    reward stream = make_rng(derive_seed(agent_seed, 1))   # environment draws
    noise stream  = make_rng(derive_seed(agent_seed, 2))   # ASRN predictors + noise

Scalar draws are served from pre-generated blocks, which keeps the inner
simulation loop in plain Python fast without changing the sequence: a stream
always yields ``Generator.random(BLOCK)`` / ``Generator.standard_normal(BLOCK)``
values in order, one block at a time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BLOCK = 4096
_U64 = (1 << 64) - 1


def derive_seed(seed: int, index: int) -> int:
    """Child seed for ``index`` under ``seed``; injective in practice."""
    _check_u64(seed)
    if index < 0:
        raise ValueError(f"index must be non-negative, got {index}")
    ss = np.random.SeedSequence((int(seed), int(index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _check_u64(seed: int) -> None:
    if not 0 <= int(seed) <= _U64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")


class RngStream:
    """Single-owner random stream with buffered scalar draws."""

    __slots__ = ("seed", "_gen", "_u", "_ui", "_z", "_zi")

    def __init__(self, seed: int):
        _check_u64(seed)
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))
        self._u: list[float] = []
        self._ui = 0
        self._z: list[float] = []
        self._zi = 0

    def random(self) -> float:
        """Uniform draw on [0, 1)."""
        if self._ui == len(self._u):
            self._u = self._gen.random(BLOCK).tolist()
            self._ui = 0
        u = self._u[self._ui]
        self._ui += 1
        return u

    def standard_normal(self) -> float:
        if self._zi == len(self._z):
            self._z = self._gen.standard_normal(BLOCK).tolist()
            self._zi = 0
        z = self._z[self._zi]
        self._zi += 1
        return z

    def integer(self, n: int) -> int:
        """Uniform integer in ``range(n)`` from one uniform draw."""
        k = int(self.random() * n)
        return k if k < n else n - 1

    def normal_array(self, size: int) -> np.ndarray:
        """``size`` standard normals taken from the same scalar sequence."""
        return np.array([self.standard_normal() for _ in range(size)])

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"


def make_rng(seed: int) -> RngStream:
    return RngStream(seed)


@dataclass(frozen=True)
class NormalParams:
    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            raise ValueError(f"normal parameters must be finite, got mu={self.mu}, sigma={self.sigma}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def sample_normal(rng: RngStream, params: NormalParams) -> float:
    """Draw from N(mu, sigma^2). sigma == 0 returns mu and consumes no draw."""
    if params.sigma == 0.0:
        return float(params.mu)
    return params.mu + params.sigma * rng.standard_normal()
