"""Synthetic ballot generation: a Dirichlet base vote mixed with noise.

Randomness comes from the counter-based Philox generator seeded through
``numpy.random.SeedSequence`` spawn keys, so every (seed, trial, voter)
stream is independent, reproducible across platforms, and independent
of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Ballot, ConfigError, Profile, validate_profile


def derive_stream(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for the sub-stream addressed by (seed, *path)."""
    seq = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(seq))


def dirichlet_sample(m: int, alpha: float, stream: np.random.Generator) -> np.ndarray:
    """One Dirichlet(alpha^m) point via gamma normalization.

    alpha = 1 short-circuits to exponentials; other alphas use the
    generator's standard gamma sampler.
    """
    if m < 1:
        raise ConfigError("dimension must be at least 1")
    if not alpha > 0:
        raise ConfigError("alpha must be positive")
    if m == 1:
        return np.ones(1)
    while True:
        if alpha == 1.0:
            draws = stream.standard_exponential(m)
        else:
            draws = stream.standard_gamma(alpha, m)
        total = draws.sum()
        if total > 0.0:
            return draws / total


@dataclass(frozen=True)
class GenSpec:
    """Shape, mixing weight, concentration and seed for one synthetic profile."""

    n: int
    m: int
    mix_weight: float = 0.5
    dirichlet_alpha: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ConfigError("need at least one voter and one project")
        if not 0.0 <= self.mix_weight <= 1.0:
            raise ConfigError("mix_weight must lie in [0, 1]")
        if not self.dirichlet_alpha > 0:
            raise ConfigError("dirichlet_alpha must be positive")


def generate_profile(spec: GenSpec, budget_tokens: float = 1.0) -> tuple[Profile, Ballot]:
    """Sample a profile and its base vote (the ground-truth benchmark).

    Each ballot is mix_weight * base + (1 - mix_weight) * independent,
    with the base and every voter's independent vote drawn from
    Dirichlet(alpha^m) on separate sub-streams.
    """
    base = dirichlet_sample(spec.m, spec.dirichlet_alpha, derive_stream(spec.seed, 0))
    votes = np.empty((spec.n, spec.m))
    w = spec.mix_weight
    for i in range(spec.n):
        indep = dirichlet_sample(spec.m, spec.dirichlet_alpha, derive_stream(spec.seed, 1, i))
        votes[i] = w * base + (1.0 - w) * indep
    profile = validate_profile(Profile(votes, budget_tokens))
    return profile, Ballot(base)
