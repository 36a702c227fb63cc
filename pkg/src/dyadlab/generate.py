"""Reproducible random instances for sweeps and verification suites.

Coefficients are drawn log-uniform over [2^-4, 2^4] and leaf masses
log-uniform over [2^-3, 2^3] with a 10% chance of a zero-mass leaf, which
exercises every 0/0 convention.  Per-trial generators are spawned from one
seed sequence, so trial i is independent of how many trials run and
identical across processes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .instance import Instance, make_instance
from .tree import DyadicTree


@dataclass(frozen=True)
class SweepConfig:
    trials: int = 100
    depth: int = 3
    branching: int = 2
    seed: int = 0
    p_grid: tuple[float, ...] = (1.5, 2.0, 3.0, 4.0)
    lam_log2_range: tuple[float, float] = (-4.0, 4.0)
    mass_log2_range: tuple[float, float] = (-3.0, 3.0)
    zero_mass_prob: float = 0.1
    enumeration_cubes: int = 15
    oracle_restarts: int = 8

    def replace(self, **kw) -> "SweepConfig":
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update(kw)
        return SweepConfig(**data)

    def to_json(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def random_masses(rng: np.random.Generator, n: int, config: SweepConfig) -> np.ndarray:
    lo, hi = config.mass_log2_range
    values = 2.0 ** rng.uniform(lo, hi, n)
    values[rng.random(n) < config.zero_mass_prob] = 0.0
    return values


def random_lambda(rng: np.random.Generator, tree: DyadicTree, config: SweepConfig) -> np.ndarray:
    lo, hi = config.lam_log2_range
    return 2.0 ** rng.uniform(lo, hi, tree.n_cubes)


def random_leaf_function(rng: np.random.Generator, n: int) -> np.ndarray:
    return 2.0 ** rng.uniform(-2.0, 2.0, n)


def random_instance(
    rng: np.random.Generator,
    config: SweepConfig,
    depth: int | None = None,
    bilinear: bool = False,
) -> Instance:
    depth = config.depth if depth is None else depth
    tree = DyadicTree(depth, config.branching)
    sigma = random_masses(rng, tree.n_leaves, config)
    omega = random_masses(rng, tree.n_leaves, config)
    lam = random_lambda(rng, tree, config)
    if bilinear:
        return make_instance(
            depth, config.branching, sigma, omega, lam,
            sigma2=random_masses(rng, tree.n_leaves, config),
            sigma3=random_masses(rng, tree.n_leaves, config),
        )
    return make_instance(depth, config.branching, sigma, omega, lam)


def random_exponent_pair(rng: np.random.Generator, config: SweepConfig, order: str = "any"):
    """A (p, q) pair from the grid; order "p>q" forces the deficient regime."""
    grid = config.p_grid
    while True:
        p = float(grid[rng.integers(len(grid))])
        q = float(grid[rng.integers(len(grid))])
        if order == "any":
            return p, q
        if order == "p>q" and p > q:
            return p, q
        if order == "p<=q" and p <= q:
            return p, q
