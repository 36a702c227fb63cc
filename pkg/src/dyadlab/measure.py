"""Nonnegative measures on leaf cells and the L^p calculus of leaf functions.

A measure assigns a nonnegative mass to every leaf cell; the mass of a cube
is the sum over the leaves below it.  Leaf functions are plain numpy arrays
of length ``tree.n_leaves``, constant on each leaf cell.  Throughout, the
convention 0/0 = 0 applies to averages over zero-mass cubes.
"""

from __future__ import annotations

import math
from functools import cached_property

import numpy as np

from .tree import CubeLike, DyadicTree


class Measure:
    """Leaf-cell masses plus cached cube masses for one tree."""

    def __init__(self, tree: DyadicTree, leaf_mass):
        leaf_mass = np.asarray(leaf_mass, dtype=float)
        if leaf_mass.shape != (tree.n_leaves,):
            raise ValueError(
                f"expected {tree.n_leaves} leaf masses, got shape {leaf_mass.shape}"
            )
        if np.any(leaf_mass < 0) or not np.all(np.isfinite(leaf_mass)):
            raise ValueError("leaf masses must be finite and nonnegative")
        self.tree = tree
        self.leaf_mass = leaf_mass

    @cached_property
    def cube_masses(self) -> np.ndarray:
        return self.tree.integrate_over_cubes(self.leaf_mass)

    def cube_mass(self, cube: CubeLike) -> float:
        return float(self.cube_masses[self.tree.flat_id(cube)])

    @property
    def total(self) -> float:
        return float(self.cube_masses[0])

    def __repr__(self):
        return f"Measure({self.leaf_mass.tolist()})"


def cube_mass(measure: Measure, cube: CubeLike) -> float:
    """Mass of a cube = subtree sum of leaf masses."""
    return measure.cube_mass(cube)


def integrate_and_average(f, measure: Measure, cube: CubeLike) -> tuple[float, float]:
    """(∫_Q f dσ, ⟨f⟩^σ_Q) with the 0/0 = 0 convention on zero-mass cubes."""
    tree = measure.tree
    f = _as_leaf_function(tree, f)
    sl = tree.leaf_slice(tree.flat_id(cube))
    integral = float(f[sl] @ measure.leaf_mass[sl])
    mass = measure.cube_mass(cube)
    return integral, integral / mass if mass > 0 else 0.0


def cube_integrals(f, measure: Measure) -> np.ndarray:
    """∫_Q f dσ for every cube at once."""
    return measure.tree.integrate_over_cubes(_as_leaf_function(measure.tree, f) * measure.leaf_mass)


def cube_averages(f, measure: Measure) -> np.ndarray:
    """⟨f⟩^σ_Q for every cube, 0 on zero-mass cubes."""
    ints = cube_integrals(f, measure)
    masses = measure.cube_masses
    return np.divide(ints, masses, out=np.zeros_like(ints), where=masses > 0)


def lp_norm(f, measure: Measure, p: float) -> float:
    """‖f‖_{L^p(σ)} = (Σ_leaf |f|^p σ(leaf))^{1/p} for p in (1, ∞)."""
    if not (1 < p < math.inf):
        raise ValueError(f"p must lie in (1, inf), got {p}")
    f = _as_leaf_function(measure.tree, f)
    return weighted_power_norm(np.abs(f), measure.leaf_mass, p)


def weighted_power_norm(values, weights, s: float) -> float:
    """(Σ w_i v_i^s)^{1/s}, with s = inf meaning the weighted essential sup."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    if s == math.inf:
        live = weights > 0
        return float(values[live].max()) if live.any() else 0.0
    return float((weights @ values**s) ** (1.0 / s))


def ell_norm(values, r: float) -> float:
    """ℓ^r norm of a finite sequence, r = inf meaning the max."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    if r == math.inf:
        return float(np.abs(values).max())
    return float((np.abs(values) ** r).sum() ** (1.0 / r))


def _as_leaf_function(tree: DyadicTree, f) -> np.ndarray:
    if np.isscalar(f):
        return np.full(tree.n_leaves, float(f))
    f = np.asarray(f, dtype=float)
    if f.shape != (tree.n_leaves,):
        raise ValueError(f"expected {tree.n_leaves} leaf values, got shape {f.shape}")
    return f
