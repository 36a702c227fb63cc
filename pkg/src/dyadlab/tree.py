"""Finite rooted b-ary trees of dyadic cubes with array-friendly addressing.

Cubes are identified either by ``(level, index)`` pairs, by the string
address ``"level/index"``, or by a flat integer id enumerating cubes in
level order.  The root is ``(0, 0)``; the children of ``(k, i)`` are the
``b`` cubes ``(k+1, b*i + j)``.  Leaves are exactly the level-``depth``
cubes, and a cube of level ``k`` has geometric size ``side_ratio**k``
(``side_ratio`` defaults to ``1/b``).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, NamedTuple

import numpy as np


class CubeId(NamedTuple):
    level: int
    index: int

    @property
    def address(self) -> str:
        return f"{self.level}/{self.index}"

    @classmethod
    def from_address(cls, address: str) -> "CubeId":
        level, index = address.split("/")
        return cls(int(level), int(index))


CubeLike = CubeId | tuple | str | int | np.integer


@dataclass(frozen=True)
class DyadicTree:
    """Complete b-ary tree of depth ``depth`` (so ``branching**depth`` leaves)."""

    depth: int
    branching: int = 2
    side_ratio: float | Fraction | None = None

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError(f"depth must be >= 0, got {self.depth}")
        if self.branching < 2:
            raise ValueError(f"branching must be >= 2, got {self.branching}")
        if self.side_ratio is not None and not 0 < self.side_ratio < 1:
            raise ValueError("side_ratio must lie in (0, 1)")

    @property
    def ratio(self) -> float:
        return float(self.side_ratio) if self.side_ratio is not None else 1.0 / self.branching

    @property
    def n_leaves(self) -> int:
        return self.branching**self.depth

    @property
    def n_cubes(self) -> int:
        return (self.branching ** (self.depth + 1) - 1) // (self.branching - 1)

    def level_offset(self, level: int) -> int:
        return (self.branching**level - 1) // (self.branching - 1)

    def level_size(self, level: int) -> int:
        return self.branching**level

    def level_slice(self, level: int) -> slice:
        off = self.level_offset(level)
        return slice(off, off + self.level_size(level))

    # -- cube id conversions -------------------------------------------------

    def flat_id(self, cube: CubeLike) -> int:
        """Resolve any cube designation to a flat id; raise on unknown cubes."""
        if isinstance(cube, str):
            cube = CubeId.from_address(cube)
        if isinstance(cube, (int, np.integer)):
            fid = int(cube)
            if not 0 <= fid < self.n_cubes:
                raise ValueError(f"unknown cube id {fid}")
            return fid
        level, index = cube
        if not (0 <= level <= self.depth and 0 <= index < self.level_size(level)):
            raise ValueError(f"unknown cube {level}/{index}")
        return self.level_offset(level) + index

    def cube_id(self, fid: int) -> CubeId:
        level = int(self.cube_level[fid])
        return CubeId(level, fid - self.level_offset(level))

    def address(self, fid: int) -> str:
        return self.cube_id(fid).address

    @property
    def root(self) -> int:
        return 0

    def cubes(self) -> Iterator[CubeId]:
        for fid in range(self.n_cubes):
            yield self.cube_id(fid)

    # -- structure arrays (cached per tree) ----------------------------------

    @cached_property
    def cube_level(self) -> np.ndarray:
        out = np.empty(self.n_cubes, dtype=np.int64)
        for k in range(self.depth + 1):
            out[self.level_slice(k)] = k
        return out

    @cached_property
    def cube_size(self) -> np.ndarray:
        """Geometric size |Q| = ratio**level per cube."""
        return self.ratio ** self.cube_level.astype(float)

    @cached_property
    def parent_id(self) -> np.ndarray:
        """Flat id of the parent per cube (-1 for the root)."""
        out = np.full(self.n_cubes, -1, dtype=np.int64)
        for k in range(1, self.depth + 1):
            idx = np.arange(self.level_size(k))
            out[self.level_slice(k)] = self.level_offset(k - 1) + idx // self.branching
        return out

    def children_ids(self, fid: int) -> list[int]:
        level = int(self.cube_level[fid])
        if level == self.depth:
            return []
        index = fid - self.level_offset(level)
        base = self.level_offset(level + 1) + self.branching * index
        return list(range(base, base + self.branching))

    @cached_property
    def leaf_ancestor_ids(self) -> np.ndarray:
        """(depth+1, n_leaves) array; row k holds the level-k ancestor of each leaf."""
        leaves = np.arange(self.n_leaves)
        rows = [
            self.level_offset(k) + leaves // self.branching ** (self.depth - k)
            for k in range(self.depth + 1)
        ]
        return np.array(rows, dtype=np.int64)

    @cached_property
    def anc(self) -> np.ndarray:
        """(n_cubes, n_leaves) float matrix; anc[Q, l] = 1 iff leaf l lies in Q."""
        out = np.zeros((self.n_cubes, self.n_leaves))
        chains = self.leaf_ancestor_ids
        for k in range(self.depth + 1):
            out[chains[k], np.arange(self.n_leaves)] = 1.0
        return out

    def leaf_slice(self, fid: int) -> slice:
        """Leaves below a cube occupy a contiguous index range."""
        level = int(self.cube_level[fid])
        index = fid - self.level_offset(level)
        width = self.branching ** (self.depth - level)
        return slice(index * width, (index + 1) * width)

    def is_ancestor(self, a: int, d: int) -> bool:
        """True iff cube d is contained in cube a (cubes given by flat ids)."""
        ka, kd = int(self.cube_level[a]), int(self.cube_level[d])
        if kd < ka:
            return False
        ia = a - self.level_offset(ka)
        idd = d - self.level_offset(kd)
        return idd // self.branching ** (kd - ka) == ia

    @cached_property
    def descendant_matrix(self) -> np.ndarray:
        """(n_cubes, n_cubes) float matrix; [a, d] = 1 iff d is contained in a."""
        out = np.zeros((self.n_cubes, self.n_cubes))
        for d in range(self.n_cubes):
            kd = int(self.cube_level[d])
            idd = d - self.level_offset(kd)
            for k in range(kd + 1):
                out[self.level_offset(k) + idd // self.branching ** (kd - k), d] = 1.0
        return out

    # -- array transforms ----------------------------------------------------

    def integrate_over_cubes(self, leaf_values: np.ndarray) -> np.ndarray:
        """Per cube: sum of leaf values over the leaves it contains."""
        out = np.empty(self.n_cubes)
        for k in range(self.depth + 1):
            out[self.level_slice(k)] = leaf_values.reshape(
                self.level_size(k), -1
            ).sum(axis=1)
        return out

    def spread_to_leaves(self, cube_values: np.ndarray) -> np.ndarray:
        """Per leaf: sum of cube values over its ancestors (Q ∋ leaf)."""
        return cube_values[self.leaf_ancestor_ids].sum(axis=0)

    def ancestor_max(self, cube_values: np.ndarray) -> np.ndarray:
        """Per leaf: max of cube values over its ancestors."""
        return cube_values[self.leaf_ancestor_ids].max(axis=0)

    def subtree_sums(self, cube_values: np.ndarray) -> np.ndarray:
        """Per cube Q: sum of cube values over all Q' contained in Q."""
        out = np.asarray(cube_values, dtype=float).copy()
        for k in range(self.depth - 1, -1, -1):
            child_sums = out[self.level_slice(k + 1)].reshape(-1, self.branching).sum(axis=1)
            out[self.level_slice(k)] += child_sums
        return out

    def descendant_ids(self, fid: int) -> np.ndarray:
        """Flat ids of all cubes contained in fid (including itself)."""
        return np.nonzero(self.descendant_matrix[fid] > 0)[0]
