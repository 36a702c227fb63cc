"""Problem instances: a tree, its measures, and the cube coefficients.

The JSON schema is bit-exact and shared with the CLI::

    {"depth": int, "branching": int,
     "sigma": [leaf masses], "omega": [leaf masses],
     "lambda": {"level/index": value},
     "sigma2": [...], "sigma3": [...]}          # optional, bilinear only

Named fixtures used as shared ground truth across the test suites:

* ``F0(s, w, lam)`` - single-cube instance (depth 0).
* ``F1``   - depth-1 binary tree, sigma = omega = (1, 1),
  coefficients root: 1, left leaf: 2, right leaf: 0.
* ``F1b``  - F1 with sigma = (3, 1).
* ``B1``   - F1 tree with three equal measures (1, 1), same coefficients;
  meant to be paired with exponents (4, 4, 4).
* ``FC(N, p, q)`` - the descending-chain instance (see dyadlab.chain).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .measure import Measure
from .tree import CubeId, CubeLike, DyadicTree


class CoefficientMap:
    """Nonnegative coefficient per cube; absent cubes default to 0."""

    def __init__(self, tree: DyadicTree, values=None):
        if values is None:
            values = np.zeros(tree.n_cubes)
        values = np.asarray(values, dtype=float)
        if values.shape != (tree.n_cubes,):
            raise ValueError(
                f"expected {tree.n_cubes} coefficients, got shape {values.shape}"
            )
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("coefficients must be finite and nonnegative")
        self.tree = tree
        self.values = values

    @classmethod
    def from_dict(cls, tree: DyadicTree, entries: Mapping) -> "CoefficientMap":
        values = np.zeros(tree.n_cubes)
        for cube, value in entries.items():
            values[tree.flat_id(cube)] = value
        return cls(tree, values)

    def __getitem__(self, cube: CubeLike) -> float:
        return float(self.values[self.tree.flat_id(cube)])

    def as_dict(self) -> dict[str, float]:
        return {
            self.tree.address(fid): float(v)
            for fid, v in enumerate(self.values)
            if v != 0.0
        }

    def scaled(self, t: float) -> "CoefficientMap":
        return CoefficientMap(self.tree, t * self.values)


@dataclass(frozen=True)
class Instance:
    tree: DyadicTree
    sigma: Measure
    omega: Measure
    lam: CoefficientMap
    sigma2: Measure | None = None
    sigma3: Measure | None = None

    @property
    def measures3(self) -> tuple[Measure, Measure, Measure]:
        if self.sigma2 is None or self.sigma3 is None:
            raise ValueError("instance has no bilinear measures sigma2/sigma3")
        return self.sigma, self.sigma2, self.sigma3

    @property
    def is_bilinear(self) -> bool:
        return self.sigma2 is not None and self.sigma3 is not None

    def to_json(self) -> dict:
        out = {
            "depth": self.tree.depth,
            "branching": self.tree.branching,
            "sigma": self.sigma.leaf_mass.tolist(),
            "omega": self.omega.leaf_mass.tolist(),
            "lambda": self.lam.as_dict(),
        }
        if self.sigma2 is not None:
            out["sigma2"] = self.sigma2.leaf_mass.tolist()
        if self.sigma3 is not None:
            out["sigma3"] = self.sigma3.leaf_mass.tolist()
        return out

    @classmethod
    def from_json(cls, data: Mapping) -> "Instance":
        tree = DyadicTree(int(data["depth"]), int(data["branching"]))
        return make_instance(
            tree.depth,
            tree.branching,
            data["sigma"],
            data["omega"],
            data["lambda"],
            sigma2=data.get("sigma2"),
            sigma3=data.get("sigma3"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def make_instance(
    depth: int,
    branching: int,
    sigma,
    omega,
    lam: Mapping | np.ndarray,
    sigma2=None,
    sigma3=None,
) -> Instance:
    """Validated instance from raw leaf masses and coefficient entries."""
    tree = DyadicTree(depth, branching)
    lam_map = (
        CoefficientMap(tree, lam)
        if isinstance(lam, (np.ndarray, list, tuple))
        else CoefficientMap.from_dict(tree, lam)
    )
    return Instance(
        tree,
        Measure(tree, sigma),
        Measure(tree, omega),
        lam_map,
        sigma2=None if sigma2 is None else Measure(tree, sigma2),
        sigma3=None if sigma3 is None else Measure(tree, sigma3),
    )


def fixture(name: str, **kwargs) -> Instance:
    """Construct one of the named fixtures (F0, F1, F1b, B1, FC)."""
    if name == "F0":
        s = kwargs.pop("s", 1.0)
        w = kwargs.pop("w", 1.0)
        lam = kwargs.pop("lam", 1.0)
        _reject_extra(kwargs)
        return make_instance(0, 2, [s], [w], {"0/0": lam})
    if name == "F1":
        _reject_extra(kwargs)
        return make_instance(1, 2, [1, 1], [1, 1], {"0/0": 1, "1/0": 2, "1/1": 0})
    if name == "F1b":
        _reject_extra(kwargs)
        return make_instance(1, 2, [3, 1], [1, 1], {"0/0": 1, "1/0": 2, "1/1": 0})
    if name == "B1":
        _reject_extra(kwargs)
        return make_instance(
            1, 2, [1, 1], [1, 1], {"0/0": 1, "1/0": 2, "1/1": 0},
            sigma2=[1, 1], sigma3=[1, 1],
        )
    if name == "FC":
        from .chain import build_chain

        n = kwargs.pop("N")
        p = kwargs.pop("p", 4.0)
        q = kwargs.pop("q", 2.0)
        _reject_extra(kwargs)
        return build_chain(n, p, q).to_instance()
    raise ValueError(f"unknown fixture {name!r}")


def _reject_extra(kwargs):
    if kwargs:
        raise TypeError(f"unexpected fixture arguments {sorted(kwargs)}")


ROOT = CubeId(0, 0)
