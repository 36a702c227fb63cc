"""Sparse cube families, stopping-time constructions, and embedding sums.

A family F of cubes is sigma-sparse when each member F owns a set
E(F) ⊆ F with sigma(E(F)) >= sigma(F)/2, the sets being pairwise disjoint.
With divisible leaf mass this is a fractional assignment problem; because
dyadic cubes are laminar, feasibility is equivalent to the per-member
condition

    sum over family members F' contained in F of sigma(F')/2  <=  sigma(F),

and a witness assignment is produced greedily from the deepest members up.
The weaker children-sum condition (sum over the family children of
sigma(F') at most sigma(F)/2) is sufficient but not necessary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .measure import Measure, _as_leaf_function, cube_averages, weighted_power_norm
from .operators import EAssignment
from .tree import CubeLike, DyadicTree

REL_SLACK = 1e-9
ENUMERATION_LIMIT = 2**20


@dataclass(frozen=True)
class CubeFamily:
    """A subset of cubes, optionally with a sparseness witness."""

    tree: DyadicTree
    cubes: tuple[int, ...]
    witness: EAssignment | None = None

    @classmethod
    def from_cubes(
        cls, tree: DyadicTree, cubes: Iterable[CubeLike], witness=None
    ) -> "CubeFamily":
        ids = sorted({tree.flat_id(c) for c in cubes})
        return cls(tree, tuple(ids), witness)

    @property
    def addresses(self) -> tuple[str, ...]:
        return tuple(self.tree.address(fid) for fid in self.cubes)

    def __len__(self):
        return len(self.cubes)

    def __iter__(self):
        return iter(self.cubes)

    def __contains__(self, cube):
        return self.tree.flat_id(cube) in self.cubes


def _family_ids(tree: DyadicTree, family) -> tuple[int, ...]:
    if isinstance(family, CubeFamily):
        return family.cubes
    return tuple(sorted({tree.flat_id(c) for c in family}))


def _exact_feasible(tree: DyadicTree, ids, masses: np.ndarray) -> bool:
    for fid in ids:
        load = sum(masses[g] for g in ids if tree.is_ancestor(fid, g)) / 2.0
        if load > masses[fid] * (1 + REL_SLACK) + 1e-300:
            return False
    return True


def _exact_witness(tree: DyadicTree, ids, measure: Measure) -> EAssignment:
    # Deepest members first; any mass inside a member serves exactly its
    # family ancestors, so greedy consumption is exact on laminar families.
    matrix = np.zeros((tree.n_cubes, tree.n_leaves))
    frac_left = np.ones(tree.n_leaves)
    leaf_mass = measure.leaf_mass
    for fid in sorted(ids, key=lambda c: -int(tree.cube_level[c])):
        need = measure.cube_masses[fid] / 2.0
        sl = tree.leaf_slice(fid)
        for leaf in range(sl.start, sl.stop):
            if need <= 0:
                break
            avail = frac_left[leaf] * leaf_mass[leaf]
            if avail <= 0:
                continue
            take = min(avail, need)
            frac = take / leaf_mass[leaf]
            matrix[fid, leaf] += frac
            frac_left[leaf] -= frac
            need -= take
    return EAssignment(tree, matrix)


def is_sparse(
    family, measure: Measure, mode: str = "exact"
) -> tuple[bool, EAssignment | None]:
    """Decide sigma-sparseness; exact mode returns a witness on success."""
    tree = measure.tree
    ids = _family_ids(tree, family)
    masses = measure.cube_masses
    if mode == "children-sum":
        ch = _family_children(tree, ids)
        ok = all(
            sum(masses[c] for c in ch[fid]) <= masses[fid] / 2.0 * (1 + REL_SLACK)
            for fid in ids
        )
        return ok, None
    if mode != "exact":
        raise ValueError(f"unknown sparseness mode {mode!r}")
    if not _exact_feasible(tree, ids, masses):
        return False, None
    return True, _exact_witness(tree, ids, measure)


def _family_children(tree: DyadicTree, ids) -> dict[int, list[int]]:
    """Maximal family members strictly inside each member."""
    ch: dict[int, list[int]] = {fid: [] for fid in ids}
    for m in ids:
        parent = _min_strict_ancestor(tree, ids, m)
        if parent is not None:
            ch[parent].append(m)
    return ch


def _min_strict_ancestor(tree: DyadicTree, ids, cube: int) -> int | None:
    best = None
    for f in ids:
        if f != cube and tree.is_ancestor(f, cube):
            if best is None or tree.cube_level[f] > tree.cube_level[best]:
                best = f
    return best


@dataclass(frozen=True)
class StoppingStructure:
    """Family links: children ch(F), residual sets E(F), stopping parents pi(Q)."""

    tree: DyadicTree
    family: CubeFamily
    root: int
    ch: Mapping[int, tuple[int, ...]]
    pi: Mapping[int, int | None]
    e_leaves: Mapping[int, np.ndarray]

    def e_mass(self, cube: CubeLike, measure: Measure) -> float:
        fid = self.tree.flat_id(cube)
        return float(measure.leaf_mass[self.e_leaves[fid]].sum())


def structure(family, root: CubeLike = 0, tree: DyadicTree | None = None) -> StoppingStructure:
    """Compute ch, E and pi links of a family below ``root``."""
    if isinstance(family, CubeFamily):
        tree = family.tree
    elif tree is None:
        raise ValueError("tree required when family is not a CubeFamily")
    root_id = tree.flat_id(root)
    ids = _family_ids(tree, family)
    for fid in ids:
        if not tree.is_ancestor(root_id, fid):
            raise ValueError(f"family member {tree.address(fid)} lies outside the root")
    ch = {fid: tuple(sorted(v)) for fid, v in _family_children(tree, ids).items()}
    pi: dict[int, int | None] = {}
    for q in tree.descendant_ids(root_id):
        best = None
        for f in ids:
            if tree.is_ancestor(f, int(q)):
                if best is None or tree.cube_level[f] > tree.cube_level[best]:
                    best = f
        pi[int(q)] = best
    e_leaves = {}
    for fid in ids:
        mask = np.zeros(tree.n_leaves, dtype=bool)
        mask[tree.leaf_slice(fid)] = True
        for c in ch[fid]:
            mask[tree.leaf_slice(c)] = False
        e_leaves[fid] = mask
    fam = family if isinstance(family, CubeFamily) else CubeFamily(tree, ids)
    return StoppingStructure(tree, fam, root_id, ch, pi, e_leaves)


def _stopping_family(tree: DyadicTree, score: np.ndarray, root: int) -> CubeFamily:
    # ch(F) = maximal strict subcubes whose score more than doubles score(F);
    # strict inequality, so ties never stop.
    out = []
    stack = [root]
    while stack:
        fid = stack.pop()
        out.append(fid)
        threshold = 2.0 * score[fid]
        inner = list(tree.children_ids(fid))
        while inner:
            c = inner.pop()
            if score[c] > threshold:
                stack.append(c)
            else:
                inner.extend(tree.children_ids(c))
    return CubeFamily(tree, tuple(sorted(out)))


def build_principal_cubes(f, sigma: Measure, root: CubeLike = 0) -> CubeFamily:
    """Stopping family where the sigma-average of f more than doubles."""
    f = _as_leaf_function(sigma.tree, f)
    if np.any(f < 0):
        raise ValueError("principal cubes require f >= 0")
    return _stopping_family(sigma.tree, cube_averages(f, sigma), sigma.tree.flat_id(root))


def assert_superadditive(tree: DyadicTree, tau: np.ndarray) -> None:
    """Children-sum superadditivity check (implies the general disjoint form)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be nonnegative")
    for k in range(tree.depth):
        parents = tau[tree.level_slice(k)]
        child_sums = tau[tree.level_slice(k + 1)].reshape(-1, tree.branching).sum(axis=1)
        if np.any(child_sums > parents * (1 + REL_SLACK) + 1e-300):
            raise ValueError("tau is not superadditive")


def superadditive_ratios(tau: np.ndarray, sigma: Measure) -> np.ndarray:
    masses = sigma.cube_masses
    tau = np.asarray(tau, dtype=float)
    return np.divide(tau, masses, out=np.zeros_like(tau), where=masses > 0)


def build_superadditive_stopping(
    tau, sigma: Measure, root: CubeLike = 0
) -> CubeFamily:
    """Stopping family for a superadditive cube functional tau (ratio rule)."""
    tree = sigma.tree
    assert_superadditive(tree, np.asarray(tau, dtype=float))
    ratio = superadditive_ratios(np.asarray(tau, dtype=float), sigma)
    return _stopping_family(tree, ratio, tree.flat_id(root))


def enumerate_sparse_families(
    tree: DyadicTree,
    measure: Measure,
    max_size: int | None = None,
    cubes: Iterable[int] | None = None,
    with_witness: bool = False,
) -> Iterator[CubeFamily]:
    """All exactly-sparse subsets of the given cubes (default: every cube).

    Works by depth-first extension; supersets of an infeasible family are
    infeasible, so the search prunes exactly there.  Guarded against
    combinatorial blow-up (> 2^20 candidate subsets).
    """
    pool = sorted(tree.descendant_ids(0) if cubes is None else {int(c) for c in cubes})
    n = len(pool)
    if max_size is None:
        candidates = 2.0**n
    else:
        candidates = sum(math.comb(n, k) for k in range(min(max_size, n) + 1))
    if candidates > ENUMERATION_LIMIT:
        raise ValueError(
            f"enumeration would consider ~{candidates:.3g} subsets "
            f"(> {ENUMERATION_LIMIT}); cap max_size or shrink the tree"
        )
    masses = measure.cube_masses
    current: list[int] = []
    loads: dict[int, float] = {}

    def emit() -> CubeFamily:
        ids = tuple(sorted(current))
        witness = _exact_witness(tree, ids, measure) if with_witness else None
        return CubeFamily(tree, ids, witness)

    def extend(start: int):
        yield emit()
        if max_size is not None and len(current) >= max_size:
            return
        for pos in range(start, n):
            c = pool[pos]
            new_load = masses[c] / 2.0 + sum(
                masses[g] / 2.0 for g in current if tree.is_ancestor(c, g)
            )
            if new_load > masses[c] * (1 + REL_SLACK):
                continue
            touched = [f for f in current if tree.is_ancestor(f, c)]
            ok = True
            for f in touched:
                if loads[f] + masses[c] / 2.0 > masses[f] * (1 + REL_SLACK):
                    ok = False
                    break
            if not ok:
                continue
            for f in touched:
                loads[f] += masses[c] / 2.0
            loads[c] = new_load
            current.append(c)
            yield from extend(pos + 1)
            current.pop()
            del loads[c]
            for f in touched:
                loads[f] -= masses[c] / 2.0

    yield from extend(0)


def carleson_lhs(family, f, sigma: Measure, p: float) -> float:
    """(sum over members of <f>_F^p sigma(F))^(1/p); family must be sigma-sparse."""
    tree = sigma.tree
    ids = _family_ids(tree, family)
    ok, _ = is_sparse(ids, sigma)
    if not ok:
        raise ValueError("family is not sparse with respect to the measure")
    f = _as_leaf_function(tree, f)
    if np.any(f < 0):
        raise ValueError("carleson sum requires f >= 0")
    avg = cube_averages(f, sigma)
    masses = sigma.cube_masses
    return float(
        sum(avg[fid] ** p * masses[fid] for fid in ids) ** (1.0 / p)
    )


def pythagoras_ratio(family, a_map: Mapping, sigma: Measure, p: float) -> float:
    """||sum a_S||_p over (sum ||a_S||_p^p)^(1/p) for functions adapted to the family.

    Each a_S must be nonnegative, supported on S, and constant (in sigma-mass)
    on every family child of S and on the residual set E(S).  The all-zero
    case returns 1 by convention.
    """
    tree = sigma.tree
    ids = _family_ids(tree, family)
    st = structure(CubeFamily(tree, ids), 0)
    total = np.zeros(tree.n_leaves)
    power_sum = 0.0
    tol = 1e-9
    for key, a in a_map.items():
        fid = tree.flat_id(key)
        if fid not in ids:
            raise ValueError(f"{tree.address(fid)} is not a family member")
        a = _as_leaf_function(tree, a)
        if np.any(a < 0):
            raise ValueError("adapted functions must be nonnegative")
        scale = max(float(a.max()), 1.0)
        outside = np.ones(tree.n_leaves, dtype=bool)
        outside[tree.leaf_slice(fid)] = False
        if np.any(np.abs(a[outside]) > tol * scale):
            raise ValueError(f"a_S not supported on {tree.address(fid)}")
        parts = [st.e_leaves[fid]]
        for c in st.ch[fid]:
            mask = np.zeros(tree.n_leaves, dtype=bool)
            mask[tree.leaf_slice(c)] = True
            parts.append(mask)
        for mask in parts:
            live = mask & (sigma.leaf_mass > 0)
            if live.sum() > 1 and np.ptp(a[live]) > tol * scale:
                raise ValueError("a_S not constant on a family part")
        total += a
        power_sum += weighted_power_norm(a, sigma.leaf_mass, p) ** p
    if power_sum == 0.0:
        return 1.0
    return weighted_power_norm(total, sigma.leaf_mass, p) / power_sum ** (1.0 / p)


@dataclass(frozen=True)
class SupremumComparison:
    """The three comparable quantities attached to a superadditive functional."""

    psi_norm: float
    stopping_value: float
    stopping_family: CubeFamily
    exhaustive_sup: float | None
    exhaustive_family: CubeFamily | None


def lemma24_quantities(
    tau, sigma: Measure, s: float, root: CubeLike = 0, exhaustive: bool | None = None
) -> SupremumComparison:
    """psi-norm, stopping-family value, and (small trees) the exhaustive sup.

    psi is the pointwise sup of tau_Q/sigma(Q) over cubes; the family values
    are (sum over members of [tau_F/sigma(F)]^s sigma(F))^(1/s).
    """
    tree = sigma.tree
    tau = np.asarray(tau, dtype=float)
    assert_superadditive(tree, tau)
    if not 1 < s < math.inf:
        raise ValueError(f"s must lie in (1, inf), got {s}")
    root_id = tree.flat_id(root)
    ratio = superadditive_ratios(tau, sigma)
    scope = np.zeros(tree.n_cubes)
    scope[tree.descendant_ids(root_id)] = 1.0
    psi = tree.ancestor_max(ratio * scope)
    psi_norm = weighted_power_norm(psi, sigma.leaf_mass, s)

    masses = sigma.cube_masses

    def family_value(ids) -> float:
        return float(
            sum(ratio[fid] ** s * masses[fid] for fid in ids) ** (1.0 / s)
        )

    stopping = build_superadditive_stopping(tau, sigma, root_id)
    stopping_value = family_value(stopping.cubes)

    if exhaustive is None:
        exhaustive = tree.n_cubes <= 15
    best = best_family = None
    if exhaustive:
        for fam in enumerate_sparse_families(
            tree, sigma, cubes=tree.descendant_ids(root_id)
        ):
            value = family_value(fam.cubes)
            if best is None or value > best:
                best, best_family = value, fam
    return SupremumComparison(psi_norm, stopping_value, stopping, best, best_family)
