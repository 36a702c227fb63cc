"""Testing constants: indicator (Sawyer-type), sequential, bilinear, maximal.

Every constant is an l^r aggregation of localized operator norms divided by
mass powers, with the supremum over sparse families realized by one of two
strategies:

* ``stopping``  - the extremal stopping-family constructions from the
  sufficiency proofs (fast, works at any depth, lower bound);
* ``exhaustive`` - true maximum over all exactly-sparse families
  (ground truth; guarded to small trees).

When the aggregation exponent is infinite both strategies coincide with the
plain supremum over single cubes, since every singleton family is sparse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exponents import exponents, exponents3
from .instance import CoefficientMap
from .measure import Measure, ell_norm, weighted_power_norm
from .operators import (
    EAssignment,
    GeneralPositiveOperator,
    _localized_layer_sup_powers,
    bilinear_indicator_image,
    indicator_image,
    localized_bilinear_maximal_norm_powers,
    localized_bilinear_norm_powers,
    localized_maximal_norm_powers,
    localized_norm_powers,
    localized_norm_powers_general,
)
from .sparse import (
    CubeFamily,
    build_superadditive_stopping,
    enumerate_sparse_families,
    superadditive_ratios,
)
from .tree import DyadicTree


@dataclass(frozen=True)
class TestingReport:
    """A testing-constant value plus the family achieving it."""

    kind: str
    value: float
    r: float
    strategy: str
    family: tuple[str, ...]
    contributions: dict[str, float]
    inner_families: dict[str, tuple[str, ...]] | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "value": self.value,
            "r": "inf" if self.r == math.inf else self.r,
            "strategy": self.strategy,
            "family": list(self.family),
            "contributions": self.contributions,
        }
        if self.inner_families is not None:
            out["inner_families"] = {k: list(v) for k, v in self.inner_families.items()}
        if self.meta:
            out["meta"] = {
                k: v for k, v in self.meta.items() if isinstance(v, (int, float, str))
            }
        return out


def _quotients(tau: np.ndarray, root_power: float, measure: Measure, p: float) -> np.ndarray:
    """tau_F^(1/root_power) / sigma(F)^(1/p), zero on zero-mass cubes."""
    masses = measure.cube_masses
    vals = np.asarray(tau, dtype=float) ** (1.0 / root_power)
    out = np.zeros_like(vals)
    np.divide(vals, masses ** (1.0 / p), out=out, where=masses > 0)
    return out


def _report_from_family(kind, tree, ids, quots, r, strategy, meta=None) -> TestingReport:
    ids = tuple(sorted(ids))
    contributions = {tree.address(fid): float(quots[fid]) for fid in ids}
    value = ell_norm([quots[fid] for fid in ids], r)
    return TestingReport(
        kind, value, r, strategy,
        tuple(tree.address(fid) for fid in ids), contributions, meta=meta or {},
    )


def _sup_report(kind, tree, quots, strategy) -> TestingReport:
    best = int(np.argmax(quots))
    value = float(quots[best])
    ids = (best,) if value > 0 else ()
    return _report_from_family(kind, tree, ids, quots, math.inf, strategy)


def _exhaustive_flat(kind, tree, measure, quots, r, cubes=None) -> TestingReport:
    best_val, best_ids = 0.0, ()
    for fam in enumerate_sparse_families(tree, measure, cubes=cubes):
        v = ell_norm(quots[list(fam.cubes)], r)
        if v > best_val:
            best_val, best_ids = v, fam.cubes
    return _report_from_family(kind, tree, best_ids, quots, r, "exhaustive")


# ---------------------------------------------------------------------------
# linear testing constants


def sawyer(
    lam: CoefficientMap, sigma: Measure, omega: Measure, p: float, q: float
) -> tuple[TestingReport, TestingReport]:
    """Indicator testing pair: sup over single cubes, direct and adjoint."""
    ex = exponents(p, q)
    tau = localized_norm_powers(lam, sigma, omega, q)
    direct = _sup_report(
        "sawyer-direct", lam.tree, _quotients(tau, q, sigma, p), "sup"
    )
    tau_adj = localized_norm_powers(lam, omega, sigma, ex.p_dual)
    adjoint = _sup_report(
        "sawyer-adjoint", lam.tree, _quotients(tau_adj, ex.p_dual, omega, ex.q_dual), "sup"
    )
    return direct, adjoint


def _sequential_from_tau(
    kind, tree, tau, root_power, measure, p, r, strategy
) -> TestingReport:
    quots = _quotients(tau, root_power, measure, p)
    if r == math.inf:
        return _sup_report(kind, tree, quots, strategy)
    if strategy == "stopping":
        fam = build_superadditive_stopping(tau, measure)
        return _report_from_family(kind, tree, fam.cubes, quots, r, strategy)
    if strategy == "exhaustive":
        return _exhaustive_flat(kind, tree, measure, quots, r)
    raise ValueError(f"unknown strategy {strategy!r}")


def sequential(
    lam: CoefficientMap,
    sigma: Measure,
    omega: Measure,
    p: float,
    q: float,
    side: str = "direct",
    strategy: str = "stopping",
) -> TestingReport:
    """Sequential testing constant over sparse families (l^r aggregation)."""
    ex = exponents(p, q)
    if side == "direct":
        tau = localized_norm_powers(lam, sigma, omega, q)
        return _sequential_from_tau(
            "sequential-direct", lam.tree, tau, q, sigma, p, ex.r, strategy
        )
    if side == "adjoint":
        tau = localized_norm_powers(lam, omega, sigma, ex.p_dual)
        return _sequential_from_tau(
            "sequential-adjoint", lam.tree, tau, ex.p_dual, omega, ex.q_dual, ex.r, strategy
        )
    raise ValueError(f"side must be 'direct' or 'adjoint', got {side!r}")


def sequential_general(
    op: GeneralPositiveOperator,
    sigma: Measure,
    omega: Measure,
    p: float,
    q: float,
    mode: int | None = None,
    strategy: str = "stopping",
    side: str = "direct",
) -> TestingReport:
    """Sequential testing for a kernel operator under a localization mode."""
    ex = exponents(p, q)
    if mode is None:
        mode = 3 if op.lam is not None else 2
    if side == "adjoint":
        adj = GeneralPositiveOperator(op.tree, op.kernel.T.copy(), lam=op.lam)
        tau = localized_norm_powers_general(adj, omega, sigma, ex.p_dual, mode)
        return _sequential_from_tau(
            f"sequential-general-adjoint-mode{mode}",
            op.tree, tau, ex.p_dual, omega, ex.q_dual, ex.r, strategy,
        )
    tau = localized_norm_powers_general(op, sigma, omega, q, mode)
    return _sequential_from_tau(
        f"sequential-general-mode{mode}", op.tree, tau, q, sigma, p, ex.r, strategy
    )


# ---------------------------------------------------------------------------
# nested (bilinear-shaped) testing constants


def _subtree_max(tree: DyadicTree, values: np.ndarray) -> np.ndarray:
    out = np.asarray(values, dtype=float).copy()
    for k in range(tree.depth - 1, -1, -1):
        child_max = out[tree.level_slice(k + 1)].reshape(-1, tree.branching).max(axis=1)
        np.maximum(out[tree.level_slice(k)], child_max, out=out[tree.level_slice(k)])
    return out


def _nested_testing(
    kind: str,
    tree: DyadicTree,
    tau_in: np.ndarray,
    e_in: float,
    sigma_in: Measure,
    p_in: float,
    r_in: float,
    sigma_out: Measure,
    p_out: float,
    r: float,
    strategy: str,
    variant: str,
) -> TestingReport:
    """l^r over F_out of [ l^{r_in} over F_in ⊆ F_out of u(F_in) ] / sigma_out(F_out)^{1/p_out}.

    u(F) = tau_in(F)^{1/e_in} / sigma_in(F)^{1/p_in}.  ``variant`` is
    "trace" (inner members traced from one global family) or "per-outer"
    (an independent inner family per outer member).
    """
    u = _quotients(tau_in, e_in, sigma_in, p_in)
    out_masses = sigma_out.cube_masses
    out_factor = np.zeros(tree.n_cubes)
    np.divide(1.0, out_masses ** (1.0 / p_out), out=out_factor, where=out_masses > 0)

    if r_in == math.inf:
        # Both aggregations collapse to a sup over pairs F_in ⊆ F_out.
        best_inner = _subtree_max(tree, u)
        scores = best_inner * out_factor
        outer = int(np.argmax(scores))
        value = float(scores[outer])
        if value <= 0:
            return TestingReport(kind, 0.0, r, strategy, (), {}, inner_families={})
        inner_pool = tree.descendant_ids(outer)
        inner = int(inner_pool[np.argmax(u[inner_pool])])
        addr = tree.address(outer)
        return TestingReport(
            kind, value, r, strategy, (addr,), {addr: value},
            inner_families={addr: (tree.address(inner),)},
        )

    if strategy == "stopping":
        return _nested_stopping(
            kind, tree, tau_in, sigma_in, r_in, e_in, u, sigma_out, out_factor, r, variant
        )
    if strategy == "exhaustive":
        return _nested_exhaustive(
            kind, tree, sigma_in, u, r_in, sigma_out, out_factor, r, variant
        )
    raise ValueError(f"unknown strategy {strategy!r}")


def _nested_stopping(
    kind, tree, tau_in, sigma_in, r_in, e_in, u, sigma_out, out_factor, r, variant
) -> TestingReport:
    def inner_members(root_id):
        fam = build_superadditive_stopping(tau_in, sigma_in, root=root_id)
        return fam.cubes

    if r == math.inf:
        # Best single outer cube with its own inner family.
        best = (0.0, None, ())
        for fid in range(tree.n_cubes):
            if out_factor[fid] == 0:
                continue
            members = inner_members(fid)
            w = ell_norm(u[list(members)], r_in)
            score = w * out_factor[fid]
            if score > best[0]:
                best = (score, fid, members)
        value, outer, members = best
        if outer is None:
            return TestingReport(kind, 0.0, r, "stopping", (), {}, inner_families={})
        addr = tree.address(outer)
        return TestingReport(
            kind, float(value), r, "stopping", (addr,), {addr: float(value)},
            inner_families={addr: tuple(tree.address(m) for m in members)},
        )

    # Finite outer exponent: outer stopping family driven by the localized
    # sup-function table, inner families per the requested variant.
    ratio_in = superadditive_ratios(np.asarray(tau_in, dtype=float), sigma_in)
    tau_out = _localized_layer_sup_powers(
        tree, ratio_in, sigma_in.leaf_mass, r_in / e_in
    )
    outer_family = build_superadditive_stopping(tau_out, sigma_out)
    global_inner = inner_members(0) if variant == "trace" else None
    contributions: dict[str, float] = {}
    inner_families: dict[str, tuple[str, ...]] = {}
    for fid in outer_family.cubes:
        if variant == "trace":
            members = tuple(m for m in global_inner if tree.is_ancestor(fid, m))
        else:
            members = inner_members(fid)
        w = ell_norm(u[list(members)], r_in)
        addr = tree.address(fid)
        contributions[addr] = float(w * out_factor[fid])
        inner_families[addr] = tuple(tree.address(m) for m in members)
    value = ell_norm(list(contributions.values()), r)
    return TestingReport(
        kind, value, r, "stopping",
        tuple(tree.address(f) for f in outer_family.cubes),
        contributions, inner_families=inner_families,
    )


def _nested_exhaustive(
    kind, tree, sigma_in, u, r_in, sigma_out, out_factor, r, variant
) -> TestingReport:
    inner_fams = [
        np.array(f.cubes, dtype=int)
        for f in enumerate_sparse_families(tree, sigma_in)
    ]
    u_pow = u**r_in
    desc = tree.descendant_matrix

    def inner_sums_for(members: np.ndarray) -> np.ndarray:
        # per outer cube F: sum of u^{r_in} over members contained in F
        if members.size == 0:
            return np.zeros(tree.n_cubes)
        return desc[:, members] @ u_pow[members]

    def outer_best(scores: np.ndarray, outer_masks: np.ndarray):
        # best l^r of scores over each enumerated outer family
        vals = (outer_masks @ scores**r) ** (1.0 / r)
        pos = int(np.argmax(vals))
        return float(vals[pos]), pos

    def outer_masks_for(fams: list[np.ndarray]) -> np.ndarray:
        masks = np.zeros((len(fams), tree.n_cubes))
        for row, fam in enumerate(fams):
            masks[row, fam] = 1.0
        return masks

    if r == math.inf:
        # Only the best single outer cube matters, and any sparse family
        # within it is the trace of a global one, so both variants agree.
        variant = "per-outer"

    if variant == "per-outer":
        # sums[F] only counts members inside F, and restricting a sparse
        # family to the cubes inside F keeps it sparse, so maximizing the
        # per-cube sums over global families realizes the per-outer suprema.
        best_w = np.zeros(tree.n_cubes)
        best_members: list[np.ndarray] = [np.empty(0, dtype=int)] * tree.n_cubes
        for members in inner_fams:
            sums = inner_sums_for(members)
            for fid in np.nonzero(sums > best_w)[0]:
                best_w[fid] = sums[fid]
                best_members[fid] = members[desc[fid, members] > 0]
        w = best_w ** (1.0 / r_in)
        scores = w * out_factor
        if r == math.inf:
            outer = int(np.argmax(scores))
            if scores[outer] <= 0:
                return TestingReport(kind, 0.0, r, "exhaustive", (), {}, inner_families={})
            addr = tree.address(outer)
            return TestingReport(
                kind, float(scores[outer]), r, "exhaustive", (addr,),
                {addr: float(scores[outer])},
                inner_families={addr: tuple(tree.address(m) for m in best_members[outer])},
            )
        outer_fams = [
            np.array(f.cubes, dtype=int)
            for f in enumerate_sparse_families(tree, sigma_out)
        ]
        best_val, pos = outer_best(scores, outer_masks_for(outer_fams))
        best_ids = tuple(int(f) for f in outer_fams[pos])
        contributions = {tree.address(f): float(scores[f]) for f in best_ids}
        return TestingReport(
            kind, best_val, r, "exhaustive",
            tuple(tree.address(f) for f in best_ids), contributions,
            inner_families={
                tree.address(f): tuple(tree.address(m) for m in best_members[f])
                for f in best_ids
            },
        )

    # variant == "trace": joint supremum over (inner family, outer family)
    outer_fams = [
        np.array(f.cubes, dtype=int)
        for f in enumerate_sparse_families(tree, sigma_out)
    ]
    outer_masks = outer_masks_for(outer_fams)
    best = (0.0, np.empty(0, dtype=int), np.empty(0, dtype=int))
    for members in inner_fams:
        sums = inner_sums_for(members)
        w = sums ** (1.0 / r_in)
        scores = w * out_factor
        v, pos = outer_best(scores, outer_masks)
        if v > best[0]:
            best = (v, members, outer_fams[pos])
    value, members, outer = best
    contributions = {}
    inner_families = {}
    for f in outer:
        sums_f = float(u_pow[members[desc[f, members] > 0]].sum()) if members.size else 0.0
        contributions[tree.address(f)] = float(sums_f ** (1.0 / r_in) * out_factor[f])
        inner_families[tree.address(f)] = tuple(
            tree.address(m) for m in members if tree.is_ancestor(f, m)
        )
    return TestingReport(
        kind, float(value), r, "exhaustive",
        tuple(tree.address(f) for f in sorted(outer)), contributions,
        inner_families=inner_families,
    )


def bilinear_sequential(
    lam: CoefficientMap,
    sigma1: Measure,
    sigma2: Measure,
    sigma3: Measure,
    p1: float,
    p2: float,
    p3: float,
    perm: tuple[int, int, int] = (1, 2, 3),
    variant: str = "T",
    strategy: str = "stopping",
) -> TestingReport:
    """Nested testing constant for the permutation (i, j, k).

    variant "T" traces inner members from one global sparse family
    ("F_j ⊆ F_k"); variant "Ttilde" allows an independent inner family per
    outer member.  Always T <= Ttilde.
    """
    if sorted(perm) != [1, 2, 3]:
        raise ValueError(f"perm must permute (1, 2, 3), got {perm}")
    if variant not in ("T", "Ttilde"):
        raise ValueError(f"variant must be 'T' or 'Ttilde', got {variant!r}")
    e3 = exponents3(p1, p2, p3)
    i, j, k = perm
    measures = {1: sigma1, 2: sigma2, 3: sigma3}
    pid = e3.p_dual(i)
    tau_in = localized_bilinear_norm_powers(
        lam, measures[j], measures[k], measures[i], pid
    )
    return _nested_testing(
        f"bilinear-{variant}-{i}{j}{k}",
        lam.tree,
        tau_in,
        pid,
        measures[j],
        e3.p(j),
        e3.r_of(k),
        measures[k],
        e3.p(k),
        e3.r,
        strategy,
        "trace" if variant == "T" else "per-outer",
    )


# ---------------------------------------------------------------------------
# maximal-operator testing constants


def maximal_sequential(
    lam: CoefficientMap,
    assignment: EAssignment,
    sigma: Measure,
    omega: Measure,
    p: float,
    q: float,
    strategy: str = "stopping",
) -> TestingReport:
    """Sequential constant for the linearized maximal operator."""
    ex = exponents(p, q)
    tau = localized_maximal_norm_powers(lam, assignment, sigma, omega, q)
    return _sequential_from_tau(
        "maximal-sequential", lam.tree, tau, q, sigma, p, ex.r, strategy
    )


def bilinear_maximal_sequential(
    lam: CoefficientMap,
    assignment: EAssignment,
    sigma1: Measure,
    sigma2: Measure,
    omega: Measure,
    p1: float,
    p2: float,
    q: float,
    strategy: str = "stopping",
    inner: int = 1,
) -> TestingReport:
    """Nested constant for the bilinear linearized maximal operator.

    ``inner`` selects which input slot is aggregated first (1 or 2); the
    full characterization sums the two reports.  The exponents are
    1/r_i = (1/q - 1/p_i)_+ inside and 1/r = (1/q - 1/p1 - 1/p2)_+ outside.
    """
    for name, value in (("p1", p1), ("p2", p2), ("q", q)):
        if not 1 < value < math.inf:
            raise ValueError(f"{name} must lie in (1, inf)")
    if inner not in (1, 2):
        raise ValueError("inner must be 1 or 2")
    r_inner = math.inf if 1.0 / q - 1.0 / (p1 if inner == 1 else p2) <= 0 else 1.0 / (
        1.0 / q - 1.0 / (p1 if inner == 1 else p2)
    )
    inv_r = 1.0 / q - 1.0 / p1 - 1.0 / p2
    r = math.inf if inv_r <= 0 else 1.0 / inv_r
    tau = localized_bilinear_maximal_norm_powers(
        lam, assignment, sigma1, sigma2, omega, q
    )
    s_in, p_in = (sigma1, p1) if inner == 1 else (sigma2, p2)
    s_out, p_out = (sigma2, p2) if inner == 1 else (sigma1, p1)
    return _nested_testing(
        f"bilinear-maximal-inner{inner}",
        lam.tree, tau, q, s_in, p_in, r_inner, s_out, p_out, r, strategy, "trace",
    )


# ---------------------------------------------------------------------------
# quantitative necessity checks


@dataclass(frozen=True)
class NecessityReport:
    lhs: float
    rhs: float
    passed: bool
    norm_value: float
    constant: float
    per_family: tuple[float, ...] = ()


def necessity_check(
    op,
    sigma: Measure,
    omega: Measure,
    p: float,
    q: float,
    families,
    norm_value: float,
    rel_tol: float = 1e-9,
) -> NecessityReport:
    """l^r sequences of ||T(1_F sigma)|| / sigma(F)^{1/p} against 3p * ||T||.

    ``op`` is a CoefficientMap or a GeneralPositiveOperator; the input-cut
    localization T(1_F sigma) is used, so the bound applies to any positive
    linear operator.  ``families`` is an iterable of cube families.
    """
    ex = exponents(p, q)
    tree = op.tree
    per_family = []
    for family in families:
        ids = family.cubes if isinstance(family, CubeFamily) else [
            tree.flat_id(c) for c in family
        ]
        quots = []
        for fid in ids:
            if sigma.cube_masses[fid] <= 0:
                continue
            if isinstance(op, CoefficientMap):
                img = indicator_image(op, sigma, fid)
            else:
                img = op.localized_indicator_image(sigma, fid, 1)
            quots.append(
                weighted_power_norm(img, omega.leaf_mass, q)
                / sigma.cube_masses[fid] ** (1.0 / p)
            )
        per_family.append(ell_norm(quots, ex.r))
    lhs = max(per_family, default=0.0)
    rhs = 3.0 * p * norm_value
    passed = lhs <= rhs * (1 + rel_tol) + 1e-300
    return NecessityReport(lhs, rhs, passed, norm_value, 3.0 * p, tuple(per_family))


def bilinear_necessity_check(
    lam: CoefficientMap,
    sigma1: Measure,
    sigma2: Measure,
    sigma3: Measure,
    p1: float,
    p2: float,
    p3: float,
    perm: tuple[int, int, int],
    outer_family,
    inner_families: Mapping,
    norm_value: float,
    rel_tol: float = 1e-9,
) -> NecessityReport:
    """Nested sequences of ||T(1_F sigma_j, 1_F sigma_k)|| against 9 p_j p_k ||T||."""
    e3 = exponents3(p1, p2, p3)
    i, j, k = perm
    measures = {1: sigma1, 2: sigma2, 3: sigma3}
    s_i, s_j, s_k = measures[i], measures[j], measures[k]
    pid = e3.p_dual(i)
    r_k = e3.r_of(k)
    tree = lam.tree
    outer_ids = (
        outer_family.cubes
        if isinstance(outer_family, CubeFamily)
        else [tree.flat_id(c) for c in outer_family]
    )
    outer_scores = []
    for fk in outer_ids:
        mass_k = s_k.cube_masses[fk]
        if mass_k <= 0:
            continue
        inner = inner_families.get(fk, inner_families.get(tree.address(fk), ()))
        inner_ids = (
            inner.cubes if isinstance(inner, CubeFamily) else [tree.flat_id(c) for c in inner]
        )
        quots = []
        for fj in inner_ids:
            mass_j = s_j.cube_masses[fj]
            if mass_j <= 0:
                continue
            img = bilinear_indicator_image(lam, s_j, s_k, fj)
            quots.append(
                weighted_power_norm(img, s_i.leaf_mass, pid) / mass_j ** (1.0 / e3.p(j))
            )
        outer_scores.append(ell_norm(quots, r_k) / mass_k ** (1.0 / e3.p(k)))
    lhs = ell_norm(outer_scores, e3.r)
    constant = 9.0 * e3.p(j) * e3.p(k)
    rhs = constant * norm_value
    passed = lhs <= rhs * (1 + rel_tol) + 1e-300
    return NecessityReport(lhs, rhs, passed, norm_value, constant, tuple(outer_scores))
