"""Wolff-type potentials built from cube coefficients and measures.

All potentials are evaluated in one bottom-up tree pass (subtree prefix
sums), and every cube whose relevant mass vanishes contributes zero,
matching the convention of dropping null cubes from sums and suprema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import exponents, exponents3
from .instance import CoefficientMap
from .measure import Measure, weighted_power_norm
from .operators import (
    GeneralPositiveOperator,
    _localized_layer_sup_powers,
    localized_bilinear_norm_powers,
    localized_norm_powers,
    localized_norm_powers_general,
)
from .sparse import superadditive_ratios


@dataclass(frozen=True)
class PotentialReport:
    """A potential as a leaf function plus its per-cube building blocks."""

    potential: np.ndarray
    cube_coefficients: dict[str, dict[str, float]]
    norm: float | None = None
    norm_description: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "potential": self.potential.tolist(),
            "cube_coefficients": self.cube_coefficients,
            "norm": self.norm,
            "norm_description": self.norm_description,
            "extra": self.extra,
        }


def _coefficient_table(tree, **columns) -> dict[str, dict[str, float]]:
    out = {}
    for fid in range(tree.n_cubes):
        out[tree.address(fid)] = {k: float(v[fid]) for k, v in columns.items()}
    return out


def discrete_wolff(
    lam: CoefficientMap, sigma: Measure, omega: Measure, q: float, p: float | None = None
) -> PotentialReport:
    """Cumulative-sum potential, one term lam_Q omega(Q) avg^(q-1) 1_Q per cube.

    avg is the omega-average over Q of the subtree sums of
    lam sigma(Q') omega(Q'); zero-omega cubes contribute nothing.  With p
    given (and q < p), the characterizing norm ||W||_{L^{r/q}(sigma)}^{1/q}
    is attached.
    """
    tree = lam.tree
    inner = tree.subtree_sums(lam.values * sigma.cube_masses * omega.cube_masses)
    wm = omega.cube_masses
    avg = np.divide(inner, wm, out=np.zeros_like(inner), where=wm > 0)
    alpha = lam.values * wm * avg ** (q - 1.0)
    potential = tree.spread_to_leaves(alpha)
    norm = None
    desc = None
    if p is not None:
        ex = exponents(p, q)
        if ex.r == math.inf:
            raise ValueError("characterizing norm requires q < p")
        s = ex.r / q
        norm = weighted_power_norm(potential, sigma.leaf_mass, s) ** (1.0 / q)
        desc = f"L^{s:g}(sigma) norm to the power 1/q"
    return PotentialReport(
        potential,
        _coefficient_table(tree, alpha=alpha, cumulative=inner),
        norm=norm,
        norm_description=desc,
    )


def abstract_wolff(
    op: CoefficientMap | GeneralPositiveOperator,
    sigma: Measure,
    omega: Measure,
    q: float,
    mode: int | None = None,
    p: float | None = None,
) -> PotentialReport:
    """Per-leaf sup over ancestor cubes of ||T_Q(sigma)||^q_{L^q(omega)} / sigma(Q)."""
    if isinstance(op, CoefficientMap):
        tree = op.tree
        tau = (
            localized_norm_powers(op, sigma, omega, q)
            if mode in (None, 3)
            else localized_norm_powers_general(
                GeneralPositiveOperator.from_lambda_form(op), sigma, omega, q, mode
            )
        )
    else:
        tree = op.tree
        if mode is None:
            mode = 3 if op.lam is not None else 2
        tau = localized_norm_powers_general(op, sigma, omega, q, mode)
    ratio = superadditive_ratios(tau, sigma)
    potential = tree.ancestor_max(ratio)
    norm = None
    desc = None
    if p is not None:
        ex = exponents(p, q)
        if ex.r == math.inf:
            raise ValueError("characterizing norm requires q < p")
        s = ex.r / q
        norm = weighted_power_norm(potential, sigma.leaf_mass, s) ** (1.0 / q)
        desc = f"L^{s:g}(sigma) norm to the power 1/q"
    return PotentialReport(
        potential, _coefficient_table(tree, tau=tau, ratio=ratio), norm=norm,
        norm_description=desc,
    )


@dataclass(frozen=True)
class WolffComparison:
    abstract_norm: float
    discrete_norm: float
    ratio: float
    abstract_potential: np.ndarray
    discrete_potential: np.ndarray


def wolff_norm_comparison(
    lam: CoefficientMap, sigma: Measure, omega: Measure, p: float, q: float
) -> WolffComparison:
    """L^{r/q}(sigma) norms of the abstract and discrete potentials, and their ratio."""
    ex = exponents(p, q)
    if not q < p:
        raise ValueError("norm comparison requires 1 < q < p")
    s = ex.r / q
    wa = abstract_wolff(lam, sigma, omega, q).potential
    wd = discrete_wolff(lam, sigma, omega, q).potential
    na = weighted_power_norm(wa, sigma.leaf_mass, s)
    nd = weighted_power_norm(wd, sigma.leaf_mass, s)
    ratio = na / nd if nd > 0 else 1.0 if na == 0 else math.inf
    return WolffComparison(na, nd, ratio, wa, wd)


def bilinear_coefficients(
    lam: CoefficientMap,
    sigma1: Measure,
    sigma2: Measure,
    sigma3: Measure,
    i: int,
    j: int,
    p_i_dual: float,
) -> tuple[np.ndarray, np.ndarray]:
    """The nested cumulative coefficients (lam_{Q,sigma_i}, lam_{Q,sigma_j,sigma_i}).

    lam_{Q,sigma_i} = sigma_i(Q)^{-1} * sum_{Q' ⊆ Q} lam sigma1 sigma2 sigma3 (Q'),
    and the second iterates the construction with the weight
    lam * lam_{.,sigma_i}^{p_i'-1}.
    """
    if i == j or i not in (1, 2, 3) or j not in (1, 2, 3):
        raise ValueError("need distinct i, j in {1, 2, 3}")
    tree = lam.tree
    measures = {1: sigma1, 2: sigma2, 3: sigma3}
    prod = sigma1.cube_masses * sigma2.cube_masses * sigma3.cube_masses
    s1 = tree.subtree_sums(lam.values * prod)
    mi = measures[i].cube_masses
    lam_i = np.divide(s1, mi, out=np.zeros_like(s1), where=mi > 0)
    s2 = tree.subtree_sums(lam.values * lam_i ** (p_i_dual - 1.0) * prod)
    mj = measures[j].cube_masses
    lam_ji = np.divide(s2, mj, out=np.zeros_like(s2), where=mj > 0)
    return lam_i, lam_ji


def two_measure_wolff(
    lam: CoefficientMap,
    sigma1: Measure,
    sigma2: Measure,
    sigma3: Measure,
    p1: float,
    p2: float,
    p3: float,
    perm: tuple[int, int, int] = (1, 2, 3),
) -> PotentialReport:
    """The two-measure potential for the regime 1/p1 + 1/p2 + 1/p3 < 1.

    Per cube: lam_Q * lam_{Q,si}^{p_i'-1} * lam_{Q,sj,si}^{r_k/p_i'-1}
    * sigma_i(Q) sigma_j(Q), spread over Q.  The attached norm is
    || W^{1/r_k} ||_{L^r(sigma_k)}.
    """
    if sorted(perm) != [1, 2, 3]:
        raise ValueError(f"perm must permute (1, 2, 3), got {perm}")
    e3 = exponents3(p1, p2, p3)
    if e3.r == math.inf:
        raise ValueError("two-measure potential requires 1/p1 + 1/p2 + 1/p3 < 1")
    i, j, k = perm
    measures = {1: sigma1, 2: sigma2, 3: sigma3}
    pid = e3.p_dual(i)
    rk = e3.r_of(k)
    lam_i, lam_ji = bilinear_coefficients(lam, sigma1, sigma2, sigma3, i, j, pid)
    tree = lam.tree
    coef = (
        lam.values
        * lam_i ** (pid - 1.0)
        * lam_ji ** (rk / pid - 1.0)
        * measures[i].cube_masses
        * measures[j].cube_masses
    )
    potential = tree.spread_to_leaves(coef)
    norm = weighted_power_norm(potential ** (1.0 / rk), measures[k].leaf_mass, e3.r)
    # degree in lam: the bare factor once, lam_{Q,si} once, lam_{Q,sj,si}
    # of degree p_i'; total 1 + (pid-1) + pid*(rk/pid - 1) = rk.
    degree = 1.0 + (pid - 1.0) + pid * (rk / pid - 1.0)
    return PotentialReport(
        potential,
        _coefficient_table(tree, term=coef, lam_i=lam_i, lam_ji=lam_ji),
        norm=norm,
        norm_description=f"L^{e3.r:g}(sigma_{k}) norm of the 1/r_k power",
        extra={"perm": perm, "r_k": rk, "r": e3.r, "homogeneity_degree": degree},
    )


def bilinear_abstract_wolff(
    lam: CoefficientMap,
    sigma1: Measure,
    sigma2: Measure,
    sigma3: Measure,
    p1: float,
    p2: float,
    p3: float,
    perm: tuple[int, int, int] = (1, 2, 3),
) -> PotentialReport:
    """Case-split abstract potential constant for the permutation (i, j, k).

    Case 1 (1/p_i + 1/p_j >= 1): sup over cubes of the plain quotient.
    Case 2 (< 1 but the full sum >= 1): sup over cubes Q of
        ||W_Q^{1/p_i'}||_{L^{r_k}(sigma_j)} / sigma_k(Q)^{1/p_k}.
    Case 3 (full sum < 1): ||W_T^{1/r_k}||_{L^r(sigma_k)} where W_T is the
        per-leaf sup of the normalized localized tables.
    The constant is returned in ``norm``; ``extra["case"]`` records the case.
    """
    if sorted(perm) != [1, 2, 3]:
        raise ValueError(f"perm must permute (1, 2, 3), got {perm}")
    e3 = exponents3(p1, p2, p3)
    i, j, k = perm
    measures = {1: sigma1, 2: sigma2, 3: sigma3}
    s_i, s_j, s_k = measures[i], measures[j], measures[k]
    pid = e3.p_dual(i)
    rk = e3.r_of(k)
    tree = lam.tree
    tau = localized_bilinear_norm_powers(lam, s_j, s_k, s_i, pid)
    mj, mk = s_j.cube_masses, s_k.cube_masses
    if 1.0 / e3.p(i) + 1.0 / e3.p(j) >= 1.0:
        live = (mj > 0) & (mk > 0)
        quot = np.zeros(tree.n_cubes)
        quot[live] = tau[live] ** (1.0 / pid) / (
            mj[live] ** (1.0 / e3.p(j)) * mk[live] ** (1.0 / e3.p(k))
        )
        value = float(quot.max())
        return PotentialReport(
            tree.ancestor_max(quot),
            _coefficient_table(tree, tau=tau, quotient=quot),
            norm=value,
            norm_description="sup over cubes of the localized-norm quotient",
            extra={"case": 1, "perm": perm},
        )
    ratio = superadditive_ratios(tau, s_j)
    table = _localized_layer_sup_powers(tree, ratio, s_j.leaf_mass, rk / pid)
    if e3.r == math.inf:
        quot = np.zeros(tree.n_cubes)
        live = mk > 0
        quot[live] = table[live] ** (1.0 / rk) / mk[live] ** (1.0 / e3.p(k))
        value = float(quot.max())
        return PotentialReport(
            tree.ancestor_max(quot),
            _coefficient_table(tree, tau=tau, table=table, quotient=quot),
            norm=value,
            norm_description="sup over cubes of the localized sup-table quotient",
            extra={"case": 2, "perm": perm},
        )
    w_t = tree.ancestor_max(superadditive_ratios(table, s_k))
    value = weighted_power_norm(w_t ** (1.0 / rk), s_k.leaf_mass, e3.r)
    return PotentialReport(
        w_t,
        _coefficient_table(tree, tau=tau, table=table),
        norm=value,
        norm_description=f"L^{e3.r:g}(sigma_{k}) norm of the 1/r_k power",
        extra={"case": 3, "perm": perm},
    )


@dataclass(frozen=True)
class CumulativeSumComparison:
    phi_norm: float
    sum_form: float
    sup_form: float


def lemma25_quantities(alpha, sigma: Measure, s: float) -> CumulativeSumComparison:
    """Three comparable quantities for phi = sum_Q alpha_Q 1_Q.

    Returns (||phi||_{L^s(sigma)},
             (sum_Q alpha_Q <phi_Q>_Q^{s-1} sigma(Q))^{1/s},
             || sup_Q 1_Q <phi_Q>_Q ||_{L^s(sigma)}),
    where phi_Q is the localization of the sum to subcubes of Q.
    """
    if not 1 < s < math.inf:
        raise ValueError(f"s must lie in (1, inf), got {s}")
    tree = sigma.tree
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (tree.n_cubes,):
        raise ValueError(f"alpha must have {tree.n_cubes} entries")
    if np.any(alpha < 0):
        raise ValueError("alpha must be nonnegative")
    phi = tree.spread_to_leaves(alpha)
    phi_norm = weighted_power_norm(phi, sigma.leaf_mass, s)
    inner = tree.subtree_sums(alpha * sigma.cube_masses)
    masses = sigma.cube_masses
    loc_avg = np.divide(inner, masses, out=np.zeros_like(inner), where=masses > 0)
    sum_form = float((alpha * loc_avg ** (s - 1.0) * masses).sum() ** (1.0 / s))
    sup_form = weighted_power_norm(tree.ancestor_max(loc_avg), sigma.leaf_mass, s)
    return CumulativeSumComparison(phi_norm, sum_form, sup_form)
