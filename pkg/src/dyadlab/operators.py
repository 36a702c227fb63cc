"""Positive dyadic operators on finite trees.

The basic object is the coefficient-form operator

    T(f sigma) = sum_Q  lam_Q * (integral_Q f dsigma) * 1_Q,

its localization T_Q (sum restricted to subcubes of Q), the bilinear
analogue with two integral factors, the dyadic maximal operator, and the
maximal operator M* built from the same coefficients together with its
linearizations.  General positive operators are kept as leaf-by-leaf
kernel matrices.

Localization modes for general operators (selectable wherever a localized
norm is consumed):

    1 - T(1_Q .)            (cut the input)
    2 - 1_Q T(1_Q .)        (cut input and output)
    3 - coefficient form    (sum over subcubes; requires coefficient data)
"""

from __future__ import annotations

import numpy as np

from .instance import CoefficientMap
from .measure import Measure, _as_leaf_function, cube_integrals
from .tree import CubeLike, DyadicTree

LOCALIZATION_MODES = (1, 2, 3)


# ---------------------------------------------------------------------------
# coefficient-form operators


def apply_linear(lam: CoefficientMap, f, sigma: Measure, within: CubeLike | None = None):
    """T(f sigma) as a leaf function; ``within`` restricts the sum to Q' ⊆ within."""
    tree = lam.tree
    coef = lam.values * cube_integrals(f, sigma)
    if within is not None:
        coef = coef * tree.descendant_matrix[tree.flat_id(within)]
    return tree.spread_to_leaves(coef)


def apply_adjoint(lam: CoefficientMap, g, omega: Measure, within: CubeLike | None = None):
    """Formal adjoint T(. omega): the same coefficient sum with the other measure."""
    return apply_linear(lam, g, omega, within)


def apply_bilinear(
    lam: CoefficientMap, f1, sigma1: Measure, f2, sigma2: Measure,
    within: CubeLike | None = None,
):
    """T(f1 sigma1, f2 sigma2) as a leaf function."""
    tree = lam.tree
    coef = lam.values * cube_integrals(f1, sigma1) * cube_integrals(f2, sigma2)
    if within is not None:
        coef = coef * tree.descendant_matrix[tree.flat_id(within)]
    return tree.spread_to_leaves(coef)


def trilinear_form(
    lam: CoefficientMap, f1, f2, f3, sigma1: Measure, sigma2: Measure, sigma3: Measure
) -> float:
    """sum_Q lam_Q * prod_i (integral_Q f_i dsigma_i); symmetric in the three pairs."""
    return float(
        (
            lam.values
            * cube_integrals(f1, sigma1)
            * cube_integrals(f2, sigma2)
            * cube_integrals(f3, sigma3)
        ).sum()
    )


# ---------------------------------------------------------------------------
# general positive operators (leaf-by-leaf kernels)


class GeneralPositiveOperator:
    """Positive linear operator via a nonnegative leaf x leaf kernel.

    Action: (T(f sigma))(x) = sum_l kernel[x, l] * f(l) * sigma(l).
    """

    def __init__(self, tree: DyadicTree, kernel, lam: CoefficientMap | None = None):
        kernel = np.asarray(kernel, dtype=float)
        n = tree.n_leaves
        if kernel.shape != (n, n):
            raise ValueError(f"kernel must be {n}x{n}, got {kernel.shape}")
        if np.any(kernel < 0) or not np.all(np.isfinite(kernel)):
            raise ValueError("kernel entries must be finite and nonnegative")
        self.tree = tree
        self.kernel = kernel
        self.lam = lam

    @classmethod
    def from_lambda_form(cls, lam: CoefficientMap) -> "GeneralPositiveOperator":
        """Exact embedding: kernel[x, l] = sum over cubes containing both x and l."""
        anc = lam.tree.anc
        return cls(lam.tree, anc.T @ (lam.values[:, None] * anc), lam=lam)

    @classmethod
    def multiplication(cls, tree: DyadicTree, m, sigma: Measure) -> "GeneralPositiveOperator":
        """Pointwise multiplication f -> m*f realized as a diagonal kernel."""
        m = _as_leaf_function(tree, m)
        diag = np.divide(
            m, sigma.leaf_mass, out=np.zeros_like(m), where=sigma.leaf_mass > 0
        )
        return cls(tree, np.diag(diag))

    def apply(self, f, sigma: Measure):
        f = _as_leaf_function(self.tree, f)
        return self.kernel @ (f * sigma.leaf_mass)

    def localized_indicator_image(self, sigma: Measure, cube: CubeLike, mode: int):
        """T_Q(sigma) as a leaf function under localization ``mode`` (1, 2 or 3)."""
        tree = self.tree
        fid = tree.flat_id(cube)
        if mode == 3:
            if self.lam is None:
                raise ValueError("mode 3 requires coefficient-form provenance")
            return apply_linear(self.lam, 1.0, sigma, within=fid)
        if mode not in (1, 2):
            raise ValueError(f"unknown localization mode {mode}")
        ind = np.zeros(tree.n_leaves)
        ind[tree.leaf_slice(fid)] = 1.0
        out = self.kernel @ (ind * sigma.leaf_mass)
        if mode == 2:
            keep = np.zeros(tree.n_leaves)
            keep[tree.leaf_slice(fid)] = 1.0
            out = out * keep
        return out


def apply_general(op: GeneralPositiveOperator, f, sigma: Measure):
    """Kernel action weighted by the input measure."""
    return op.apply(f, sigma)


# ---------------------------------------------------------------------------
# maximal operators


def apply_dyadic_maximal(f, sigma: Measure):
    """M^sigma f: per leaf, the max of the averages over its ancestors (f >= 0)."""
    f = _require_nonnegative(sigma.tree, f)
    from .measure import cube_averages

    return sigma.tree.ancestor_max(cube_averages(f, sigma))


def apply_maximal_star(lam: CoefficientMap, f, sigma: Measure):
    """M*(f sigma): per leaf, max over ancestors Q of lam_Q * integral_Q f dsigma."""
    f = _require_nonnegative(lam.tree, f)
    return lam.tree.ancestor_max(lam.values * cube_integrals(f, sigma))


def apply_bilinear_maximal_star(
    lam: CoefficientMap, f1, sigma1: Measure, f2, sigma2: Measure
):
    f1 = _require_nonnegative(lam.tree, f1)
    f2 = _require_nonnegative(lam.tree, f2)
    values = lam.values * cube_integrals(f1, sigma1) * cube_integrals(f2, sigma2)
    return lam.tree.ancestor_max(values)


class EAssignment:
    """Pairwise-disjoint fractional sets E(Q) ⊆ Q, one per cube.

    Stored as fractions x[Q, l] in [0, 1] of each leaf cell l assigned to
    cube Q; column sums at most 1 (disjointness), support only on l ⊆ Q.
    """

    _TOL = 1e-12

    def __init__(self, tree: DyadicTree, matrix, validate: bool = True):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (tree.n_cubes, tree.n_leaves):
            raise ValueError(
                f"assignment must be {tree.n_cubes}x{tree.n_leaves}, got {matrix.shape}"
            )
        if validate:
            if np.any(matrix < -self._TOL) or np.any(matrix > 1 + self._TOL):
                raise ValueError("fractions must lie in [0, 1]")
            if np.any(matrix.sum(axis=0) > 1 + self._TOL):
                raise ValueError("leaf over-assigned: column sums must be <= 1")
            if np.any(matrix[tree.anc == 0] > self._TOL):
                raise ValueError("assignment outside cube support")
        self.tree = tree
        self.matrix = matrix

    @classmethod
    def empty(cls, tree: DyadicTree) -> "EAssignment":
        return cls(tree, np.zeros((tree.n_cubes, tree.n_leaves)), validate=False)

    @classmethod
    def from_leaf_owners(cls, tree: DyadicTree, owners) -> "EAssignment":
        matrix = np.zeros((tree.n_cubes, tree.n_leaves))
        matrix[np.asarray(owners, dtype=int), np.arange(tree.n_leaves)] = 1.0
        return cls(tree, matrix)

    def measure_of(self, cube: CubeLike, measure: Measure) -> float:
        return float(self.matrix[self.tree.flat_id(cube)] @ measure.leaf_mass)

    def measures(self, measure: Measure) -> np.ndarray:
        return self.matrix @ measure.leaf_mass

    def restricted(self, keep_ids) -> "EAssignment":
        matrix = np.zeros_like(self.matrix)
        keep = np.asarray(list(keep_ids), dtype=int)
        matrix[keep] = self.matrix[keep]
        return EAssignment(self.tree, matrix, validate=False)

    @property
    def is_integral(self) -> bool:
        near01 = np.minimum(self.matrix, np.abs(self.matrix - 1.0)) <= self._TOL
        return bool(near01.all())


def _linearize_from_values(tree: DyadicTree, values: np.ndarray) -> EAssignment:
    # Each leaf goes in full to the largest cube on its root chain attaining
    # the running max; strict ancestors of that cube carry strictly smaller
    # values, so ties resolve to the larger cube.
    chains = tree.leaf_ancestor_ids
    chain_vals = values[chains]
    top = chain_vals.max(axis=0)
    first = np.argmax(chain_vals == top, axis=0)
    owners = chains[first, np.arange(tree.n_leaves)]
    return EAssignment.from_leaf_owners(tree, owners)


def linearize_maximal(lam: CoefficientMap, f, sigma: Measure) -> EAssignment:
    """Argmax linearization of M*(f sigma): M_E(f sigma) = M*(f sigma) pointwise."""
    f = _require_nonnegative(lam.tree, f)
    return _linearize_from_values(lam.tree, lam.values * cube_integrals(f, sigma))


def linearize_bilinear_maximal(
    lam: CoefficientMap, f1, sigma1: Measure, f2, sigma2: Measure
) -> EAssignment:
    f1 = _require_nonnegative(lam.tree, f1)
    f2 = _require_nonnegative(lam.tree, f2)
    values = lam.values * cube_integrals(f1, sigma1) * cube_integrals(f2, sigma2)
    return _linearize_from_values(lam.tree, values)


def _linearized_coefficients(
    lam: CoefficientMap, f, sigma: Measure, within: CubeLike | None
) -> np.ndarray:
    coef = lam.values * cube_integrals(f, sigma)
    if within is not None:
        coef = coef * lam.tree.descendant_matrix[lam.tree.flat_id(within)]
    return coef


def apply_linearized_maximal(
    lam: CoefficientMap, assignment: EAssignment, f, sigma: Measure,
    within: CubeLike | None = None,
):
    """M_E(f sigma) = sum_Q lam_Q (integral_Q f dsigma) 1_{E(Q)} as a leaf function.

    Exact when the assignment is integral on each leaf cell; for fractional
    assignments the returned leaf value is the mass-weighted average on the
    cell and norms must be taken with :func:`linearized_lq_norm`.
    """
    coef = _linearized_coefficients(lam, f, sigma, within)
    return assignment.matrix.T @ coef


def linearized_lq_norm(
    lam: CoefficientMap, assignment: EAssignment, f, sigma: Measure,
    omega: Measure, q: float, within: CubeLike | None = None,
) -> float:
    """||M_E(f sigma)||_{L^q(omega)} via the disjoint-support expansion."""
    coef = _linearized_coefficients(lam, f, sigma, within)
    return float((assignment.measures(omega) @ coef**q) ** (1.0 / q))


# ---------------------------------------------------------------------------
# localized norm tables (every cube at once)


def _localized_layer_norm_powers(tree: DyadicTree, coef, weight, e: float) -> np.ndarray:
    # tau[Q] = sum_{l ⊆ Q} weight(l) * (sum over chain cubes Q' with l ⊆ Q' ⊆ Q of coef)^e.
    # Suffix sums along each leaf's ancestor chain give all localizations at once.
    chain_vals = np.asarray(coef, dtype=float)[tree.leaf_ancestor_ids]
    suffix = chain_vals[::-1].cumsum(axis=0)[::-1]
    tau = np.empty(tree.n_cubes)
    for k in range(tree.depth + 1):
        g = weight * suffix[k] ** e
        tau[tree.level_slice(k)] = g.reshape(tree.level_size(k), -1).sum(axis=1)
    return tau


def _localized_layer_sup_powers(tree: DyadicTree, ratios, weight, e: float) -> np.ndarray:
    # out[Q] = sum_{l ⊆ Q} weight(l) * (max over chain cubes Q' with l ⊆ Q' ⊆ Q of ratio)^e
    chain_vals = np.asarray(ratios, dtype=float)[tree.leaf_ancestor_ids]
    suffix = np.maximum.accumulate(chain_vals[::-1], axis=0)[::-1]
    out = np.empty(tree.n_cubes)
    for k in range(tree.depth + 1):
        g = weight * suffix[k] ** e
        out[tree.level_slice(k)] = g.reshape(tree.level_size(k), -1).sum(axis=1)
    return out


def localized_norm_powers(
    lam: CoefficientMap, in_measure: Measure, out_measure: Measure, e: float
) -> np.ndarray:
    """tau_Q = ||T_Q(sigma_in)||^e_{L^e(sigma_out)} for every cube Q (mode 3)."""
    coef = lam.values * in_measure.cube_masses
    return _localized_layer_norm_powers(lam.tree, coef, out_measure.leaf_mass, e)


def localized_bilinear_norm_powers(
    lam: CoefficientMap, sigma_a: Measure, sigma_b: Measure, out_measure: Measure, e: float
) -> np.ndarray:
    """tau_Q = ||T_Q(sigma_a, sigma_b)||^e_{L^e(out)} for every cube Q (mode 3)."""
    coef = lam.values * sigma_a.cube_masses * sigma_b.cube_masses
    return _localized_layer_norm_powers(lam.tree, coef, out_measure.leaf_mass, e)


def localized_norm_powers_general(
    op: GeneralPositiveOperator, in_measure: Measure, out_measure: Measure,
    e: float, mode: int,
) -> np.ndarray:
    """tau_Q = ||T_Q(sigma_in)||^e_{L^e(out)} for a kernel operator, any mode."""
    tree = op.tree
    if mode == 3:
        if op.lam is None:
            raise ValueError("mode 3 requires coefficient-form provenance")
        return localized_norm_powers(op.lam, in_measure, out_measure, e)
    tau = np.empty(tree.n_cubes)
    for fid in range(tree.n_cubes):
        img = op.localized_indicator_image(in_measure, fid, mode)
        tau[fid] = out_measure.leaf_mass @ img**e
    return tau


def localized_maximal_norm_powers(
    lam: CoefficientMap, assignment: EAssignment, in_measure: Measure,
    out_measure: Measure, q: float,
) -> np.ndarray:
    """tau_F = ||M_{E,F}(sigma_in)||^q_{L^q(out)} for every cube F.

    By disjointness of the sets E(Q) this is the subtree sum of
    lam_Q^q * sigma_in(Q)^q * omega(E(Q)).
    """
    per_cube = (
        (lam.values * in_measure.cube_masses) ** q * assignment.measures(out_measure)
    )
    return lam.tree.subtree_sums(per_cube)


def localized_bilinear_maximal_norm_powers(
    lam: CoefficientMap, assignment: EAssignment, sigma_a: Measure, sigma_b: Measure,
    out_measure: Measure, q: float,
) -> np.ndarray:
    per_cube = (
        (lam.values * sigma_a.cube_masses * sigma_b.cube_masses) ** q
        * assignment.measures(out_measure)
    )
    return lam.tree.subtree_sums(per_cube)


def indicator_image(lam: CoefficientMap, sigma: Measure, cube: CubeLike) -> np.ndarray:
    """T(1_F sigma) as a leaf function (input cut to F, sum over all cubes)."""
    tree = lam.tree
    fid = tree.flat_id(cube)
    ind = np.zeros(tree.n_leaves)
    ind[tree.leaf_slice(fid)] = 1.0
    return apply_linear(lam, ind, sigma)


def bilinear_indicator_image(
    lam: CoefficientMap, sigma_a: Measure, sigma_b: Measure, cube: CubeLike
) -> np.ndarray:
    """T(1_F sigma_a, 1_F sigma_b) as a leaf function."""
    tree = lam.tree
    fid = tree.flat_id(cube)
    ind = np.zeros(tree.n_leaves)
    ind[tree.leaf_slice(fid)] = 1.0
    return apply_bilinear(lam, ind, sigma_a, ind, sigma_b)


# ---------------------------------------------------------------------------
# coefficient presets


def fractional_preset(
    tree: DyadicTree, alpha: float, n: int, arity: str = "bilinear"
) -> CoefficientMap:
    """Dyadic fractional-integral coefficients lam_Q = |Q|^(alpha/n - d).

    d = 1 for the linear model (one size factor), d = 2 for the bilinear
    model (two size factors); alpha must lie in (0, d*n).
    """
    if arity == "linear":
        d = 1
    elif arity == "bilinear":
        d = 2
    else:
        raise ValueError(f"arity must be 'linear' or 'bilinear', got {arity!r}")
    if not 0 < alpha < d * n:
        raise ValueError(f"alpha must lie in (0, {d * n}) for {arity} arity")
    return CoefficientMap(tree, tree.cube_size ** (alpha / n - d))


def _require_nonnegative(tree: DyadicTree, f) -> np.ndarray:
    f = _as_leaf_function(tree, f)
    if np.any(f < 0):
        raise ValueError("maximal operators require f >= 0")
    return f
