import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadlab import (
    DyadicTree,
    EAssignment,
    GeneralPositiveOperator,
    Measure,
    apply_adjoint,
    apply_bilinear,
    apply_dyadic_maximal,
    apply_general,
    apply_linear,
    apply_linearized_maximal,
    apply_maximal_star,
    fixture,
    fractional_preset,
    linearize_maximal,
    linearized_lq_norm,
    make_instance,
    trilinear_form,
)
from dyadlab.instance import CoefficientMap
from dyadlab.operators import (
    apply_bilinear_maximal_star,
    linearize_bilinear_maximal,
    localized_bilinear_norm_powers,
    localized_norm_powers,
    localized_norm_powers_general,
)

masses4 = st.lists(st.floats(0, 8), min_size=4, max_size=4)
lams7 = st.lists(st.floats(0, 4), min_size=7, max_size=7)
funcs4 = st.lists(st.floats(0, 4), min_size=4, max_size=4)


def _random_inst(rng, depth=3):
    tree = DyadicTree(depth, 2)
    return make_instance(
        depth, 2,
        rng.uniform(0, 3, tree.n_leaves),
        rng.uniform(0, 3, tree.n_leaves),
        rng.uniform(0, 2, tree.n_cubes),
    )


# -- linear operator ---------------------------------------------------------


def test_apply_linear_examples(f1):
    assert apply_linear(f1.lam, [1, 3], f1.sigma).tolist() == [6.0, 4.0]
    zero = CoefficientMap(f1.tree)
    assert apply_linear(zero, [1, 3], f1.sigma).tolist() == [0.0, 0.0]
    assert apply_linear(f1.lam, 1.0, f1.sigma, within="1/0").tolist() == [2.0, 0.0]


def test_apply_adjoint_examples(f1):
    assert apply_adjoint(f1.lam, [1, 1], f1.omega).tolist() == [4.0, 2.0]
    assert apply_adjoint(f1.lam, 0.0, f1.omega).tolist() == [0.0, 0.0]


def test_duality_pairing_example(f1):
    f, g = np.array([1.0, 3.0]), np.array([1.0, 1.0])
    lhs = float(apply_linear(f1.lam, f, f1.sigma) @ (g * f1.omega.leaf_mass))
    rhs = float(f @ (apply_adjoint(f1.lam, g, f1.omega) * f1.sigma.leaf_mass))
    assert lhs == rhs == 10.0


@given(lams7, masses4, masses4, funcs4, funcs4)
def test_adjoint_identity(lam_vals, sm, wm, f, g):
    tree = DyadicTree(2, 2)
    sigma, omega = Measure(tree, sm), Measure(tree, wm)
    lam = CoefficientMap(tree, lam_vals)
    f, g = np.array(f), np.array(g)
    lhs = float(apply_linear(lam, f, sigma) @ (g * omega.leaf_mass))
    rhs = float(f @ (apply_adjoint(lam, g, omega) * sigma.leaf_mass))
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


@given(lams7, masses4, funcs4, funcs4)
def test_linearity_and_positivity(lam_vals, sm, f, g):
    tree = DyadicTree(2, 2)
    sigma = Measure(tree, sm)
    lam = CoefficientMap(tree, lam_vals)
    f, g = np.array(f), np.array(g)
    combo = apply_linear(lam, 2.0 * f - 0.5 * g, sigma)
    parts = 2.0 * apply_linear(lam, f, sigma) - 0.5 * apply_linear(lam, g, sigma)
    assert np.allclose(combo, parts, rtol=1e-12, atol=1e-12)
    assert np.all(apply_linear(lam, f, sigma) >= 0)


def test_localization_monotonicity(rng):
    inst = _random_inst(rng)
    tree = inst.tree
    f = rng.uniform(0, 2, tree.n_leaves)
    full = apply_linear(inst.lam, f, inst.sigma)
    for fid in range(tree.n_cubes):
        local = apply_linear(inst.lam, f, inst.sigma, within=fid)
        assert np.all(local <= full + 1e-12)
        for child in tree.children_ids(fid):
            assert np.all(
                apply_linear(inst.lam, f, inst.sigma, within=child) <= local + 1e-12
            )
        # input-cut localization dominates the coefficient localization
        ind = np.zeros(tree.n_leaves)
        ind[tree.leaf_slice(fid)] = f[tree.leaf_slice(fid)]
        assert np.all(local <= apply_linear(inst.lam, ind, inst.sigma) + 1e-12)


# -- general kernel operators -------------------------------------------------


def test_lambda_form_embedding_matches(f1):
    op = GeneralPositiveOperator.from_lambda_form(f1.lam)
    assert apply_general(op, [1, 3], f1.sigma).tolist() == [6.0, 4.0]
    zero = GeneralPositiveOperator(f1.tree, np.zeros((2, 2)))
    assert apply_general(zero, [1, 3], f1.sigma).tolist() == [0.0, 0.0]


def test_diagonal_multiplication_example():
    inst = make_instance(1, 2, [1, 1], [1, 1], {})
    op = GeneralPositiveOperator(inst.tree, np.diag([2.0, 5.0]))
    assert apply_general(op, [1, 1], inst.sigma).tolist() == [2.0, 5.0]


def test_multiplication_constructor_action(rng):
    tree = DyadicTree(2, 2)
    sigma = Measure(tree, rng.uniform(0.1, 2, tree.n_leaves))
    m = rng.uniform(0, 3, tree.n_leaves)
    op = GeneralPositiveOperator.multiplication(tree, m, sigma)
    f = rng.uniform(0, 2, tree.n_leaves)
    assert np.allclose(apply_general(op, f, sigma), m * f)


def test_kernel_validation():
    tree = DyadicTree(1, 2)
    with pytest.raises(ValueError):
        GeneralPositiveOperator(tree, np.ones((3, 3)))
    with pytest.raises(ValueError):
        GeneralPositiveOperator(tree, -np.ones((2, 2)))


def test_localized_norms_against_direct_oracle(rng):
    # brute-force double loop over (cube, leaf) pairs as the independent oracle
    for _ in range(5):
        inst = _random_inst(rng)
        tree = inst.tree
        q = float(rng.uniform(1.2, 3.5))
        tau = localized_norm_powers(inst.lam, inst.sigma, inst.omega, q)
        for fid in range(tree.n_cubes):
            local = apply_linear(inst.lam, 1.0, inst.sigma, within=fid)
            expected = float(inst.omega.leaf_mass @ local**q)
            assert tau[fid] == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_localized_norms_general_modes_agree_with_definitions(rng):
    inst = _random_inst(rng, depth=2)
    tree = inst.tree
    kernel = rng.uniform(0, 2, (tree.n_leaves, tree.n_leaves))
    op = GeneralPositiveOperator(tree, kernel)
    q = 2.0
    tau1 = localized_norm_powers_general(op, inst.sigma, inst.omega, q, 1)
    tau2 = localized_norm_powers_general(op, inst.sigma, inst.omega, q, 2)
    for fid in range(tree.n_cubes):
        ind = np.zeros(tree.n_leaves)
        ind[tree.leaf_slice(fid)] = 1.0
        img = kernel @ (ind * inst.sigma.leaf_mass)
        assert tau1[fid] == pytest.approx(float(inst.omega.leaf_mass @ img**q))
        keep = img * ind
        assert tau2[fid] == pytest.approx(float(inst.omega.leaf_mass @ keep**q))
        assert tau2[fid] <= tau1[fid] + 1e-12


def test_localized_superadditivity_all_modes(rng):
    # disjoint localized norms never exceed the enclosing localized norm
    from dyadlab.sparse import assert_superadditive

    for _ in range(5):
        inst = _random_inst(rng, depth=3)
        op = GeneralPositiveOperator.from_lambda_form(inst.lam)
        for mode in (1, 2, 3):
            tau = localized_norm_powers_general(op, inst.sigma, inst.omega, 2.2, mode)
            assert_superadditive(inst.tree, tau)


# -- bilinear ------------------------------------------------------------------


def test_apply_bilinear_examples(b1):
    s1, s2, _ = b1.measures3
    assert apply_bilinear(b1.lam, 1.0, s1, 1.0, s2).tolist() == [6.0, 4.0]
    assert apply_bilinear(b1.lam, 0.0, s1, 1.0, s2).tolist() == [0.0, 0.0]
    assert apply_bilinear(b1.lam, 1.0, s1, 1.0, s2, within="1/0").tolist() == [2.0, 0.0]


def test_trilinear_form_examples(b1):
    s1, s2, s3 = b1.measures3
    assert trilinear_form(b1.lam, 1, 1, 1, s1, s2, s3) == 10.0
    assert trilinear_form(b1.lam, 0, 1, 1, s1, s2, s3) == 0.0


def test_trilinear_permutation_invariance(rng):
    inst = fixture("B1")
    s = inst.measures3
    fs = [rng.uniform(0, 2, 2) for _ in range(3)]
    base = trilinear_form(inst.lam, *fs, *s)
    for perm in [(1, 0, 2), (2, 1, 0), (1, 2, 0)]:
        permuted = trilinear_form(
            inst.lam, *(fs[i] for i in perm), *(s[i] for i in perm)
        )
        assert permuted == pytest.approx(base, rel=1e-12)


def test_localized_bilinear_norms_against_direct(rng, b1):
    s1, s2, s3 = b1.measures3
    tau = localized_bilinear_norm_powers(b1.lam, s2, s3, s1, 1.5)
    for fid in range(b1.tree.n_cubes):
        local = apply_bilinear(b1.lam, 1.0, s2, 1.0, s3, within=fid)
        assert tau[fid] == pytest.approx(float(s1.leaf_mass @ local**1.5))


# -- maximal operators ----------------------------------------------------------


def test_dyadic_maximal_examples(f1):
    assert apply_dyadic_maximal([1, 3], f1.sigma).tolist() == [2.0, 3.0]
    assert apply_dyadic_maximal([2.5, 2.5], f1.sigma).tolist() == [2.5, 2.5]
    with pytest.raises(ValueError):
        apply_dyadic_maximal([-1, 1], f1.sigma)


def test_maximal_star_examples(f1):
    assert apply_maximal_star(f1.lam, 1.0, f1.sigma).tolist() == [2.0, 2.0]
    zero = CoefficientMap(f1.tree)
    assert apply_maximal_star(zero, 1.0, f1.sigma).tolist() == [0.0, 0.0]
    assert apply_maximal_star(f1.lam, [1, 0], f1.sigma).tolist() == [2.0, 1.0]


def test_linearize_tie_goes_to_larger_cube(f1):
    assignment = linearize_maximal(f1.lam, 1.0, f1.sigma)
    # both leaves attain the max at the root (left value ties, root wins)
    owners = np.argmax(assignment.matrix, axis=0)
    assert owners.tolist() == [0, 0]
    assert np.allclose(
        apply_linearized_maximal(f1.lam, assignment, 1.0, f1.sigma),
        apply_maximal_star(f1.lam, 1.0, f1.sigma),
    )


def test_linearize_strict_dominance(f1):
    assignment = linearize_maximal(f1.lam, [1, 0], f1.sigma)
    owners = np.argmax(assignment.matrix, axis=0)
    # left leaf owned by the left cube (2 > 1), right leaf by the root
    assert owners.tolist() == [f1.tree.flat_id("1/0"), 0]


def test_linearize_root_only():
    inst = make_instance(1, 2, [1, 2], [1, 1], {"0/0": 3.0})
    assignment = linearize_maximal(inst.lam, 1.0, inst.sigma)
    assert np.all(np.argmax(assignment.matrix, axis=0) == 0)


@given(lams7, masses4, funcs4)
def test_linearization_contract(lam_vals, sm, f):
    tree = DyadicTree(2, 2)
    sigma = Measure(tree, sm)
    lam = CoefficientMap(tree, lam_vals)
    f = np.array(f)
    assignment = linearize_maximal(lam, f, sigma)
    star = apply_maximal_star(lam, f, sigma)
    linearized = apply_linearized_maximal(lam, assignment, f, sigma)
    assert np.allclose(linearized, star, rtol=1e-12, atol=1e-12)


def test_other_assignments_never_exceed_star(rng):
    inst = _random_inst(rng, depth=2)
    f = rng.uniform(0, 2, inst.tree.n_leaves)
    star = apply_maximal_star(inst.lam, f, inst.sigma)
    for _ in range(10):
        owners = inst.tree.leaf_ancestor_ids[
            rng.integers(0, inst.tree.depth + 1, inst.tree.n_leaves),
            np.arange(inst.tree.n_leaves),
        ]
        assignment = EAssignment.from_leaf_owners(inst.tree, owners)
        values = apply_linearized_maximal(inst.lam, assignment, f, inst.sigma)
        assert np.all(values <= star + 1e-12)


def test_linearized_norm_matches_fragment_expansion(rng, f1):
    # independent evaluation: enumerate (cube, leaf) fragments directly
    tree = f1.tree
    matrix = np.array([[0.5, 0.25], [0.5, 0.0], [0.0, 0.5]])
    assignment = EAssignment(tree, matrix)
    f = np.array([1.0, 2.0])
    q = 2.3
    value = linearized_lq_norm(f1.lam, assignment, f, f1.sigma, f1.omega, q)
    from dyadlab.measure import cube_integrals

    w = f1.lam.values * cube_integrals(f, f1.sigma)
    direct = 0.0
    for fid in range(tree.n_cubes):
        for leaf in range(tree.n_leaves):
            direct += matrix[fid, leaf] * f1.omega.leaf_mass[leaf] * w[fid] ** q
    assert value == pytest.approx(direct ** (1 / q), rel=1e-12)


def test_empty_assignment_gives_zero(f1):
    assignment = EAssignment.empty(f1.tree)
    assert apply_linearized_maximal(f1.lam, assignment, 1.0, f1.sigma).tolist() == [0, 0]
    assert linearized_lq_norm(f1.lam, assignment, 1.0, f1.sigma, f1.omega, 2.0) == 0.0


def test_assignment_validation(f1):
    tree = f1.tree
    with pytest.raises(ValueError):
        EAssignment(tree, np.full((3, 2), 0.6))  # columns over-assigned
    bad_support = np.zeros((3, 2))
    bad_support[tree.flat_id("1/0"), 1] = 1.0  # leaf outside the cube
    with pytest.raises(ValueError):
        EAssignment(tree, bad_support)


def test_bilinear_maximal_and_linearization(b1, rng):
    s1, s2, _ = b1.measures3
    f1v = rng.uniform(0, 2, 2)
    f2v = rng.uniform(0, 2, 2)
    star = apply_bilinear_maximal_star(b1.lam, f1v, s1, f2v, s2)
    assignment = linearize_bilinear_maximal(b1.lam, f1v, s1, f2v, s2)
    from dyadlab.measure import cube_integrals

    values = b1.lam.values * cube_integrals(f1v, s1) * cube_integrals(f2v, s2)
    assert np.allclose(assignment.matrix.T @ values, star)


# -- fractional preset -----------------------------------------------------------


def test_fractional_preset_examples():
    tree = DyadicTree(2, 2)
    lam = fractional_preset(tree, 1.0, 1, "bilinear")
    assert lam["0/0"] == 1.0 and lam["1/0"] == 2.0 and lam["2/3"] == 4.0
    near_top = fractional_preset(tree, 2.0 - 1e-12, 1, "bilinear")
    assert np.allclose(near_top.values, 1.0)
    lam_lin = fractional_preset(tree, 0.5, 1, "linear")
    assert lam_lin["0/0"] == 1.0
    with pytest.raises(ValueError):
        fractional_preset(tree, 2.5, 1, "bilinear")
    with pytest.raises(ValueError):
        fractional_preset(tree, 1.5, 1, "linear")
    with pytest.raises(ValueError):
        fractional_preset(tree, 1.0, 1, "trilinear")
