import math

import numpy as np
import pytest

from dyadlab import (
    DyadicTree,
    GeneralPositiveOperator,
    Measure,
    abstract_wolff,
    apply_dyadic_maximal,
    bilinear_abstract_wolff,
    bilinear_coefficients,
    bilinear_sequential,
    discrete_wolff,
    exponents3,
    lemma25_quantities,
    make_instance,
    two_measure_wolff,
    wolff_norm_comparison,
)
from dyadlab.instance import CoefficientMap
from dyadlab.measure import weighted_power_norm
from dyadlab.sparse import assert_superadditive


def _random_bilinear(rng, depth=2):
    tree = DyadicTree(depth, 2)
    return make_instance(
        depth, 2,
        rng.uniform(0.1, 2, tree.n_leaves),
        rng.uniform(0.1, 2, tree.n_leaves),
        rng.uniform(0.1, 2, tree.n_cubes),
        sigma2=rng.uniform(0.1, 2, tree.n_leaves),
        sigma3=rng.uniform(0.1, 2, tree.n_leaves),
    )


# -- discrete potential ---------------------------------------------------------


def test_discrete_wolff_f1(f1):
    rep = discrete_wolff(f1.lam, f1.sigma, f1.omega, 2)
    assert rep.potential.tolist() == [10.0, 6.0]
    assert rep.cube_coefficients["0/0"]["alpha"] == 6.0
    assert rep.cube_coefficients["1/0"]["alpha"] == 4.0


def test_discrete_wolff_zero_and_single_cube(f0, f1):
    zero = CoefficientMap(f1.tree)
    assert discrete_wolff(zero, f1.sigma, f1.omega, 2).potential.tolist() == [0, 0]
    s, w, lam, q = 4.0, 1.0, 2.0, 3.0
    rep = discrete_wolff(f0.lam, f0.sigma, f0.omega, q)
    assert rep.potential[0] == pytest.approx(lam**q * s ** (q - 1) * w)


def test_discrete_wolff_zero_omega_cube_contributes_nothing():
    inst = make_instance(1, 2, [1, 1], [0, 1], {"0/0": 1, "1/0": 5})
    rep = discrete_wolff(inst.lam, inst.sigma, inst.omega, 2)
    # the left cube has omega mass 0, so only the root term survives
    assert rep.cube_coefficients["1/0"]["alpha"] == 0.0


# -- abstract potential -----------------------------------------------------------


def test_abstract_wolff_f1(f1):
    rep = abstract_wolff(f1.lam, f1.sigma, f1.omega, 2)
    assert rep.potential.tolist() == [10.0, 10.0]


def test_abstract_wolff_zero(f1):
    zero = CoefficientMap(f1.tree)
    assert abstract_wolff(zero, f1.sigma, f1.omega, 2).potential.tolist() == [0.0, 0.0]


def test_abstract_wolff_multiplication_is_maximal_function(rng):
    # diagonal kernel with sigma = omega: the potential equals M_sigma(m^q)
    tree = DyadicTree(3, 2)
    sigma = Measure(tree, rng.uniform(0.1, 2, tree.n_leaves))
    m = rng.uniform(0, 3, tree.n_leaves)
    q = 2.5
    op = GeneralPositiveOperator.multiplication(tree, m, sigma)
    for mode in (1, 2):
        rep = abstract_wolff(op, sigma, sigma, q, mode=mode)
        assert np.allclose(rep.potential, apply_dyadic_maximal(m**q, sigma))


def test_abstract_wolff_coefficient_map_modes_match_embedding(f1):
    embedded = GeneralPositiveOperator.from_lambda_form(f1.lam)
    for mode in (1, 2):
        a = abstract_wolff(f1.lam, f1.sigma, f1.omega, 2, mode=mode)
        b = abstract_wolff(embedded, f1.sigma, f1.omega, 2, mode=mode)
        assert np.allclose(a.potential, b.potential)


def test_abstract_wolff_superadditivity_feeds_stopping(rng):
    from dyadlab.operators import localized_norm_powers_general

    inst = _random_bilinear(rng, depth=2)
    op = GeneralPositiveOperator.from_lambda_form(inst.lam)
    for mode in (1, 2, 3):
        tau = localized_norm_powers_general(op, inst.sigma, inst.omega, 2.0, mode)
        assert_superadditive(inst.tree, tau)


# -- norm comparison -----------------------------------------------------------------


def test_wolff_norm_comparison_f1(f1):
    comp = wolff_norm_comparison(f1.lam, f1.sigma, f1.omega, 4, 2)
    assert comp.abstract_norm == pytest.approx(math.sqrt(200))
    assert comp.discrete_norm == pytest.approx(math.sqrt(136))
    assert comp.ratio == pytest.approx(math.sqrt(200 / 136))
    # the two potentials differ pointwise even though norms are comparable
    assert not np.allclose(comp.abstract_potential, comp.discrete_potential)


def test_wolff_norm_comparison_zero_and_f0(f0, f1):
    zero = CoefficientMap(f1.tree)
    comp = wolff_norm_comparison(zero, f1.sigma, f1.omega, 4, 2)
    assert comp.abstract_norm == comp.discrete_norm == 0.0
    assert comp.ratio == 1.0
    comp0 = wolff_norm_comparison(f0.lam, f0.sigma, f0.omega, 4, 2)
    assert comp0.ratio == pytest.approx(1.0, abs=1e-12)


def test_wolff_norm_comparison_requires_q_lt_p(f1):
    with pytest.raises(ValueError):
        wolff_norm_comparison(f1.lam, f1.sigma, f1.omega, 2, 4)


# -- two-measure potential -------------------------------------------------------------


def test_bilinear_coefficients_b1(b1):
    lam_i, lam_ji = bilinear_coefficients(b1.lam, *b1.measures3, 1, 2, 4 / 3)
    assert lam_i[0] == pytest.approx(5.0)
    assert lam_i[b1.tree.flat_id("1/0")] == pytest.approx(2.0)
    zero = CoefficientMap(b1.tree)
    li, lji = bilinear_coefficients(zero, *b1.measures3, 1, 2, 4 / 3)
    assert np.all(li == 0) and np.all(lji == 0)
    with pytest.raises(ValueError):
        bilinear_coefficients(b1.lam, *b1.measures3, 2, 2, 4 / 3)


def test_bilinear_coefficients_single_cube_collapse():
    inst = make_instance(
        0, 2, [2.0], [1.0], {"0/0": 3.0}, sigma2=[5.0], sigma3=[7.0]
    )
    lam_i, _ = bilinear_coefficients(inst.lam, *inst.measures3, 1, 2, 1.5)
    # lam_{Q,sigma_1} = lam * sigma_2(Q) * sigma_3(Q)
    assert lam_i[0] == pytest.approx(3.0 * 5.0 * 7.0)


def _straight_line_two_measure(inst, ps, perm):
    """Independent evaluation of the nested coefficient chain, cube by cube."""
    e3 = exponents3(*ps)
    i, j, k = perm
    measures = {1: inst.sigma, 2: inst.sigma2, 3: inst.sigma3}
    tree = inst.tree
    pid = e3.p_dual(i)
    rk = e3.r_of(k)

    def desc(fid):
        return [d for d in range(tree.n_cubes) if tree.is_ancestor(fid, d)]

    def mass(meas, fid):
        return meas.cube_masses[fid]

    lam = inst.lam.values
    prod = lambda fid: (
        mass(measures[1], fid) * mass(measures[2], fid) * mass(measures[3], fid)
    )
    lam_i = np.zeros(tree.n_cubes)
    for fid in range(tree.n_cubes):
        mi = mass(measures[i], fid)
        if mi > 0:
            lam_i[fid] = sum(lam[d] * prod(d) for d in desc(fid)) / mi
    lam_ji = np.zeros(tree.n_cubes)
    for fid in range(tree.n_cubes):
        mj = mass(measures[j], fid)
        if mj > 0:
            lam_ji[fid] = (
                sum(lam[d] * lam_i[d] ** (pid - 1) * prod(d) for d in desc(fid)) / mj
            )
    pot = np.zeros(tree.n_leaves)
    for fid in range(tree.n_cubes):
        term = (
            lam[fid]
            * lam_i[fid] ** (pid - 1)
            * lam_ji[fid] ** (rk / pid - 1)
            * mass(measures[i], fid)
            * mass(measures[j], fid)
        )
        pot[tree.leaf_slice(fid)] += term
    norm = weighted_power_norm(pot ** (1 / rk), measures[k].leaf_mass, e3.r)
    return pot, norm


def test_two_measure_wolff_matches_straight_line(rng, b1):
    ps = (4.0, 4.0, 4.0)
    for inst in [b1] + [_random_bilinear(rng) for _ in range(4)]:
        for perm in [(1, 2, 3), (2, 3, 1), (3, 1, 2)]:
            rep = two_measure_wolff(inst.lam, *inst.measures3, *ps, perm)
            pot, norm = _straight_line_two_measure(inst, ps, perm)
            assert np.allclose(rep.potential, pot, rtol=1e-12)
            assert rep.norm == pytest.approx(norm, rel=1e-12)


def test_two_measure_wolff_zero_and_symmetry(b1, rng):
    zero = CoefficientMap(b1.tree)
    rep = two_measure_wolff(zero, *b1.measures3, 4, 4, 4)
    assert np.all(rep.potential == 0)
    # sigma_1 = sigma_2 and p_1 = p_2: swapping (1,2) leaves the report unchanged
    a = two_measure_wolff(b1.lam, *b1.measures3, 4, 4, 4, (1, 2, 3))
    b = two_measure_wolff(b1.lam, *b1.measures3, 4, 4, 4, (2, 1, 3))
    assert np.allclose(a.potential, b.potential)
    assert a.norm == pytest.approx(b.norm)


def test_two_measure_wolff_requires_small_sum(b1):
    with pytest.raises(ValueError):
        two_measure_wolff(b1.lam, *b1.measures3, 2, 2, 2)


def test_two_measure_homogeneity(rng):
    t = 3.7
    for _ in range(5):
        inst = _random_bilinear(rng, depth=1)
        rep = two_measure_wolff(inst.lam, *inst.measures3, 4, 4, 4)
        scaled = two_measure_wolff(inst.lam.scaled(t), *inst.measures3, 4, 4, 4)
        degree = rep.extra["homogeneity_degree"]
        assert degree == pytest.approx(exponents3(4, 4, 4).r_of(3))
        assert np.allclose(scaled.potential, t**degree * rep.potential, rtol=1e-9)


def test_potential_monotone_in_lambda(rng):
    inst = _random_bilinear(rng, depth=2)
    bumped = CoefficientMap(inst.tree, inst.lam.values + 0.5)
    for perm in [(1, 2, 3), (3, 2, 1)]:
        lo = two_measure_wolff(inst.lam, *inst.measures3, 4, 4, 4, perm)
        hi = two_measure_wolff(bumped, *inst.measures3, 4, 4, 4, perm)
        assert np.all(hi.potential >= lo.potential - 1e-12)
    lo = discrete_wolff(inst.lam, inst.sigma, inst.omega, 2)
    hi = discrete_wolff(bumped, inst.sigma, inst.omega, 2)
    assert np.all(hi.potential >= lo.potential - 1e-12)


# -- case-split abstract potential -------------------------------------------------------


def test_bilinear_abstract_wolff_cases(b1):
    assert bilinear_abstract_wolff(b1.lam, *b1.measures3, 2, 2, 2).extra["case"] == 1
    assert (
        bilinear_abstract_wolff(b1.lam, *b1.measures3, 3, 3, 1.25).extra["case"] == 2
    )
    assert bilinear_abstract_wolff(b1.lam, *b1.measures3, 4, 4, 4).extra["case"] == 3


def test_bilinear_abstract_wolff_case1_by_enumeration(b1):
    rep = bilinear_abstract_wolff(b1.lam, *b1.measures3, 2, 2, 2, (1, 2, 3))
    s1, s2, s3 = b1.measures3
    from dyadlab.operators import localized_bilinear_norm_powers

    tau = localized_bilinear_norm_powers(b1.lam, s2, s3, s1, 2.0)
    best = max(
        tau[fid] ** 0.5 / (s2.cube_masses[fid] ** 0.5 * s3.cube_masses[fid] ** 0.5)
        for fid in range(b1.tree.n_cubes)
        if s2.cube_masses[fid] > 0 and s3.cube_masses[fid] > 0
    )
    assert rep.norm == pytest.approx(best)


def test_bilinear_abstract_wolff_zero(b1):
    zero = CoefficientMap(b1.tree)
    for ps in [(2, 2, 2), (3, 3, 1.25), (4, 4, 4)]:
        rep = bilinear_abstract_wolff(zero, *b1.measures3, *ps)
        assert rep.norm == 0.0


def test_ge_comparability_on_b1(b1):
    # regime-matched testing constants bound the potential constants both ways
    for ps, variant in [((2.0, 2.0, 2.0), "T"), ((4.0, 4.0, 4.0), "Ttilde")]:
        for perm in [(1, 2, 3), (3, 1, 2)]:
            wolff = bilinear_abstract_wolff(b1.lam, *b1.measures3, *ps, perm)
            test = bilinear_sequential(
                b1.lam, *b1.measures3, *ps, perm, variant, "exhaustive"
            )
            assert wolff.norm <= test.value * (1 + 1e-9) + 1e-300
            assert test.value <= 32 * wolff.norm + 1e-300


# -- cumulative-sum quantities -------------------------------------------------------------


def test_lemma25_root_only_collapse():
    inst = make_instance(1, 2, [1, 1], [1, 1], {})
    alpha = np.array([3.0, 0.0, 0.0])
    rep = lemma25_quantities(alpha, inst.sigma, 2.0)
    expected = 3.0 * math.sqrt(2.0)
    assert rep.phi_norm == pytest.approx(expected)
    assert rep.sum_form == pytest.approx(expected)
    assert rep.sup_form == pytest.approx(expected)


def test_lemma25_f1_direct_evaluation(f1):
    alpha = np.array([1.0, 2.0, 0.0])
    s = 2.0
    rep = lemma25_quantities(alpha, f1.sigma, s)
    # phi = (3, 1); localized averages: root (1*2+2*1)/2 = 2, left 2, right 0
    assert rep.phi_norm == pytest.approx(math.sqrt(9 + 1))
    assert rep.sum_form == pytest.approx((1 * 2 ** (s - 1) * 2 + 2 * 2 ** (s - 1) * 1) ** (1 / s))
    assert rep.sup_form == pytest.approx(math.sqrt(4 + 4))


def test_lemma25_window_sweep(rng):
    ratios = []
    for _ in range(60):
        depth = int(rng.integers(1, 5))
        tree = DyadicTree(depth, 2)
        masses = rng.uniform(0, 2, tree.n_leaves)
        masses[rng.random(tree.n_leaves) < 0.1] = 0.0
        sigma = Measure(tree, masses)
        alpha = rng.uniform(0, 2, tree.n_cubes)
        s = float(rng.uniform(1.3, 3.0))
        rep = lemma25_quantities(alpha, sigma, s)
        if rep.phi_norm > 0:
            ratios.append(rep.sum_form / rep.phi_norm)
            ratios.append(rep.sup_form / rep.phi_norm)
    assert ratios and all(2.0**-4 <= r <= 2.0**4 for r in ratios)
