import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dyadlab import CubeId, DyadicTree, Measure, cube_mass, integrate_and_average, lp_norm
from dyadlab.measure import cube_averages, ell_norm, weighted_power_norm


def test_cube_counts_and_leaves():
    for depth, branching in [(0, 2), (1, 2), (3, 2), (2, 3), (1, 5)]:
        tree = DyadicTree(depth, branching)
        assert tree.n_cubes == (branching ** (depth + 1) - 1) // (branching - 1)
        assert tree.n_leaves == branching**depth
        # leaves are exactly the level-depth cubes
        assert tree.level_size(depth) == tree.n_leaves


def test_parent_child_addressing():
    tree = DyadicTree(2, 2)
    for cube in tree.cubes():
        fid = tree.flat_id(cube)
        if cube.level > 0:
            parent = tree.cube_id(int(tree.parent_id[fid]))
            assert parent == CubeId(cube.level - 1, cube.index // 2)
        children = [tree.cube_id(c) for c in tree.children_ids(fid)]
        if cube.level < tree.depth:
            assert children == [
                CubeId(cube.level + 1, 2 * cube.index + j) for j in range(2)
            ]
        else:
            assert children == []


def test_address_round_trip():
    tree = DyadicTree(3, 2)
    for fid in range(tree.n_cubes):
        assert tree.flat_id(tree.address(fid)) == fid
    assert tree.flat_id("2/3") == tree.flat_id(CubeId(2, 3))


def test_unknown_cube_rejected():
    tree = DyadicTree(1, 2)
    with pytest.raises(ValueError):
        tree.flat_id((2, 0))
    with pytest.raises(ValueError):
        tree.flat_id((1, 2))
    with pytest.raises(ValueError):
        tree.flat_id(99)


def test_cube_sizes_strictly_decrease():
    tree = DyadicTree(3, 2)
    sizes = [tree.cube_size[tree.flat_id((k, 0))] for k in range(4)]
    assert sizes == [1.0, 0.5, 0.25, 0.125]


def test_cube_mass_examples(f1, f1b):
    assert cube_mass(f1.sigma, "0/0") == 2.0
    assert cube_mass(f1b.sigma, "0/0") == 4.0
    assert cube_mass(f1.sigma, "1/0") == 1.0


def test_measure_validation():
    tree = DyadicTree(1, 2)
    with pytest.raises(ValueError):
        Measure(tree, [1.0])
    with pytest.raises(ValueError):
        Measure(tree, [1.0, -0.5])


@given(
    st.lists(st.floats(0, 10), min_size=8, max_size=8),
    st.integers(0, 2),
)
def test_additivity(masses, level):
    tree = DyadicTree(3, 2)
    sigma = Measure(tree, np.array(masses + [0.0] * (8 - len(masses))))
    for index in range(tree.level_size(level)):
        fid = tree.flat_id((level, index))
        child_sum = sum(sigma.cube_masses[c] for c in tree.children_ids(fid))
        assert sigma.cube_masses[fid] == pytest.approx(child_sum, abs=1e-12)


def test_integrate_and_average_examples(f1, f1b):
    assert integrate_and_average([1, 3], f1.sigma, "0/0") == (4.0, 2.0)
    assert integrate_and_average([0, 0], f1.sigma, "0/0") == (0.0, 0.0)
    assert integrate_and_average([0, 8], f1b.sigma, "1/1") == (8.0, 8.0)


def test_zero_mass_average_convention():
    tree = DyadicTree(1, 2)
    sigma = Measure(tree, [0.0, 1.0])
    integral, average = integrate_and_average([5.0, 1.0], sigma, "1/0")
    assert integral == 0.0 and average == 0.0
    assert cube_averages(np.array([5.0, 1.0]), sigma)[tree.flat_id("1/0")] == 0.0


def test_lp_norm_examples(f0, f1):
    assert lp_norm([1, 3], f1.sigma, 2) == pytest.approx(math.sqrt(10))
    assert lp_norm([0, 0], f1.sigma, 2) == 0.0
    # single atom of mass 4: ||c||_2 = 2c
    assert lp_norm([3.0], f0.sigma, 2) == pytest.approx(6.0)
    with pytest.raises(ValueError):
        lp_norm([1, 1], f1.sigma, 1.0)
    with pytest.raises(ValueError):
        lp_norm([1, 1], f1.sigma, math.inf)


@given(
    st.lists(st.floats(0, 4), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.lists(st.floats(-3, 3), min_size=4, max_size=4),
    st.sampled_from([1.5, 2.0, 3.0]),
)
def test_hoelder_consistency(masses, f, g, p):
    tree = DyadicTree(2, 2)
    sigma = Measure(tree, masses)
    f, g = np.array(f), np.array(g)
    pairing = abs(float((f * g) @ sigma.leaf_mass))
    bound = lp_norm(f, sigma, p) * lp_norm(g, sigma, p / (p - 1))
    assert pairing <= bound * (1 + 1e-9) + 1e-12


def test_ell_norm_infinite_and_empty():
    assert ell_norm([], 2.0) == 0.0
    assert ell_norm([1.0, 3.0, 2.0], math.inf) == 3.0
    assert ell_norm([3.0, 4.0], 2.0) == pytest.approx(5.0)
    assert weighted_power_norm([2.0, 7.0], [1.0, 0.0], math.inf) == 2.0
