"""Two-weight L^p -> L^q bounds for positive dyadic operators on finite trees.

A desk-scale numerical laboratory: evaluate the operators and potentials on
finite dyadic trees, construct the extremal sparse families, estimate true
operator norms, and verify the characterization results and quantitative
constants by randomized sweeps.
"""

from .chain import ChainInstance, build_chain, chain_quantities, growth_study
from .exponents import ExponentsBilinear, ExponentsLinear, conjugate, exponents, exponents3
from .instance import CoefficientMap, Instance, fixture, make_instance
from .kernels import USING_COMPILED
from .measure import Measure, cube_mass, integrate_and_average, lp_norm
from .normest import NormEstimate, bilinear_norm, linear_norm, maximal_norm
from .operators import (
    EAssignment,
    GeneralPositiveOperator,
    apply_adjoint,
    apply_bilinear,
    apply_dyadic_maximal,
    apply_general,
    apply_linear,
    apply_linearized_maximal,
    apply_maximal_star,
    fractional_preset,
    linearize_maximal,
    linearized_lq_norm,
    trilinear_form,
)
from .potentials import (
    PotentialReport,
    abstract_wolff,
    bilinear_abstract_wolff,
    bilinear_coefficients,
    discrete_wolff,
    lemma25_quantities,
    two_measure_wolff,
    wolff_norm_comparison,
)
from .sparse import (
    CubeFamily,
    StoppingStructure,
    build_principal_cubes,
    build_superadditive_stopping,
    carleson_lhs,
    enumerate_sparse_families,
    is_sparse,
    lemma24_quantities,
    pythagoras_ratio,
    structure,
)
from .testing import (
    TestingReport,
    bilinear_maximal_sequential,
    bilinear_necessity_check,
    bilinear_sequential,
    maximal_sequential,
    necessity_check,
    sawyer,
    sequential,
    sequential_general,
)
from .tree import CubeId, DyadicTree
from .verify import run_verify

__version__ = "0.1.0"
