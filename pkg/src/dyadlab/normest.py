"""Operator-norm estimation by alternating maximization over unit balls.

Estimates are certified lower bounds: the returned value is always the norm
of the operator applied to the returned extremizer, recomputed exactly at
the end.  Upper-bound certification is delegated to the quantitative
necessity inequalities checked elsewhere.

Alternating update (linear case): with g fixed, the pairing
< T(f sigma), g >_omega is maximized over the unit L^p(sigma) ball by the
normalized (p'-1) power of the adjoint image T*(g omega); with f fixed the
dual update is the normalized (q-1) power of T(f sigma).  Multistart from
the constant function, single-cube indicators, and seeded random points;
seeds derive from an instance hash, so runs are reproducible.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .exponents import exponents, exponents3
from .instance import CoefficientMap
from .measure import Measure, weighted_power_norm
from .operators import (
    EAssignment,
    GeneralPositiveOperator,
    apply_maximal_star,
    linearize_maximal,
)

DEFAULT_RESTARTS = 16
DEFAULT_MAX_ITER = 200
DEFAULT_TOL = 1e-10
GRID_RESOLUTION = 64


@dataclass(frozen=True)
class NormEstimate:
    value: float
    extremizer: np.ndarray | tuple[np.ndarray, ...]
    method: str
    runs: int
    iterations: int
    converged: bool
    warning: str | None = None
    assignment: EAssignment | None = None
    arrangement_values: tuple[float, ...] | None = None
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        if isinstance(self.extremizer, tuple):
            extremizer = [np.asarray(f).tolist() for f in self.extremizer]
        else:
            extremizer = np.asarray(self.extremizer).tolist()
        return {
            "value": self.value,
            "extremizer": extremizer,
            "method": self.method,
            "runs": self.runs,
            "iterations": self.iterations,
            "converged": self.converged,
            "warning": self.warning,
        }


def _instance_seed(*arrays, extra: tuple = ()) -> int:
    h = hashlib.blake2b(digest_size=8)
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    h.update(repr(extra).encode())
    return int.from_bytes(h.digest(), "big")


def _random_start(rng: np.random.Generator, n: int) -> np.ndarray:
    return 2.0 ** rng.uniform(-3.0, 3.0, n)


def _linear_problem(op, sigma: Measure):
    if isinstance(op, CoefficientMap):
        op = GeneralPositiveOperator.from_lambda_form(op)
    b = op.kernel * sigma.leaf_mass[None, :]
    return op.tree, np.ascontiguousarray(b)


def _cube_indicator_starts(tree, masses: np.ndarray):
    for fid in range(tree.n_cubes):
        sl = tree.leaf_slice(fid)
        if masses[sl].sum() > 0:
            ind = np.zeros(tree.n_leaves)
            ind[sl] = 1.0
            yield ind


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head, *rest)


def linear_norm(
    op,
    sigma: Measure,
    omega: Measure,
    p: float,
    q: float,
    method: str = "alternating",
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    grid_resolution: int = GRID_RESOLUTION,
) -> NormEstimate:
    """Estimate ||T(. sigma)||_{L^p(sigma) -> L^q(omega)} from below.

    ``op`` is a CoefficientMap or a GeneralPositiveOperator.
    """
    exponents(p, q)
    tree, b = _linear_problem(op, sigma)
    s = sigma.leaf_mass
    w = omega.leaf_mass

    def exact_value(f: np.ndarray) -> tuple[float, np.ndarray]:
        norm = weighted_power_norm(f, s, p)
        if norm == 0:
            return 0.0, f
        f = f / norm
        return float((w @ (b @ f) ** q) ** (1.0 / q)), f

    if method == "exhaustive-grid":
        live = np.nonzero(s > 0)[0]
        if live.size > 4:
            raise ValueError("exhaustive-grid supports at most 4 positive-mass leaves")
        best_val, best_f = 0.0, np.zeros(tree.n_leaves)
        count = 0
        for comp in _compositions(grid_resolution, live.size):
            count += 1
            f = np.zeros(tree.n_leaves)
            f[live] = comp
            val, fn = exact_value(f)
            if val > best_val:
                best_val, best_f = val, fn
        return NormEstimate(
            best_val, best_f, "exhaustive-grid", count, count, True,
            meta={"resolution": grid_resolution},
        )

    if method != "alternating":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(_instance_seed(b, s, w, extra=(p, q)))
    starts = [np.ones(tree.n_leaves)]
    starts.extend(_cube_indicator_starts(tree, s))
    starts.extend(_random_start(rng, tree.n_leaves) for _ in range(restarts))

    best_val, best_f = -1.0, np.ones(tree.n_leaves)
    total_iter = 0
    any_converged = False
    for f0 in starts:
        val, f, iters, conv = kernels.alternating_linear(
            b, s, w, p, q, np.ascontiguousarray(f0), max_iter, tol
        )
        total_iter += iters
        any_converged = any_converged or conv
        if val > best_val:
            best_val, best_f = val, np.asarray(f)
    value, extremizer = exact_value(best_f)
    return NormEstimate(
        value, extremizer, "alternating", len(starts), total_iter, any_converged,
        warning=None if any_converged else "no restart converged",
    )


def bilinear_norm(
    lam: CoefficientMap,
    sigma1: Measure,
    sigma2: Measure,
    sigma3: Measure,
    p1: float,
    p2: float,
    p3: float,
    method: str = "alternating",
    restarts: int = DEFAULT_RESTARTS,
    max_iter: int = 2 * DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    grid_resolution: int = GRID_RESOLUTION,
) -> NormEstimate:
    """Estimate the trilinear-form norm sup of sum_Q lam_Q prod_i (int_Q f_i dsigma_i).

    By duality this is the bilinear operator norm onto L^{p3'}(sigma3); the
    three adjoint arrangements are realized as cyclic update orders, and the
    best of all runs is returned (per-arrangement bests recorded).
    """
    exponents3(p1, p2, p3)
    tree = lam.tree
    u = np.ascontiguousarray(tree.anc)
    lam_vals = np.ascontiguousarray(lam.values)
    measures = (sigma1, sigma2, sigma3)
    ps = (p1, p2, p3)
    masses = [m.leaf_mass for m in measures]

    def exact_value(fs) -> tuple[float, tuple[np.ndarray, ...]]:
        normed = []
        for f, s, p in zip(fs, masses, ps):
            norm = weighted_power_norm(f, s, p)
            if norm == 0:
                return 0.0, tuple(np.asarray(f) for f in fs)
            normed.append(np.asarray(f) / norm)
        t = [u @ (f * s) for f, s in zip(normed, masses)]
        return float((lam_vals * t[0] * t[1] * t[2]).sum()), tuple(normed)

    if method == "exhaustive-grid":
        lives = [np.nonzero(s > 0)[0] for s in masses]
        if any(live.size > 2 for live in lives):
            raise ValueError(
                "trilinear exhaustive-grid supports at most 2 positive-mass leaves per ball"
            )
        best = (0.0, tuple(np.zeros(tree.n_leaves) for _ in range(3)))
        count = 0
        grids = []
        for live in lives:
            pts = []
            for comp in _compositions(grid_resolution, live.size):
                f = np.zeros(tree.n_leaves)
                f[live] = comp
                pts.append(f)
            grids.append(pts)
        for f1 in grids[0]:
            for f2 in grids[1]:
                for f3 in grids[2]:
                    count += 1
                    val, fs = exact_value((f1, f2, f3))
                    if val > best[0]:
                        best = (val, fs)
        return NormEstimate(
            best[0], best[1], "exhaustive-grid", count, count, True,
            meta={"resolution": grid_resolution},
        )

    if method != "alternating":
        raise ValueError(f"unknown method {method!r}")
    rng = np.random.default_rng(
        _instance_seed(lam_vals, *masses, extra=(p1, p2, p3))
    )
    base_starts = [tuple(np.ones(tree.n_leaves) for _ in range(3))]
    base_starts.extend(
        tuple(_random_start(rng, tree.n_leaves) for _ in range(3))
        for _ in range(restarts)
    )
    arrangements = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
    best_val, best_fs = -1.0, base_starts[0]
    arrangement_best = []
    total_iter = 0
    any_converged = False
    for order in arrangements:
        arr_best = 0.0
        for fs in base_starts:
            val, out, iters, conv = kernels.alternating_trilinear(
                u,
                lam_vals,
                *(np.ascontiguousarray(masses[a]) for a in order),
                *(ps[a] for a in order),
                *(np.ascontiguousarray(fs[a]) for a in order),
                max_iter,
                tol,
            )
            total_iter += iters
            any_converged = any_converged or conv
            restored = [None, None, None]
            for pos, a in enumerate(order):
                restored[a] = np.asarray(out[pos])
            if val > arr_best:
                arr_best = val
            if val > best_val:
                best_val, best_fs = val, tuple(restored)
        arrangement_best.append(arr_best)
    value, extremizers = exact_value(best_fs)
    return NormEstimate(
        value, extremizers, "alternating", 3 * len(base_starts), total_iter,
        any_converged,
        warning=None if any_converged else "no restart converged",
        arrangement_values=tuple(arrangement_best),
    )


def _fixed_assignment_problem(lam: CoefficientMap, assignment: EAssignment, sigma, omega):
    tree = lam.tree
    b = (lam.values[:, None] * tree.anc) * sigma.leaf_mass[None, :]
    w = assignment.measures(omega)
    return np.ascontiguousarray(b), w


def maximal_norm(
    lam: CoefficientMap,
    sigma: Measure,
    omega: Measure,
    p: float,
    q: float,
    mode: str = "sup-over-E",
    assignment: EAssignment | None = None,
    restarts: int = 8,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    outer_iterations: int = 60,
) -> NormEstimate:
    """Estimate the maximal-operator norm.

    mode "fixed-E" maximizes ||M_E(f sigma)||_{L^q(omega)} for the given
    assignment (a linear problem); mode "sup-over-E" maximizes the pointwise
    sup operator directly, alternating between the inner linear problem and
    the argmax linearization, which realizes the sup over assignments.
    """
    exponents(p, q)
    tree = lam.tree
    s = sigma.leaf_mass

    if mode == "fixed-E":
        if assignment is None:
            raise ValueError("fixed-E mode requires an assignment")
        b, w = _fixed_assignment_problem(lam, assignment, sigma, omega)
        rng = np.random.default_rng(
            _instance_seed(b, s, w, extra=(p, q, "fixed"))
        )
        starts = [np.ones(tree.n_leaves)]
        starts.extend(_cube_indicator_starts(tree, s))
        starts.extend(_random_start(rng, tree.n_leaves) for _ in range(restarts))
        best_val, best_f = -1.0, np.ones(tree.n_leaves)
        total_iter = 0
        any_converged = False
        for f0 in starts:
            val, f, iters, conv = kernels.alternating_linear(
                b, s, w, p, q, np.ascontiguousarray(f0), max_iter, tol
            )
            total_iter += iters
            any_converged = any_converged or conv
            if val > best_val:
                best_val, best_f = val, np.asarray(f)
        norm = weighted_power_norm(best_f, s, p)
        if norm > 0:
            best_f = best_f / norm
        value = float((w @ (b @ best_f) ** q) ** (1.0 / q))
        return NormEstimate(
            value, best_f, "fixed-E", len(starts), total_iter, any_converged,
            warning=None if any_converged else "no restart converged",
            assignment=assignment,
        )

    if mode != "sup-over-E":
        raise ValueError(f"unknown mode {mode!r}")

    def star_value(f: np.ndarray) -> tuple[float, np.ndarray]:
        norm = weighted_power_norm(f, s, p)
        if norm == 0:
            return 0.0, f
        f = f / norm
        return (
            weighted_power_norm(apply_maximal_star(lam, f, sigma), omega.leaf_mass, q),
            f,
        )

    rng = np.random.default_rng(
        _instance_seed(lam.values, s, omega.leaf_mass, extra=(p, q, "sup"))
    )
    starts = [np.ones(tree.n_leaves)]
    starts.extend(_cube_indicator_starts(tree, s))
    starts.extend(_random_start(rng, tree.n_leaves) for _ in range(restarts))
    best = (-1.0, np.ones(tree.n_leaves), None)
    total_iter = 0
    for f0 in starts:
        val, f = star_value(np.asarray(f0, dtype=float))
        assign = None
        for _ in range(outer_iterations):
            assign = linearize_maximal(lam, f, sigma)
            b, w = _fixed_assignment_problem(lam, assign, sigma, omega)
            _, f_new, iters, _ = kernels.alternating_linear(
                b, s, w, p, q, np.ascontiguousarray(f), max_iter, tol
            )
            total_iter += iters
            new_val, f_new = star_value(np.asarray(f_new))
            if new_val <= val * (1 + tol):
                break
            val, f = new_val, f_new
        if val > best[0]:
            best = (val, f, assign)
    value, extremizer = star_value(best[1])
    return NormEstimate(
        value, extremizer, "sup-over-E", len(starts), total_iter, True,
        assignment=best[2] if best[2] is not None else linearize_maximal(lam, extremizer, sigma),
    )


def bilinear_maximal_norm(
    lam: CoefficientMap,
    assignment: EAssignment,
    sigma1: Measure,
    sigma2: Measure,
    omega: Measure,
    p1: float,
    p2: float,
    q: float,
    restarts: int = 8,
    max_iter: int = DEFAULT_MAX_ITER,
    tol: float = DEFAULT_TOL,
    outer_iterations: int = 40,
) -> NormEstimate:
    """Estimate ||M_E(. sigma1, . sigma2)||_{L^{p1} x L^{p2} -> L^q(omega)}.

    With one factor frozen the problem is linear (the disjoint sets E(Q)
    turn the output into cube atoms weighted by omega(E(Q))), so the two
    factors are optimized alternately, each by the linear kernel.
    """
    tree = lam.tree
    anc = tree.anc
    w_e = assignment.measures(omega)
    s1, s2 = sigma1.leaf_mass, sigma2.leaf_mass

    def exact(f1, f2):
        n1 = weighted_power_norm(f1, s1, p1)
        n2 = weighted_power_norm(f2, s2, p2)
        if n1 == 0 or n2 == 0:
            return 0.0, f1, f2
        f1, f2 = f1 / n1, f2 / n2
        v = lam.values * (anc @ (f1 * s1)) * (anc @ (f2 * s2))
        return float((w_e @ v**q) ** (1.0 / q)), f1, f2

    rng = np.random.default_rng(
        _instance_seed(lam.values, s1, s2, w_e, extra=(p1, p2, q, "bimax"))
    )
    starts = [(np.ones(tree.n_leaves), np.ones(tree.n_leaves))]
    starts.extend(
        (_random_start(rng, tree.n_leaves), _random_start(rng, tree.n_leaves))
        for _ in range(restarts)
    )
    best = (-1.0, starts[0][0], starts[0][1])
    total_iter = 0
    for f1, f2 in starts:
        val, f1, f2 = exact(np.asarray(f1, dtype=float), np.asarray(f2, dtype=float))
        for _ in range(outer_iterations):
            t2 = anc @ (f2 * s2)
            b1 = (lam.values * t2)[:, None] * anc * s1[None, :]
            _, f1_new, it1, _ = kernels.alternating_linear(
                np.ascontiguousarray(b1), s1, w_e, p1, q,
                np.ascontiguousarray(f1), max_iter, tol,
            )
            t1 = anc @ (np.asarray(f1_new) * s1)
            b2 = (lam.values * t1)[:, None] * anc * s2[None, :]
            _, f2_new, it2, _ = kernels.alternating_linear(
                np.ascontiguousarray(b2), s2, w_e, p2, q,
                np.ascontiguousarray(f2), max_iter, tol,
            )
            total_iter += it1 + it2
            new_val, f1_new, f2_new = exact(np.asarray(f1_new), np.asarray(f2_new))
            if new_val <= val * (1 + tol):
                break
            val, f1, f2 = new_val, f1_new, f2_new
        if val > best[0]:
            best = (val, f1, f2)
    value, f1, f2 = exact(best[1], best[2])
    return NormEstimate(
        value, (f1, f2), "fixed-E-bilinear", len(starts), total_iter, True,
        assignment=assignment,
    )


def dominant_ratio_slope(xs, ys) -> float:
    """Least-squares slope of log2(y) against log2(x)."""
    lx = np.log2(np.asarray(xs, dtype=float))
    ly = np.log2(np.asarray(ys, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
