"""The descending-chain family showing indicator testing fails for q < p.

The instance lives on a depth-N binary tree with Lebesgue-like measure
(every leaf cell carries its own size, side ratio 1/2).  Coefficients sit
on a single nested chain of cubes Q_1 ⊃ Q_2 ⊃ ... ⊃ Q_N down the leftmost
branch, with lam_{Q_m} = |Q_m|^(-1/r - 1); the extra |Q|^{-1} converts the
average normalization into the integral normalization used repo-wide.

Everything of interest is constant on the rings R_0 = root∖Q_1,
R_j = Q_j∖Q_{j+1}, R_N = Q_N, so all quantities are computed exactly on the
(N+1)-dimensional ring decomposition; this is cross-checked against the
dense tree machinery for small N in the test suite.  Only the root and the
chain cubes can carry nonzero localized norms, so testing suprema scan just
those cubes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exponents import exponents
from .instance import Instance, make_instance
from .measure import ell_norm, weighted_power_norm
from .normest import NormEstimate, _instance_seed, _random_start

DENSE_LIMIT = 10


@dataclass(frozen=True)
class ChainInstance:
    n: int
    p: float
    q: float
    r: float
    lam: np.ndarray        # (n+1,); lam[0] = 0 for the root
    cube_mass: np.ndarray  # (n+1,); mass of Q_m (root at m = 0)
    ring_mass: np.ndarray  # (n+1,); R_0, ..., R_{n-1}, R_n = Q_n

    # -- ring calculus -------------------------------------------------------

    def cube_integrals(self, f_ring: np.ndarray) -> np.ndarray:
        """integral over Q_m of a ring-constant function, for m = 0..n."""
        weighted = f_ring * self.ring_mass
        return np.cumsum(weighted[::-1])[::-1]

    def apply(self, f_ring: np.ndarray) -> np.ndarray:
        """T(f sigma) as a ring function."""
        t = self.cube_integrals(f_ring)
        return np.cumsum(self.lam * t)

    def lp_norm(self, f_ring: np.ndarray, e: float) -> float:
        return weighted_power_norm(np.abs(f_ring), self.ring_mass, e)

    def localized_norm_powers(self, e: float) -> np.ndarray:
        """tau[m] = ||T_{Q_m}(sigma)||^e_{L^e(sigma)} for m = 0..n."""
        c = self.lam * self.cube_mass
        csum = np.cumsum(c)
        tau = np.empty(self.n + 1)
        for m in range(self.n + 1):
            base = csum[m - 1] if m >= 1 else 0.0
            partial = csum[m:] - base
            tau[m] = self.ring_mass[m:] @ partial**e
        return tau

    # -- testing constants ---------------------------------------------------

    def _sawyer_one_side(self, p: float, q: float) -> float:
        tau = self.localized_norm_powers(q)
        return float(np.max(tau ** (1.0 / q) / self.cube_mass ** (1.0 / p)))

    def sawyer_pair(self) -> tuple[float, float]:
        ex = exponents(self.p, self.q)
        return (
            self._sawyer_one_side(self.p, self.q),
            self._sawyer_one_side(ex.q_dual, ex.p_dual),
        )

    def _sequential_one_side(self, p: float, q: float, strategy: str) -> float:
        r = exponents(p, q).r
        tau = self.localized_norm_powers(q)
        quots = tau ** (1.0 / q) / self.cube_mass ** (1.0 / p)
        if r == math.inf:
            return float(quots.max())
        if strategy == "exhaustive":
            # every subset of the nested chain is sparse (masses at least
            # halve), so the supremum takes all cubes
            return ell_norm(quots, r)
        if strategy != "stopping":
            raise ValueError(f"unknown strategy {strategy!r}")
        ratio = tau / self.cube_mass
        members = [0]
        cur = 0
        while True:
            nxt = None
            for m in range(cur + 1, self.n + 1):
                if ratio[m] > 2.0 * ratio[cur]:
                    nxt = m
                    break
            if nxt is None:
                break
            members.append(nxt)
            cur = nxt
        return ell_norm(quots[members], r)

    def sequential_pair(self, strategy: str = "stopping") -> tuple[float, float]:
        ex = exponents(self.p, self.q)
        return (
            self._sequential_one_side(self.p, self.q, strategy),
            self._sequential_one_side(ex.q_dual, ex.p_dual, strategy),
        )

    # -- oracle ----------------------------------------------------------------

    def oracle_norm(
        self, restarts: int = 16, max_iter: int = 400, tol: float = 1e-12
    ) -> NormEstimate:
        """Alternating-maximization norm estimate on the ring decomposition.

        Extremizers may be taken ring-constant: the operator sees only the
        ring integrals and averaging within a ring only lowers the input
        norm, so the reduction loses nothing.
        """
        lam_cum = np.cumsum(self.lam)
        idx = np.arange(self.n + 1)
        kernel = lam_cum[np.minimum(idx[:, None], idx[None, :])]
        b = np.ascontiguousarray(kernel * self.ring_mass[None, :])
        s = self.ring_mass
        rng = np.random.default_rng(_instance_seed(b, s, extra=(self.p, self.q)))
        starts = [np.ones(self.n + 1)]
        starts.extend(np.eye(self.n + 1))
        starts.extend(_random_start(rng, self.n + 1) for _ in range(restarts))
        best_val, best_f = -1.0, np.ones(self.n + 1)
        total = 0
        any_conv = False
        for f0 in starts:
            val, f, iters, conv = kernels.alternating_linear(
                b, s, s, self.p, self.q, np.ascontiguousarray(f0), max_iter, tol
            )
            total += iters
            any_conv = any_conv or conv
            if val > best_val:
                best_val, best_f = val, np.asarray(f)
        norm = self.lp_norm(best_f, self.p)
        if norm > 0:
            best_f = best_f / norm
        value = self.lp_norm(self.apply(best_f), self.q)
        return NormEstimate(
            value, best_f, "alternating", len(starts), total, any_conv,
            warning=None if any_conv else "no restart converged",
        )

    # -- dense embedding -------------------------------------------------------

    def to_instance(self) -> Instance:
        """Materialize as a genuine binary-tree instance (small N only)."""
        if self.n > DENSE_LIMIT:
            raise ValueError(f"dense materialization capped at N = {DENSE_LIMIT}")
        leaves = np.full(2**self.n, 2.0**-self.n)
        lam_entries = {f"{k}/0": float(self.lam[k]) for k in range(1, self.n + 1)}
        return make_instance(self.n, 2, leaves, leaves, lam_entries)

    def ring_function_to_leaves(self, f_ring: np.ndarray) -> np.ndarray:
        """Leaf values of a ring-constant function on the dense embedding."""
        n_leaves = 2**self.n
        out = np.empty(n_leaves)
        for j in range(self.n + 1):
            hi = n_leaves >> j  # leaves of Q_j are [0, 2^(n-j))
            lo = hi >> 1 if j < self.n else 0  # drop Q_{j+1}; R_n = Q_n itself
            out[lo:hi] = f_ring[j]
        return out


def build_chain(n: int, p: float, q: float) -> ChainInstance:
    """Chain of length n for exponents 1 < q < p."""
    ex = exponents(p, q)
    if ex.r == math.inf:
        raise ValueError("the chain family targets q < p")
    if n < 1:
        raise ValueError("chain length must be >= 1")
    m = np.arange(n + 1, dtype=float)
    cube_mass = 2.0**-m
    lam = 2.0 ** (m * (1.0 / ex.r + 1.0))
    lam[0] = 0.0
    ring_mass = np.empty(n + 1)
    ring_mass[:-1] = 2.0 ** -(m[:-1] + 1.0)
    ring_mass[-1] = 2.0**-n
    return ChainInstance(n, p, q, ex.r, lam, cube_mass, ring_mass)


@dataclass(frozen=True)
class ChainFunctionReport:
    f_norm: float
    image_norm: float
    sawyer: tuple[float, float]
    ratio: float


def chain_quantities(inst: ChainInstance, b_seq) -> ChainFunctionReport:
    """Evaluate f = sum_k a_k 1_{Q_k} with a_k = b_k |Q_k|^{-1/p}."""
    b_seq = np.asarray(b_seq, dtype=float)
    if b_seq.shape != (inst.n,):
        raise ValueError(f"expected {inst.n} chain values, got {b_seq.shape}")
    if np.any(b_seq < 0):
        raise ValueError("chain coefficients must be nonnegative")
    a = b_seq * inst.cube_mass[1:] ** (-1.0 / inst.p)
    f_ring = np.concatenate([[0.0], np.cumsum(a)])
    f_norm = inst.lp_norm(f_ring, inst.p)
    image_norm = inst.lp_norm(inst.apply(f_ring), inst.q)
    ratio = image_norm / f_norm if f_norm > 0 else 0.0
    return ChainFunctionReport(f_norm, image_norm, inst.sawyer_pair(), ratio)


@dataclass(frozen=True)
class GrowthRow:
    n: int
    norm_est: float
    sawyer: float
    sequential: float
    ratio: float
    ratio_sequential: float


@dataclass(frozen=True)
class GrowthStudy:
    p: float
    q: float
    rows: tuple[GrowthRow, ...]
    slope: float | None

    def csv_rows(self) -> list[dict]:
        out = []
        for i, row in enumerate(self.rows):
            out.append(
                {
                    "N": row.n,
                    "norm_est": row.norm_est,
                    "sawyer": row.sawyer,
                    "sequential": row.sequential,
                    "ratio": row.ratio,
                    "slope": self.slope if i == len(self.rows) - 1 else "",
                }
            )
        return out


def growth_study(p: float, q: float, n_list, **oracle_kwargs) -> GrowthStudy:
    """Per-N norms and testing constants, plus the log-log growth slope.

    The slope is fit to log2(norm / (indicator testing sum)) against
    log2(N); the indicator constants stay bounded while the norm grows like
    N^(1/r), so the expected slope is 1/r.
    """
    n_list = list(n_list)
    if not n_list:
        raise ValueError("need at least one chain length")
    rows = []
    for n in n_list:
        inst = build_chain(int(n), p, q)
        norm = inst.oracle_norm(**oracle_kwargs).value
        t_direct, t_adjoint = inst.sawyer_pair()
        s_direct, s_adjoint = inst.sequential_pair("stopping")
        sawyer_sum = t_direct + t_adjoint
        seq_sum = s_direct + s_adjoint
        rows.append(
            GrowthRow(
                int(n), norm, sawyer_sum, seq_sum,
                norm / sawyer_sum, norm / seq_sum,
            )
        )
    slope = None
    if len(rows) >= 2:
        xs = np.log2([row.n for row in rows])
        ys = np.log2([row.ratio for row in rows])
        slope = float(np.polyfit(xs, ys, 1)[0])
    return GrowthStudy(p, q, tuple(rows), slope)
