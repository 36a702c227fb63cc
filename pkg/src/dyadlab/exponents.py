"""Exponent arithmetic for the linear and trilinear testing theory.

The deficiency exponent r of a (p, q) pair is defined through
1/r = max(1/q - 1/p, 0); r = inf exactly when p <= q.  In the trilinear
normalization with exponents (p1, p2, p3) the output space is L^{p3'} and
1/r_k = (1 - 1/p_i - 1/p_j)_+ for each permutation (i, j, k),
1/r = (1 - 1/p1 - 1/p2 - 1/p3)_+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


def conjugate(p: float) -> float:
    """Hölder conjugate p' = p/(p-1)."""
    return p / (p - 1.0)


def _validate(name: str, value: float) -> None:
    if not (1.0 < value < math.inf):
        raise ValueError(f"{name} must lie in (1, inf), got {value}")


def _inv_to_exponent(inv: float) -> float:
    return math.inf if inv <= 0 else 1.0 / inv


@dataclass(frozen=True)
class ExponentsLinear:
    p: float
    q: float
    p_dual: float = field(init=False)
    q_dual: float = field(init=False)
    r: float = field(init=False)

    def __post_init__(self):
        _validate("p", self.p)
        _validate("q", self.q)
        object.__setattr__(self, "p_dual", conjugate(self.p))
        object.__setattr__(self, "q_dual", conjugate(self.q))
        object.__setattr__(self, "r", _inv_to_exponent(1.0 / self.q - 1.0 / self.p))

    @property
    def adjoint(self) -> "ExponentsLinear":
        """Exponents of the adjoint problem: (q', p'); same r."""
        return ExponentsLinear(self.q_dual, self.p_dual)


@dataclass(frozen=True)
class ExponentsBilinear:
    p1: float
    p2: float
    p3: float
    q: float = field(init=False)
    r: float = field(init=False)
    r_k: tuple[float, float, float] = field(init=False)

    def __post_init__(self):
        for name, value in (("p1", self.p1), ("p2", self.p2), ("p3", self.p3)):
            _validate(name, value)
        ps = (self.p1, self.p2, self.p3)
        object.__setattr__(self, "q", conjugate(self.p3))
        object.__setattr__(
            self, "r", _inv_to_exponent(1.0 - sum(1.0 / p for p in ps))
        )
        rk = tuple(
            _inv_to_exponent(1.0 - sum(1.0 / p for j, p in enumerate(ps) if j != k))
            for k in range(3)
        )
        object.__setattr__(self, "r_k", rk)
        for value in (*rk, self.r):
            assert value > 1.0

    def p(self, i: int) -> float:
        """p_i for i in {1, 2, 3}."""
        return (self.p1, self.p2, self.p3)[i - 1]

    def p_dual(self, i: int) -> float:
        return conjugate(self.p(i))

    def r_of(self, k: int) -> float:
        """r_k for k in {1, 2, 3}."""
        return self.r_k[k - 1]


def exponents(p: float, q: float) -> ExponentsLinear:
    return ExponentsLinear(p, q)


def exponents3(p1: float, p2: float, p3: float) -> ExponentsBilinear:
    return ExponentsBilinear(p1, p2, p3)
