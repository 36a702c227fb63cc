"""Pure-numpy reference implementation of the hot optimization loops.

Semantics must match dyadlab._kernels_c exactly (same iteration, same
stopping rule); the compiled module is just faster.  Both maximize by
alternating closed-form updates: with everything else fixed, the optimal
unit-ball factor is the normalized conjugate power of the partial
application (Hölder equality).
"""

from __future__ import annotations

import numpy as np


def _normalize_power(g: np.ndarray, masses: np.ndarray, dual_exponent: float, p: float):
    """f proportional to g**(dual_exponent - 1) with ||f||_{L^p(masses)} = 1."""
    f = g ** (dual_exponent - 1.0)
    norm = (masses @ f**p) ** (1.0 / p)
    if norm == 0.0 or not np.isfinite(norm):
        return None
    return f / norm


def alternating_linear(B, s, w, p, q, f_init, max_iter, tol):
    """Maximize ||B f||_{L^q(w)} over f >= 0 with ||f||_{L^p(s)} = 1.

    B already carries the input masses (B = kernel * sigma on columns).
    Returns (best_value, best_f, iterations, converged).
    """
    B = np.asarray(B, dtype=float)
    s = np.asarray(s, dtype=float)
    w = np.asarray(w, dtype=float)
    p_dual = p / (p - 1.0)
    q_dual = q / (q - 1.0)

    f = np.asarray(f_init, dtype=float).copy()
    norm = (s @ f**p) ** (1.0 / p)
    if norm == 0.0:
        return 0.0, f, 0, True
    f /= norm

    best_val = -np.inf
    best_f = f.copy()
    prev = -np.inf
    converged = False
    live = s > 0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        h = B @ f
        val = (w @ h**q) ** (1.0 / q)
        if val > best_val:
            best_val = val
            best_f = f.copy()
        if val == 0.0:
            converged = True
            break
        if prev > 0 and val <= prev * (1.0 + tol):
            converged = True
            break
        prev = val
        g = h ** (q - 1.0)
        u = B.T @ (g * w)
        u = np.where(live, np.divide(u, s, out=np.zeros_like(u), where=live), 0.0)
        f_new = _normalize_power(u, s, p_dual, p)
        if f_new is None:
            converged = True
            break
        f = f_new
        _ = q_dual  # documented for symmetry; not needed in the update
    return float(max(best_val, 0.0)), best_f, iterations, converged


def alternating_trilinear(
    U, lam, s1, s2, s3, p1, p2, p3, f1_init, f2_init, f3_init, max_iter, tol
):
    """Maximize sum_Q lam_Q * prod_i (U @ (f_i s_i))_Q over three unit balls.

    Returns (best_value, (f1, f2, f3), iterations, converged).
    """
    U = np.asarray(U, dtype=float)
    lam = np.asarray(lam, dtype=float)
    masses = [np.asarray(s, dtype=float) for s in (s1, s2, s3)]
    ps = [p1, p2, p3]
    fs = []
    for f, s, p in zip((f1_init, f2_init, f3_init), masses, ps):
        f = np.asarray(f, dtype=float).copy()
        norm = (s @ f**p) ** (1.0 / p)
        if norm == 0.0:
            return 0.0, (f1_init, f2_init, f3_init), 0, True
        fs.append(f / norm)

    t = [U @ (fs[a] * masses[a]) for a in range(3)]
    best_val = -np.inf
    best_fs = tuple(f.copy() for f in fs)
    prev = -np.inf
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        for a in range(3):
            b, c = (a + 1) % 3, (a + 2) % 3
            g = U.T @ (lam * t[b] * t[c])
            p = ps[a]
            f_new = _normalize_power(g, masses[a], p / (p - 1.0), p)
            if f_new is None:
                return float(max(best_val, 0.0)), best_fs, iterations, True
            fs[a] = f_new
            t[a] = U @ (fs[a] * masses[a])
        val = float((lam * t[0] * t[1] * t[2]).sum())
        if val > best_val:
            best_val = val
            best_fs = tuple(f.copy() for f in fs)
        if val == 0.0:
            converged = True
            break
        if prev > 0 and val <= prev * (1.0 + tol):
            converged = True
            break
        prev = val
    return float(max(best_val, 0.0)), best_fs, iterations, converged
