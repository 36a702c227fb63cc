# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the loops in dyadlab._kernels_py (same semantics)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, pow

cnp.import_array()


cdef inline double _power_norm(double[::1] f, double[::1] masses, double p) noexcept:
    cdef Py_ssize_t i, n = f.shape[0]
    cdef double acc = 0.0
    for i in range(n):
        acc += masses[i] * pow(f[i], p)
    return pow(acc, 1.0 / p)


cdef int _normalize_power(double[::1] g, double[::1] masses, double dual_exponent,
                          double p, double[::1] out) noexcept:
    # out = g**(dual_exponent-1) normalized in L^p(masses); 0 on failure.
    cdef Py_ssize_t i, n = g.shape[0]
    cdef double acc = 0.0, norm
    for i in range(n):
        out[i] = pow(g[i], dual_exponent - 1.0)
        acc += masses[i] * pow(out[i], p)
    norm = pow(acc, 1.0 / p)
    if norm == 0.0 or norm != norm or norm == INFINITY:
        return 0
    for i in range(n):
        out[i] /= norm
    return 1


def alternating_linear(double[:, ::1] B, double[::1] s, double[::1] w,
                       double p, double q, double[::1] f_init,
                       int max_iter, double tol):
    cdef Py_ssize_t m = B.shape[0], n = B.shape[1]
    cdef Py_ssize_t i, x, it
    cdef double p_dual = p / (p - 1.0)
    cdef double norm, val, acc, best_val, prev
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f_arr = np.array(f_init, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] best_arr = f_arr.copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h_arr = np.empty(m)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] u_arr = np.empty(n)
    cdef double[::1] f = f_arr, best_f = best_arr, h = h_arr, u = u_arr
    cdef bint converged = 0
    cdef int iterations = 0

    norm = _power_norm(f, s, p)
    if norm == 0.0:
        return 0.0, f_arr, 0, True
    for i in range(n):
        f[i] /= norm

    best_val = -INFINITY
    prev = -INFINITY
    for it in range(1, max_iter + 1):
        iterations = it
        for x in range(m):
            acc = 0.0
            for i in range(n):
                acc += B[x, i] * f[i]
            h[x] = acc
        val = 0.0
        for x in range(m):
            val += w[x] * pow(h[x], q)
        val = pow(val, 1.0 / q)
        if val > best_val:
            best_val = val
            for i in range(n):
                best_f[i] = f[i]
        if val == 0.0:
            converged = 1
            break
        if prev > 0.0 and val <= prev * (1.0 + tol):
            converged = 1
            break
        prev = val
        for i in range(n):
            acc = 0.0
            for x in range(m):
                acc += B[x, i] * pow(h[x], q - 1.0) * w[x]
            u[i] = acc / s[i] if s[i] > 0.0 else 0.0
        if not _normalize_power(u, s, p_dual, p, f):
            converged = 1
            break
    if best_val < 0.0:
        best_val = 0.0
    return best_val, best_arr, iterations, bool(converged)


def alternating_trilinear(double[:, ::1] U, double[::1] lam,
                          double[::1] s1, double[::1] s2, double[::1] s3,
                          double p1, double p2, double p3,
                          double[::1] f1_init, double[::1] f2_init, double[::1] f3_init,
                          int max_iter, double tol):
    cdef Py_ssize_t nq = U.shape[0], n = U.shape[1]
    cdef Py_ssize_t i, x, it, a, b, c
    cdef double norm, val, acc, best_val, prev, p
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f_arr = np.empty((3, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] best_arr = np.empty((3, n))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] t_arr = np.empty((3, nq))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] g_arr = np.empty(n)
    cdef double[:, ::1] f = f_arr, best = best_arr, t = t_arr
    cdef double[::1] g = g_arr
    cdef double[3] ps
    cdef bint converged = 0
    cdef int iterations = 0

    ps[0], ps[1], ps[2] = p1, p2, p3
    f_arr[0, :] = np.asarray(f1_init)
    f_arr[1, :] = np.asarray(f2_init)
    f_arr[2, :] = np.asarray(f3_init)
    cdef double[:, ::1] masses = np.stack(
        [np.asarray(s1), np.asarray(s2), np.asarray(s3)]
    )
    for a in range(3):
        norm = _power_norm(f[a], masses[a], ps[a])
        if norm == 0.0:
            return 0.0, (f_arr[0], f_arr[1], f_arr[2]), 0, True
        for i in range(n):
            f[a, i] /= norm
    for a in range(3):
        for x in range(nq):
            acc = 0.0
            for i in range(n):
                acc += U[x, i] * f[a, i] * masses[a, i]
            t[a, x] = acc

    best_val = -INFINITY
    prev = -INFINITY
    best_arr[:, :] = f_arr
    for it in range(1, max_iter + 1):
        iterations = it
        for a in range(3):
            b = (a + 1) % 3
            c = (a + 2) % 3
            for i in range(n):
                acc = 0.0
                for x in range(nq):
                    acc += U[x, i] * lam[x] * t[b, x] * t[c, x]
                g[i] = acc
            p = ps[a]
            if not _normalize_power(g, masses[a], p / (p - 1.0), p, f[a]):
                if best_val < 0.0:
                    best_val = 0.0
                return best_val, (best_arr[0], best_arr[1], best_arr[2]), iterations, True
            for x in range(nq):
                acc = 0.0
                for i in range(n):
                    acc += U[x, i] * f[a, i] * masses[a, i]
                t[a, x] = acc
        val = 0.0
        for x in range(nq):
            val += lam[x] * t[0, x] * t[1, x] * t[2, x]
        if val > best_val:
            best_val = val
            best_arr[:, :] = f_arr
        if val == 0.0:
            converged = 1
            break
        if prev > 0.0 and val <= prev * (1.0 + tol):
            converged = 1
            break
        prev = val
    if best_val < 0.0:
        best_val = 0.0
    return best_val, (best_arr[0], best_arr[1], best_arr[2]), iterations, bool(converged)
