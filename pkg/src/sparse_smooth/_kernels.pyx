# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops; same contracts as ``_kernels_py``."""

from libc.math cimport sqrt, fabs, INFINITY

import numpy as np

OPTIMAL, UNBOUNDED, MAX_PIVOTS = 0, 1, 2


cdef inline double _norm(const double[::1] a) noexcept nogil:
    cdef double acc = 0.0
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        acc += a[i] * a[i]
    return sqrt(acc)


cdef inline void _matvec(const double[:, ::1] A, const double[::1] x, double[::1] out) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double acc
    for i in range(A.shape[0]):
        acc = 0.0
        for j in range(A.shape[1]):
            acc += A[i, j] * x[j]
        out[i] = acc


cdef long _admm(const double[:, ::1] W, const double[::1] v0, const double[:, ::1] Lt,
                double mu, double lam, double alpha, double tol_abs, double tol_rel,
                long max_iter, double[::1] z, double[::1] u, double[::1] diff, double[::1] Lc,
                double[::1] dz, double[::1] tmp, double* r_out, double* s_out) noexcept nogil:
    # returns the converged iteration, or 0 when max_iter is exhausted
    cdef Py_ssize_t p = z.shape[0], i
    cdef double thresh = lam / mu
    cdef double sqrt_p = sqrt(<double>p), sqrt_n = sqrt(<double>Lt.shape[0])
    cdef double xh, v, zn, nlc, nz, eps_pri, eps_dual, r_acc
    cdef long it
    for it in range(1, max_iter + 1):
        for i in range(p):
            diff[i] = z[i] - u[i]
        _matvec(W, diff, Lc)
        r_acc = 0.0
        nlc = 0.0
        nz = 0.0
        for i in range(p):
            Lc[i] += v0[i]
            xh = alpha * Lc[i] + (1.0 - alpha) * z[i]
            v = xh + u[i]
            if v > thresh:
                zn = v - thresh
            elif v < -thresh:
                zn = v + thresh
            else:
                zn = 0.0
            u[i] += xh - zn
            dz[i] = zn - z[i]
            z[i] = zn
            r_acc += (Lc[i] - zn) * (Lc[i] - zn)
            nlc += Lc[i] * Lc[i]
            nz += zn * zn
        r_out[0] = sqrt(r_acc)
        eps_pri = sqrt_p * tol_abs + tol_rel * sqrt(nlc if nlc > nz else nz)
        if r_out[0] > eps_pri:
            continue
        _matvec(Lt, dz, tmp)
        s_out[0] = mu * _norm(tmp)
        _matvec(Lt, u, tmp)
        eps_dual = sqrt_n * tol_abs + tol_rel * mu * _norm(tmp)
        if s_out[0] <= eps_dual:
            return it
    if max_iter > 0:
        _matvec(Lt, dz, tmp)
        s_out[0] = mu * _norm(tmp)
    return 0


def admm_l1_loop(W, v0, Lt, double mu, double lam, double alpha, double tol_abs,
                 double tol_rel, long max_iter, double[::1] z, double[::1] u):
    cdef const double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef const double[:, ::1] Ltv = np.ascontiguousarray(Lt, dtype=np.float64)
    cdef const double[::1] v0v = np.ascontiguousarray(v0, dtype=np.float64)
    cdef Py_ssize_t p = z.shape[0]
    cdef double[::1] diff = np.empty(p)
    cdef double[::1] Lc = np.empty(p)
    cdef double[::1] dz = np.zeros(p)
    cdef double[::1] tmp = np.empty(Ltv.shape[0])
    cdef double r_norm = INFINITY, s_norm = INFINITY
    cdef long it
    with nogil:
        it = _admm(Wv, v0v, Ltv, mu, lam, alpha, tol_abs, tol_rel, max_iter, z, u,
                   diff, Lc, dz, tmp, &r_norm, &s_norm)
    if it > 0:
        return it, r_norm, s_norm, True
    return max_iter, r_norm, s_norm, False


cdef int _simplex(double[:, ::1] T, long[::1] basis, const unsigned char[::1] allowed,
                  double tol, long max_pivots, long* pivots) noexcept nogil:
    cdef Py_ssize_t m = T.shape[0] - 1, ncols = T.shape[1] - 1
    cdef Py_ssize_t i, j, k, entering, leave
    cdef double best, ratio, slack, piv, factor
    while pivots[0] < max_pivots:
        entering = -1
        for j in range(ncols):
            if allowed[j] and T[m, j] < -tol:
                entering = j
                break
        if entering < 0:
            return 0
        best = INFINITY
        for i in range(m):
            if T[i, entering] > tol:
                ratio = T[i, ncols] / T[i, entering]
                if ratio < best:
                    best = ratio
        # ties within the slack go to the smallest basic index
        slack = 1e-12 * (1.0 + fabs(best))
        leave = -1
        for i in range(m):
            if T[i, entering] > tol:
                ratio = T[i, ncols] / T[i, entering]
                if fabs(ratio - best) <= slack and (leave < 0 or basis[i] < basis[leave]):
                    leave = i
        if leave < 0:
            return 1
        piv = T[leave, entering]
        for k in range(ncols + 1):
            T[leave, k] /= piv
        for i in range(m + 1):
            if i != leave:
                factor = T[i, entering]
                if factor != 0.0:
                    for k in range(ncols + 1):
                        T[i, k] -= factor * T[leave, k]
        basis[leave] = entering
        pivots[0] += 1
    return 2


def simplex_iterate(double[:, ::1] T, long[::1] basis, allowed, double tol, long max_pivots):
    cdef const unsigned char[::1] allowed_v = np.ascontiguousarray(allowed, dtype=np.uint8)
    cdef long pivots = 0
    cdef int status
    with nogil:
        status = _simplex(T, basis, allowed_v, tol, max_pivots, &pivots)
    return status, pivots
