# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled coordinate-descent kernels.

Objective (per lambda): 0.5 * beta' G beta - b' beta + sum_k P(beta_k), with
G = X'X / m and b = X'y / m. Penalty codes: 0 = LASSO, 1 = SCAD.
Every routine mirrors ``acd._cd_py`` one for one.
"""
import numpy as np
from libc.math cimport fabs

cdef enum:
    LASSO = 0


cdef inline double _scad_value(double t, double lam, double gamma) noexcept nogil:
    if t <= lam:
        return lam * t
    if t <= gamma * lam:
        return (2.0 * gamma * lam * t - t * t - lam * lam) / (2.0 * (gamma - 1.0))
    return 0.5 * lam * lam * (gamma + 1.0)


cdef inline double _pen(double beta, double lam, int kind, double gamma) noexcept nogil:
    if kind == LASSO:
        return lam * fabs(beta)
    return _scad_value(fabs(beta), lam, gamma)


cdef inline double _uni(double t, double a, double v, double lam, double gamma) noexcept nogil:
    return 0.5 * v * t * t - a * t + _scad_value(t, lam, gamma)


cdef inline double _update(double z, double v, double lam, int kind, double gamma) noexcept nogil:
    # exact minimizer of 0.5*v*b^2 - z*b + P(b)
    cdef double a = fabs(z)
    cdef double s = 1.0 if z >= 0.0 else -1.0
    cdef double best = 0.0, fbest = 0.0, t, ft, denom
    if v <= 0.0:
        return 0.0
    if kind == LASSO:
        if a <= lam:
            return 0.0
        return s * (a - lam) / v
    t = (a - lam) / v
    if t < 0.0:
        t = 0.0
    elif t > lam:
        t = lam
    ft = _uni(t, a, v, lam, gamma)
    if ft < fbest:
        best, fbest = t, ft
    t = lam
    ft = _uni(t, a, v, lam, gamma)
    if ft < fbest:
        best, fbest = t, ft
    denom = v * (gamma - 1.0) - 1.0
    if denom > 0.0:
        t = (a * (gamma - 1.0) - gamma * lam) / denom
        if t < lam:
            t = lam
        elif t > gamma * lam:
            t = gamma * lam
        ft = _uni(t, a, v, lam, gamma)
        if ft < fbest:
            best, fbest = t, ft
    t = gamma * lam
    ft = _uni(t, a, v, lam, gamma)
    if ft < fbest:
        best, fbest = t, ft
    t = a / v
    if t < gamma * lam:
        t = gamma * lam
    ft = _uni(t, a, v, lam, gamma)
    if ft < fbest:
        best, fbest = t, ft
    return s * best


cdef double _gram_objective(double[::1] b, double[::1] beta, double[::1] q,
                            double lam, int kind, double gamma) noexcept nogil:
    cdef Py_ssize_t k, p = beta.shape[0]
    cdef double f = 0.0
    for k in range(p):
        if beta[k] != 0.0:
            f += beta[k] * (0.5 * q[k] - b[k]) + _pen(beta[k], lam, kind, gamma)
    return f


cdef int _solve_gram(double[:, ::1] G, double[::1] b, double[::1] beta, double[::1] q,
                     double lam, int kind, double gamma, double tol, int max_sweeps,
                     double[::1] trace) noexcept nogil:
    cdef Py_ssize_t k, l, p = beta.shape[0]
    cdef int sweeps = 0
    cdef bint full = True, record = trace.shape[0] > 0
    cdef double v, z, new, d, maxd
    if record:
        trace[0] = _gram_objective(b, beta, q, lam, kind, gamma)
    while sweeps < max_sweeps:
        maxd = 0.0
        for k in range(p):
            if not full and beta[k] == 0.0:
                continue
            v = G[k, k]
            z = b[k] - q[k] + v * beta[k]
            new = _update(z, v, lam, kind, gamma)
            d = new - beta[k]
            if d != 0.0:
                beta[k] = new
                for l in range(p):
                    q[l] += G[k, l] * d
                if fabs(d) > maxd:
                    maxd = fabs(d)
        sweeps += 1
        if record and sweeps < trace.shape[0]:
            trace[sweeps] = _gram_objective(b, beta, q, lam, kind, gamma)
        if maxd < tol:
            if full:
                break
            full = True
        else:
            full = False
    return sweeps


cdef double _resid_objective(double[::1] r, double[::1] beta, double lam, int kind,
                             double gamma) noexcept nogil:
    cdef Py_ssize_t i, k, m = r.shape[0], p = beta.shape[0]
    cdef double f = 0.0
    for i in range(m):
        f += r[i] * r[i]
    f = 0.5 * f / m
    for k in range(p):
        f += _pen(beta[k], lam, kind, gamma)
    return f


cdef int _solve_resid(double[:, ::1] Xt, double[::1] colsq, double[::1] r, double[::1] beta,
                      double lam, int kind, double gamma, double tol, int max_sweeps,
                      double[::1] trace) noexcept nogil:
    cdef Py_ssize_t i, k, m = r.shape[0], p = beta.shape[0]
    cdef int sweeps = 0
    cdef bint full = True, record = trace.shape[0] > 0
    cdef double v, z, new, d, maxd
    if record:
        trace[0] = _resid_objective(r, beta, lam, kind, gamma)
    while sweeps < max_sweeps:
        maxd = 0.0
        for k in range(p):
            if not full and beta[k] == 0.0:
                continue
            v = colsq[k]
            z = 0.0
            for i in range(m):
                z += Xt[k, i] * r[i]
            z = z / m + v * beta[k]
            new = _update(z, v, lam, kind, gamma)
            d = new - beta[k]
            if d != 0.0:
                beta[k] = new
                for i in range(m):
                    r[i] -= Xt[k, i] * d
                if fabs(d) > maxd:
                    maxd = fabs(d)
        sweeps += 1
        if record and sweeps < trace.shape[0]:
            trace[sweeps] = _resid_objective(r, beta, lam, kind, gamma)
        if maxd < tol:
            if full:
                break
            full = True
        else:
            full = False
    return sweeps


def coord_update(double z, double v, double lam, int kind, double gamma):
    return _update(z, v, lam, kind, gamma)


def solve_gram(G, b, beta0, double lam, int kind, double gamma, double tol, int max_sweeps,
               bint record=False):
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    beta = np.array(beta0, dtype=np.float64, copy=True)
    q = np.asarray(Gv) @ beta
    trace = np.full(max_sweeps + 1 if record else 0, np.nan)
    cdef double[::1] betav = beta, qv = q, tv = trace
    cdef int sweeps
    with nogil:
        sweeps = _solve_gram(Gv, bv, betav, qv, lam, kind, gamma, tol, max_sweeps, tv)
    return beta, sweeps, trace[: sweeps + 1] if record else trace


def solve_resid(Xt, y, beta0, double lam, int kind, double gamma, double tol, int max_sweeps,
                bint record=False):
    cdef double[:, ::1] Xv = np.ascontiguousarray(Xt, dtype=np.float64)
    m = Xv.shape[1]
    beta = np.array(beta0, dtype=np.float64, copy=True)
    r = np.ascontiguousarray(np.asarray(y, dtype=np.float64) - beta @ np.asarray(Xv))
    colsq = np.einsum("km,km->k", np.asarray(Xv), np.asarray(Xv)) / m
    trace = np.full(max_sweeps + 1 if record else 0, np.nan)
    cdef double[::1] cv = colsq, rv = r, betav = beta, tv = trace
    cdef int sweeps
    with nogil:
        sweeps = _solve_resid(Xv, cv, rv, betav, lam, kind, gamma, tol, max_sweeps, tv)
    return beta, sweeps, trace[: sweeps + 1] if record else trace


def path_gram(G, b, lambdas, int kind, double gamma, double tol, int max_sweeps):
    """Coefficients along a decreasing lambda grid, one row per lambda.

    LASSO solutions are warm-started along the path; SCAD at each lambda
    starts from the LASSO solution at the same lambda.
    """
    cdef double[:, ::1] Gv = np.ascontiguousarray(G, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double[::1] lv = np.ascontiguousarray(lambdas, dtype=np.float64)
    cdef Py_ssize_t p = Gv.shape[0], L = lv.shape[0], j, k
    out = np.zeros((L, p))
    cdef double[:, ::1] ov = out
    cdef double[::1] beta = np.zeros(p), q = np.zeros(p)
    cdef double[::1] beta_s = np.zeros(p), q_s = np.zeros(p)
    cdef double[::1] notrace = np.zeros(0)
    with nogil:
        for j in range(L):
            _solve_gram(Gv, bv, beta, q, lv[j], LASSO, gamma, tol, max_sweeps, notrace)
            if kind == LASSO:
                ov[j, :] = beta
            else:
                beta_s[:] = beta
                q_s[:] = q
                _solve_gram(Gv, bv, beta_s, q_s, lv[j], kind, gamma, tol, max_sweeps, notrace)
                ov[j, :] = beta_s
    return out


def path_resid(Xt, y, lambdas, int kind, double gamma, double tol, int max_sweeps):
    """Residual-update variant of :func:`path_gram` for wide designs (``Xt`` is p x m)."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(Xt, dtype=np.float64)
    cdef double[::1] lv = np.ascontiguousarray(lambdas, dtype=np.float64)
    cdef Py_ssize_t p = Xv.shape[0], m = Xv.shape[1], L = lv.shape[0], j
    colsq_a = np.einsum("km,km->k", np.asarray(Xv), np.asarray(Xv)) / m
    out = np.zeros((L, p))
    cdef double[:, ::1] ov = out
    cdef double[::1] colsq = colsq_a
    cdef double[::1] beta = np.zeros(p), r = np.array(y, dtype=np.float64, copy=True)
    cdef double[::1] beta_s = np.zeros(p), r_s = np.zeros(m)
    cdef double[::1] notrace = np.zeros(0)
    with nogil:
        for j in range(L):
            _solve_resid(Xv, colsq, r, beta, lv[j], LASSO, gamma, tol, max_sweeps, notrace)
            if kind == LASSO:
                ov[j, :] = beta
            else:
                beta_s[:] = beta
                r_s[:] = r
                _solve_resid(Xv, colsq, r_s, beta_s, lv[j], kind, gamma, tol, max_sweeps, notrace)
                ov[j, :] = beta_s
    return out
