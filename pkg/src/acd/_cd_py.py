"""Pure-Python coordinate-descent kernels (fallback for ``acd._cd_fast``).

Same functions, arguments and results as the compiled module; slower by
roughly two orders of magnitude.
"""
import numpy as np

LASSO = 0


def _scad_value(t, lam, gamma):
    if t <= lam:
        return lam * t
    if t <= gamma * lam:
        return (2.0 * gamma * lam * t - t * t - lam * lam) / (2.0 * (gamma - 1.0))
    return 0.5 * lam * lam * (gamma + 1.0)


def _pen(beta, lam, kind, gamma):
    if kind == LASSO:
        return lam * abs(beta)
    return _scad_value(abs(beta), lam, gamma)


def coord_update(z, v, lam, kind, gamma):
    a = abs(z)
    s = 1.0 if z >= 0.0 else -1.0
    if v <= 0.0:
        return 0.0
    if kind == LASSO:
        return 0.0 if a <= lam else s * (a - lam) / v

    def f(t):
        return 0.5 * v * t * t - a * t + _scad_value(t, lam, gamma)

    cands = [min(max((a - lam) / v, 0.0), lam), lam]
    denom = v * (gamma - 1.0) - 1.0
    if denom > 0.0:
        cands.append(min(max((a * (gamma - 1.0) - gamma * lam) / denom, lam), gamma * lam))
    cands += [gamma * lam, max(a / v, gamma * lam)]
    best, fbest = 0.0, 0.0
    for t in cands:
        ft = f(t)
        if ft < fbest:
            best, fbest = t, ft
    return s * best


def _gram_objective(b, beta, q, lam, kind, gamma):
    return sum(beta[k] * (0.5 * q[k] - b[k]) + _pen(beta[k], lam, kind, gamma)
               for k in range(len(beta)) if beta[k] != 0.0)


def _resid_objective(r, beta, lam, kind, gamma):
    return 0.5 * float(r @ r) / len(r) + sum(_pen(x, lam, kind, gamma) for x in beta)


def _solve_gram(G, b, beta, q, lam, kind, gamma, tol, max_sweeps, trace):
    p = len(beta)
    diag = G.diagonal()
    sweeps, full = 0, True
    if trace is not None:
        trace.append(_gram_objective(b, beta, q, lam, kind, gamma))
    while sweeps < max_sweeps:
        maxd = 0.0
        for k in range(p):
            bk = beta[k]
            if not full and bk == 0.0:
                continue
            v = diag[k]
            new = coord_update(b[k] - q[k] + v * bk, v, lam, kind, gamma)
            d = new - bk
            if d != 0.0:
                beta[k] = new
                q += G[k] * d
                maxd = max(maxd, abs(d))
        sweeps += 1
        if trace is not None:
            trace.append(_gram_objective(b, beta, q, lam, kind, gamma))
        if maxd < tol:
            if full:
                break
            full = True
        else:
            full = False
    return sweeps


def _solve_resid(Xt, colsq, r, beta, lam, kind, gamma, tol, max_sweeps, trace):
    m, p = len(r), len(beta)
    sweeps, full = 0, True
    if trace is not None:
        trace.append(_resid_objective(r, beta, lam, kind, gamma))
    while sweeps < max_sweeps:
        maxd = 0.0
        for k in range(p):
            bk = beta[k]
            if not full and bk == 0.0:
                continue
            v = colsq[k]
            new = coord_update(float(Xt[k] @ r) / m + v * bk, v, lam, kind, gamma)
            d = new - bk
            if d != 0.0:
                beta[k] = new
                r -= Xt[k] * d
                maxd = max(maxd, abs(d))
        sweeps += 1
        if trace is not None:
            trace.append(_resid_objective(r, beta, lam, kind, gamma))
        if maxd < tol:
            if full:
                break
            full = True
        else:
            full = False
    return sweeps


def solve_gram(G, b, beta0, lam, kind, gamma, tol, max_sweeps, record=False):
    G = np.ascontiguousarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    beta = np.array(beta0, dtype=float, copy=True)
    q = G @ beta
    trace = [] if record else None
    sweeps = _solve_gram(G, b, beta, q, lam, kind, gamma, tol, max_sweeps, trace)
    return beta, sweeps, np.array(trace if record else [], dtype=float)


def solve_resid(Xt, y, beta0, lam, kind, gamma, tol, max_sweeps, record=False):
    Xt = np.ascontiguousarray(Xt, dtype=float)
    m = Xt.shape[1]
    beta = np.array(beta0, dtype=float, copy=True)
    r = np.asarray(y, dtype=float) - beta @ Xt
    colsq = np.einsum("km,km->k", Xt, Xt) / m
    trace = [] if record else None
    sweeps = _solve_resid(Xt, colsq, r, beta, lam, kind, gamma, tol, max_sweeps, trace)
    return beta, sweeps, np.array(trace if record else [], dtype=float)


def path_gram(G, b, lambdas, kind, gamma, tol, max_sweeps):
    G = np.ascontiguousarray(G, dtype=float)
    b = np.asarray(b, dtype=float)
    p = G.shape[0]
    out = np.zeros((len(lambdas), p))
    beta, q = np.zeros(p), np.zeros(p)
    for j, lam in enumerate(lambdas):
        _solve_gram(G, b, beta, q, lam, LASSO, gamma, tol, max_sweeps, None)
        if kind == LASSO:
            out[j] = beta
        else:
            beta_s, q_s = beta.copy(), q.copy()
            _solve_gram(G, b, beta_s, q_s, lam, kind, gamma, tol, max_sweeps, None)
            out[j] = beta_s
    return out


def path_resid(Xt, y, lambdas, kind, gamma, tol, max_sweeps):
    Xt = np.ascontiguousarray(Xt, dtype=float)
    p, m = Xt.shape
    colsq = np.einsum("km,km->k", Xt, Xt) / m
    out = np.zeros((len(lambdas), p))
    beta, r = np.zeros(p), np.array(y, dtype=float, copy=True)
    for j, lam in enumerate(lambdas):
        _solve_resid(Xt, colsq, r, beta, lam, LASSO, gamma, tol, max_sweeps, None)
        if kind == LASSO:
            out[j] = beta
        else:
            beta_s, r_s = beta.copy(), r.copy()
            _solve_resid(Xt, colsq, r_s, beta_s, lam, kind, gamma, tol, max_sweeps, None)
            out[j] = beta_s
    return out


__all__ = ["coord_update", "solve_gram", "solve_resid", "path_gram", "path_resid"]
