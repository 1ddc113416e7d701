"""OLS leverage, delete-one estimates and Cook's distance.

Everything is solved through a thin QR factorization of ``[1 | X]``; the
inverse of the cross-product matrix is never formed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .data import Dataset
from .errors import ACDError, SingularDesignError
from .penalized import PenaltySpec, local_fit

# R factors with a larger condition number are treated as rank deficient
MAX_CONDITION = 1e12


def design_matrix(d: Dataset) -> np.ndarray:
    return np.column_stack([np.ones(d.n), d.X])


@dataclass(frozen=True)
class OlsFit:
    beta_hat: np.ndarray
    residuals: np.ndarray
    leverages: np.ndarray
    sigma2_hat: float
    R: np.ndarray  # upper-triangular factor of [1 | X]

    @property
    def rank(self) -> int:
        return len(self.beta_hat)

    def xtx_solve(self, v: np.ndarray) -> np.ndarray:
        """``(X'X)^{-1} v`` via two triangular solves."""
        t = solve_triangular(self.R, v, trans="T")
        return solve_triangular(self.R, t)


def ols(d: Dataset) -> OlsFit:
    X = design_matrix(d)
    n, k = X.shape
    if n <= k:
        raise SingularDesignError(f"OLS needs n > p+1, got n={n}, p+1={k}", stage="ols")
    Q, R = np.linalg.qr(X)
    sv = np.linalg.svd(R, compute_uv=False)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if cond > MAX_CONDITION:
        raise SingularDesignError(f"design is rank deficient (condition number {cond:.3g})",
                                  stage="ols")
    beta = solve_triangular(R, Q.T @ d.y)
    e = d.y - X @ beta
    h = np.einsum("ij,ij->i", Q, Q)
    return OlsFit(beta_hat=beta, residuals=e, leverages=h,
                  sigma2_hat=float(e @ e) / (n - k), R=R)


def delete_one(fit: OlsFit, d: Dataset, i: int) -> np.ndarray:
    """OLS coefficients without row ``i`` from the leverage/residual update."""
    h = fit.leverages[i]
    if h >= 1 - 1e-10:
        raise SingularDesignError(f"leverage of row {i} is 1; deletion leaves the fit undefined",
                                  stage="delete_one")
    x = np.concatenate([[1.0], d.X[i]])
    return fit.beta_hat - fit.xtx_solve(x) * fit.residuals[i] / (1 - h)


def refit_without(d: Dataset, i: int) -> np.ndarray:
    """Brute-force OLS on the remaining n-1 rows."""
    keep = np.arange(d.n) != i
    return ols(d.subset(keep)).beta_hat


def _dim(fit: OlsFit, convention: str) -> int:
    if convention == "p":
        return fit.rank - 1
    if convention == "p+1":
        return fit.rank
    raise ACDError(f"unknown Cook's distance convention {convention!r}")


def _check_sigma(fit: OlsFit, d: Dataset):
    # residuals at rounding level of y mean the fit is exact
    rss = fit.sigma2_hat * (d.n - fit.rank)
    if not rss > (64 * np.finfo(float).eps * np.linalg.norm(d.y)) ** 2:
        raise ACDError("sigma^2 is zero (perfect fit); Cook's distance undefined",
                       stage="cooks_distance")


def cooks_distance(fit: OlsFit, d: Dataset, convention: str = "p") -> np.ndarray:
    """Cook's distance from residuals and leverages.

    ``convention`` picks the denominator: ``"p"`` (predictors only) or
    ``"p+1"`` (all coefficients, the textbook choice with an intercept).
    """
    _check_sigma(fit, d)
    e, h = fit.residuals, fit.leverages
    return e**2 * h / (_dim(fit, convention) * fit.sigma2_hat * (1 - h) ** 2)


def cooks_distance_by_deletion(fit: OlsFit, d: Dataset, convention: str = "p") -> np.ndarray:
    """Definition form: (b - b_(i))' X'X (b - b_(i)) / (dim * sigma^2)."""
    _check_sigma(fit, d)
    X = design_matrix(d)
    out = np.empty(d.n)
    for i in range(d.n):
        delta = fit.beta_hat - delete_one(fit, d, i)
        Xd = X @ delta
        out[i] = Xd @ Xd
    return out / (_dim(fit, convention) * fit.sigma2_hat)


@dataclass(frozen=True)
class EquivalenceReport:
    index: int
    ok: bool
    max_abs_diff: float = np.nan
    centered_slope_diff: float = np.nan
    centered_intercept_diff: float = np.nan
    singular: bool = False
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok


def binary_weight_equivalence_check(d: Dataset, i: int, tol: float = 1e-8) -> EquivalenceReport:
    """Check that the unpenalized fit with weight 0 on row ``i`` and 1 elsewhere
    reproduces the delete-one estimate, both uncentered and anchor-centered.

    When row ``i`` has leverage 1 both routes must fail; that counts as
    agreement and is reported with ``singular=True``.
    """
    w = np.ones(d.n)
    w[i] = 0.0
    zero = PenaltySpec("lasso", lam=0.0)
    errors = []
    try:
        beta_del = delete_one(ols(d), d, i)
    except SingularDesignError as exc:
        beta_del = None
        errors.append(str(exc))
    try:
        plain = local_fit(d.X, d.y, w, zero, anchor=None)
        centered = local_fit(d.X, d.y, w, zero, anchor=i)
    except SingularDesignError as exc:
        plain = centered = None
        errors.append(str(exc))

    if beta_del is None or plain is None:
        both = beta_del is None and plain is None
        return EquivalenceReport(index=i, ok=both, singular=True, message="; ".join(errors))

    diff = float(np.abs(plain.eta - beta_del).max())
    slope_diff = float(np.abs(centered.B_hat - beta_del[1:]).max())
    fitted_at_i = beta_del[0] + d.X[i] @ beta_del[1:]
    icpt_diff = abs(centered.a_hat - fitted_at_i)
    scale = max(1.0, float(np.abs(beta_del).max()))
    ok = bool(max(diff, slope_diff, icpt_diff) <= tol * scale)
    return EquivalenceReport(index=i, ok=ok, max_abs_diff=diff, centered_slope_diff=slope_diff,
                             centered_intercept_diff=icpt_diff)
