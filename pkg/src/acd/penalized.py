"""Penalized, observation-weighted local least squares (LASSO / SCAD).

The local problem at anchor ``i`` is

    minimize_{a, B}  1/(2m) * || y~ - a * c - X~ B ||^2 + P_lambda(B)

with ``c = sqrt(w)``, ``y~ = sqrt(w) * y_c`` and ``X~ = sqrt(w) * (Z - z_i)``.
The intercept is unpenalized; it is profiled out by projecting ``c`` off the
response and the design before the coordinate-descent kernels run.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import ACDError, ACDWarning, SingularDesignError

PENALTY_CODES = {"lasso": 0, "scad": 1}
# above this many columns the kernels update residuals instead of a Gram matrix
GRAM_MAX_P = 1000


@dataclass(frozen=True)
class PenaltySpec:
    """Penalty family and tuning.

    ``lam=None`` selects lambda by K-fold cross-validation over a grid of
    ``n_lambda`` log-spaced values below ``lambda_max``.
    """

    family: str = "lasso"
    lam: float | None = None
    gamma: float = 3.7
    cv_folds: int = 5
    n_lambda: int = 50
    tol: float = 1e-7
    max_sweeps: int = 10_000

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in PENALTY_CODES:
            raise ACDError(f"unknown penalty family {self.family!r}")
        object.__setattr__(self, "family", fam)
        if fam == "scad" and not self.gamma > 2:
            raise ACDError(f"SCAD needs gamma > 2, got {self.gamma}")
        if self.lam is not None and self.lam < 0:
            raise ACDError("lambda must be nonnegative")
        if self.cv_folds < 2 or self.n_lambda < 1:
            raise ACDError("need cv_folds >= 2 and n_lambda >= 1")

    @property
    def code(self) -> int:
        return PENALTY_CODES[self.family]


LASSO = PenaltySpec("lasso")
SCAD = PenaltySpec("scad")


@dataclass(frozen=True)
class LocalFit:
    anchor_index: int | None
    a_hat: float
    B_hat: np.ndarray
    lam_used: float

    @property
    def eta(self) -> np.ndarray:
        return np.concatenate([[self.a_hat], self.B_hat])

    @property
    def active_set(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.B_hat))


def soft_threshold(z: float, lam: float) -> float:
    if lam < 0:
        raise ACDError("lambda must be nonnegative")
    return float(np.sign(z) * max(abs(z) - lam, 0.0))


def scad_threshold(z: float, lam: float, gamma: float = 3.7) -> float:
    """Minimizer of ``0.5 * (b - z)**2 + P_scad(b)`` (unit-variance coordinate)."""
    if not gamma > 2:
        raise ACDError(f"SCAD needs gamma > 2, got {gamma}")
    if lam < 0:
        raise ACDError("lambda must be nonnegative")
    a = abs(z)
    if a <= 2 * lam:
        return soft_threshold(z, lam)
    if a <= gamma * lam:
        return float(((gamma - 1) * z - np.sign(z) * gamma * lam) / (gamma - 2))
    return float(z)


def scad_penalty(b, lam: float, gamma: float = 3.7):
    """Closed form of lam * int_0^|b| min(1, (gamma - t/lam)_+ / (gamma - 1)) dt."""
    t = np.abs(np.asarray(b, dtype=float))
    return np.where(
        t <= lam,
        lam * t,
        np.where(
            t <= gamma * lam,
            (2 * gamma * lam * t - t**2 - lam**2) / (2 * (gamma - 1)),
            lam**2 * (gamma + 1) / 2,
        ),
    )


def penalty_value(B, pen: PenaltySpec, lam: float) -> float:
    B = np.asarray(B, dtype=float)
    if pen.family == "lasso":
        return float(lam * np.abs(B).sum())
    return float(scad_penalty(B, lam, pen.gamma).sum())


def lambda_grid(lam_max: float, m: int, p: int, n_lambda: int = 50) -> np.ndarray:
    """Decreasing log-spaced grid from ``lam_max`` to 1% (5% when p >= m) of it."""
    if lam_max <= 0:
        return np.zeros(1)
    ratio = 0.05 if p >= m else 0.01
    if n_lambda == 1:
        return np.array([lam_max])
    return np.geomspace(lam_max, ratio * lam_max, n_lambda)


def make_folds(m: int, k: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Random fold labels ``0..k-1``; ``k`` shrinks so each fold holds >= 3 rows."""
    rng = np.random.default_rng(0) if rng is None else rng
    k_eff = min(k, m // 3)
    if k_eff < 2:
        raise ACDError(f"cross-validation needs at least 6 observations, got {m}", stage="cv")
    if k_eff < k:
        warnings.warn(f"reducing CV folds from {k} to {k_eff} for {m} observations",
                      ACDWarning, stacklevel=2)
    return rng.permutation(m) % k_eff


def _project(X, y, c):
    cc = float(c @ c)
    if not cc > 0:
        raise ACDError("zero total weight in the local problem", stage="local_fit")
    cx = c @ X / cc
    cy = float(c @ y) / cc
    return X - np.outer(c, cx), y - c * cy, cx, cy


def _path(Xp, yp, lambdas, pen: PenaltySpec) -> np.ndarray:
    m, p = Xp.shape
    if p <= GRAM_MAX_P:
        G = Xp.T @ Xp / m
        b = Xp.T @ yp / m
        return kernels.path_gram(G, b, lambdas, pen.code, pen.gamma, pen.tol, pen.max_sweeps)
    return kernels.path_resid(np.ascontiguousarray(Xp.T), yp, lambdas, pen.code, pen.gamma,
                              pen.tol, pen.max_sweeps)


def _unpenalized(Xp, yp):
    m, p = Xp.shape
    if p >= m:
        raise SingularDesignError(f"lambda=0 needs p < m, got p={p}, m={m}", stage="local_fit")
    B, _, rank, sv = np.linalg.lstsq(Xp, yp, rcond=None)
    if rank < p:
        raise SingularDesignError(
            f"weighted design has rank {rank} < {p} (smallest singular value {sv.min():.3g})",
            stage="local_fit")
    return B


def cv_errors(X, y, c, lambdas, pen: PenaltySpec, folds: np.ndarray) -> np.ndarray:
    """Pooled held-out mean squared error for every lambda on the grid."""
    m = len(y)
    err = np.zeros(len(lambdas))
    for k in np.unique(folds):
        te = folds == k
        tr = ~te
        Xp, yp, cx, cy = _project(X[tr], y[tr], c[tr])
        coefs = _path(Xp, yp, lambdas, pen)
        a = cy - coefs @ cx
        pred = np.outer(a, c[te]) + coefs @ X[te].T
        err += ((y[te] - pred) ** 2).sum(axis=1)
    return err / m


def _select(cv: np.ndarray) -> int:
    # grid is decreasing, so the first near-minimum is the largest lambda
    best = cv.min()
    return int(np.flatnonzero(cv <= best + 1e-12 * max(abs(best), 1e-300))[0])


def fit_penalized(X, y, c, pen: PenaltySpec, folds=None, rng=None):
    """Solve the penalized problem with unpenalized column ``c``.

    Returns ``(a, B, lam)``. With ``pen.lam`` unset, lambda is chosen by
    cross-validation using ``folds`` (labels per row) or folds drawn from ``rng``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    c = np.asarray(c, dtype=float)
    m, p = X.shape
    Xp, yp, cx, cy = _project(X, y, c)

    if pen.lam is not None:
        lam = float(pen.lam)
        if lam == 0.0:
            B = _unpenalized(Xp, yp)
        else:
            B = _path(Xp, yp, np.array([lam]), pen)[0]
        return cy - float(B @ cx), B, lam

    lam_max = float(np.abs(Xp.T @ yp).max()) / m
    if not lam_max > 0:
        return cy, np.zeros(p), 0.0
    grid = lambda_grid(lam_max, m, p, pen.n_lambda)
    if len(grid) == 1:
        idx = 0
    else:
        if folds is None:
            folds = make_folds(m, pen.cv_folds, rng)
        idx = _select(cv_errors(X, y, c, grid, pen, np.asarray(folds)))
    B = _path(Xp, yp, grid[: idx + 1], pen)[-1]
    return cy - float(B @ cx), B, float(grid[idx])


def cv_lambda(Zt, yt, pen: PenaltySpec, rng=None, c=None, folds=None,
              lambdas=None) -> float:
    """Cross-validated lambda for the transformed problem ``(Zt, yt)``.

    ``c`` is the unpenalized intercept column (ones when omitted). Ties in
    CV error go to the larger lambda.
    """
    Zt = np.asarray(Zt, dtype=float)
    yt = np.asarray(yt, dtype=float)
    m, p = Zt.shape
    c = np.ones(m) if c is None else np.asarray(c, dtype=float)
    if lambdas is None:
        Xp, yp, _, _ = _project(Zt, yt, c)
        lam_max = float(np.abs(Xp.T @ yp).max()) / m
        lambdas = lambda_grid(lam_max, m, p, pen.n_lambda)
    lambdas = np.asarray(lambdas, dtype=float)
    if len(lambdas) == 0:
        raise ACDError("empty lambda grid", stage="cv")
    if len(lambdas) == 1:
        return float(lambdas[0])
    if folds is None:
        folds = make_folds(m, pen.cv_folds, rng)
    return float(lambdas[_select(cv_errors(Zt, yt, c, lambdas, pen, np.asarray(folds)))])


def local_problem(Z, y_c, w, anchor: int | None):
    """The sqrt-weight transform: returns ``(X~, y~, c)``."""
    Z = np.asarray(Z, dtype=float)
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise ACDError("negative weights", stage="local_fit")
    sw = np.sqrt(w)
    D = Z if anchor is None else Z - Z[anchor]
    return sw[:, None] * D, sw * np.asarray(y_c, dtype=float), sw


def local_fit(Z, y_c, w, pen: PenaltySpec, anchor: int | None = None, folds=None,
              rng=None) -> LocalFit:
    """Sparse local linear fit ``(a_i, B_i)`` at ``anchor``.

    ``w`` may be a :class:`~acd.kernel.WeightVector` or a plain array; when the
    anchor is ``None`` the design is not centered (global weighted fit).
    """
    if hasattr(w, "w"):
        anchor = w.anchor_index if anchor is None else anchor
        w = w.w
    X, y, c = local_problem(Z, y_c, w, anchor)
    a, B, lam = fit_penalized(X, y, c, pen, folds=folds, rng=rng)
    return LocalFit(anchor_index=anchor, a_hat=float(a), B_hat=B, lam_used=lam)


def local_objective(Z, y_c, w, fit: LocalFit, pen: PenaltySpec, anchor=None) -> float:
    """Value of the local objective at ``fit`` (diagnostics and tests)."""
    X, y, c = local_problem(Z, y_c, w, anchor)
    r = y - fit.a_hat * c - X @ fit.B_hat
    return 0.5 * float(r @ r) / len(y) + penalty_value(fit.B_hat, pen, fit.lam_used)
