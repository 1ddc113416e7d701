"""Adaptive Cook's distance: local gradients, leading direction, distances, flags."""
from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, standardize
from .errors import ACDError, ACDWarning
from .kernel import estimate_tau, weight_matrix
from .penalized import LASSO, PenaltySpec, local_fit, make_folds

# beyond this many design columns the quadratic form skips the Gram matrix
GRAM_MAX_COLS = 2000


@dataclass(frozen=True)
class GradientMatrix:
    """Row ``i`` is ``(a_i, B_i)`` from the local fit anchored at observation ``i``."""

    Lam: np.ndarray
    lambdas: np.ndarray

    def __post_init__(self):
        if self.Lam.ndim != 2 or not np.all(np.isfinite(self.Lam)):
            raise ACDError("gradient matrix must be a finite 2-D array", stage="fit_all_local")

    @property
    def slopes(self) -> np.ndarray:
        return self.Lam[:, 1:]


@dataclass(frozen=True)
class SvdSummary:
    v1: np.ndarray
    d1: float
    rank: int
    singular_values: np.ndarray

    @property
    def slope_direction(self) -> np.ndarray:
        """Slope part of ``v1`` (entries after the intercept)."""
        return self.v1[1:]


@dataclass(frozen=True)
class InfluenceReport:
    D_raw: np.ndarray
    D_norm: np.ndarray
    threshold: float
    flagged: tuple[int, ...]
    rule: str
    # audit trail from run_acd; None when built by normalize_and_flag alone
    v1: np.ndarray | None = None
    d1: float | None = None
    tau: float | None = None
    lambdas: np.ndarray | None = None
    gradients: np.ndarray | None = None
    names: tuple[str, ...] = field(default=())

    @property
    def n(self) -> int:
        return len(self.D_raw)


def resolve_threads(threads: int | None) -> int:
    env = os.environ.get("ACD_THREADS")
    if env:
        return max(1, int(env))
    if threads is None:
        return os.cpu_count() or 1
    return max(1, int(threads))


def fit_all_local(Z, y_c, tau: float, pen: PenaltySpec = LASSO, folds=None, seed: int = 0,
                  threads: int | None = 1) -> GradientMatrix:
    """Local fits at every anchor.

    One CV fold assignment (drawn from ``seed`` unless ``folds`` is given) is
    shared by all anchors.
    """
    Z = np.asarray(Z, dtype=float)
    y_c = np.asarray(y_c, dtype=float)
    n, p = Z.shape
    W = weight_matrix(Z, tau)
    if pen.lam is None and folds is None:
        folds = make_folds(n, pen.cv_folds, np.random.default_rng(seed))

    Lam = np.empty((n, p + 1))
    lambdas = np.empty(n)

    def work(rows):
        for i in rows:
            try:
                fit = local_fit(Z, y_c, W[i], pen, anchor=i, folds=folds)
            except ACDError as exc:
                raise ACDError(f"anchor {i}: {exc}", stage="fit_all_local") from exc
            Lam[i, 0] = fit.a_hat
            Lam[i, 1:] = fit.B_hat
            lambdas[i] = fit.lam_used

    threads = min(resolve_threads(threads), n)
    if threads == 1:
        work(range(n))
    else:
        blocks = np.array_split(np.arange(n), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for f in [pool.submit(work, b) for b in blocks]:
                f.result()
    return GradientMatrix(Lam=Lam, lambdas=lambdas)


def _orient(Lam: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Fix the sign of ``v`` from the data: the mean local estimate projects
    nonnegatively on it. Falls back to largest-|entry| positive on a tie."""
    s = float((Lam @ v).sum())
    scale = float(np.abs(Lam).sum()) * np.finfo(float).eps * 16
    if abs(s) <= scale:
        k = int(np.argmax(np.abs(v)))
        return v if v[k] >= 0 else -v
    return v if s > 0 else -v


def leading_direction(Lam) -> SvdSummary:
    """Leading right singular vector and value of the gradient matrix."""
    if isinstance(Lam, GradientMatrix):
        Lam = Lam.Lam
    Lam = np.asarray(Lam, dtype=float)
    n, k = Lam.shape
    if not np.any(Lam):
        raise ACDError("gradient matrix is identically zero; no leading direction",
                       stage="leading_direction")
    if k > n:
        evals, U = np.linalg.eigh(Lam @ Lam.T)
        evals = np.clip(evals[::-1], 0.0, None)
        s = np.sqrt(evals)
        v1 = Lam.T @ U[:, -1] / s[0]
        v1 /= np.linalg.norm(v1)
    else:
        _, s, Vt = np.linalg.svd(Lam, full_matrices=False)
        v1 = Vt[0]
    tol = s[0] * max(n, k) * np.finfo(float).eps
    return SvdSummary(v1=_orient(Lam, v1), d1=float(s[0]), rank=int((s > tol).sum()),
                      singular_values=s)


def adaptive_distances(Lam, svd: SvdSummary, design: np.ndarray, dim: int | None = None,
                       method: str = "auto") -> np.ndarray:
    """D_i = (v1 - eta_i)' D'D (v1 - eta_i) / (dim * d1^2), ``D`` the design.

    ``v1`` is re-oriented from the data, so flipping its sign beforehand has
    no effect. ``dim`` defaults to the number of slope columns.
    """
    if isinstance(Lam, GradientMatrix):
        Lam = Lam.Lam
    Lam = np.asarray(Lam, dtype=float)
    design = np.asarray(design, dtype=float)
    if not svd.d1 > 0:
        raise ACDError("leading singular value is zero", stage="adaptive_distances")
    if design.shape[1] != Lam.shape[1]:
        raise ACDError(f"design has {design.shape[1]} columns, gradients have {Lam.shape[1]}",
                       stage="adaptive_distances")
    dim = Lam.shape[1] - 1 if dim is None else dim
    delta = _orient(Lam, svd.v1) - Lam
    if method == "auto":
        method = "gram" if design.shape[1] <= GRAM_MAX_COLS else "product"
    if method == "gram":
        G = design.T @ design
        quad = np.einsum("ij,jk,ik->i", delta, G, delta)
    elif method == "product":
        P = delta @ design.T
        quad = np.einsum("ij,ij->i", P, P)
    else:
        raise ACDError(f"unknown method {method!r}")
    return np.maximum(quad, 0.0) / (dim * svd.d1**2)


def cutoff_label(cutoff: float | None) -> str:
    return "mean+2sd" if cutoff is None else f"fixed:{cutoff:g}"


def normalize_and_flag(D, cutoff: float | None = None) -> InfluenceReport:
    """Min-max normalize and flag strictly above the threshold.

    ``cutoff=None`` uses mean + 2 SD (sample SD) of the normalized distances;
    a number is used as a fixed threshold.
    """
    D = np.asarray(D, dtype=float)
    if D.ndim != 1 or len(D) < 2:
        raise ACDError("need at least two distances", stage="normalize_and_flag")
    if not np.all(np.isfinite(D)):
        raise ACDError("non-finite distances", stage="normalize_and_flag")
    lo, hi = D.min(), D.max()
    if hi > lo:
        Dn = (D - lo) / (hi - lo)
    else:
        warnings.warn("all distances equal; nothing flagged", ACDWarning, stacklevel=2)
        Dn = np.zeros_like(D)
    if cutoff is None:
        threshold = float(Dn.mean() + 2 * Dn.std(ddof=1))
    else:
        threshold = float(cutoff)
    flagged = tuple(int(i) for i in np.flatnonzero(Dn > threshold)) if hi > lo else ()
    return InfluenceReport(D_raw=D, D_norm=Dn, threshold=threshold, flagged=flagged,
                           rule=cutoff_label(cutoff))


def run_acd(d: Dataset, pen: PenaltySpec = LASSO, cutoff: float | None = None, seed: int = 0,
            threads: int | None = 1, design: str = "standardized", folds=None,
            dim: int | None = None) -> InfluenceReport:
    """Standardize, fit local gradients, take the leading direction, score and flag.

    ``design`` selects the matrix in the quadratic form: ``"standardized"``
    uses ``[1 | Z]``, ``"raw"`` uses ``[1 | X]``.
    """
    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except ACDError as exc:
            if exc.stage:
                raise
            raise ACDError(str(exc), stage=name) from exc
        except np.linalg.LinAlgError as exc:
            raise ACDError(str(exc), stage=name) from exc

    sd = stage("standardize", standardize, d)
    tau = stage("estimate_tau", estimate_tau, sd.Z)
    grad = stage("fit_all_local", fit_all_local, sd.Z, sd.y_c, tau, pen, folds=folds,
                 seed=seed, threads=threads)
    svd = stage("leading_direction", leading_direction, grad.Lam)
    if design == "standardized":
        M = sd.design()
    elif design == "raw":
        M = np.column_stack([np.ones(d.n), d.X])
    else:
        raise ACDError(f"unknown design {design!r}", stage="adaptive_distances")
    D = stage("adaptive_distances", adaptive_distances, grad.Lam, svd, M, dim)
    rep = stage("normalize_and_flag", normalize_and_flag, D, cutoff)
    return InfluenceReport(
        D_raw=rep.D_raw, D_norm=rep.D_norm, threshold=rep.threshold, flagged=rep.flagged,
        rule=rep.rule, v1=svd.v1, d1=svd.d1, tau=tau, lambdas=grad.lambdas,
        gradients=grad.Lam, names=d.names,
    )
