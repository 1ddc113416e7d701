"""Numeric containers, marginal standardization and correlation builders."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ACDError, ACDWarning


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Raw design matrix ``X`` (n x p) and response ``y`` (n)."""

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        if X.ndim != 2 or y.ndim != 1:
            raise ACDError("X must be 2-D and y 1-D")
        n, p = X.shape
        if len(y) != n:
            raise ACDError(f"length(y)={len(y)} does not match rows(X)={n}")
        if n < 2 or p < 1:
            raise ACDError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise ACDError("non-finite entries in X or y")
        names = tuple(self.names) if self.names else tuple(f"x{k + 1}" for k in range(p))
        if len(names) != p:
            raise ACDError(f"{len(names)} column names for {p} columns")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y))
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(self.X[rows], self.y[rows], self.names)


@dataclass(frozen=True)
class StandardizedData:
    Z: np.ndarray
    y_c: np.ndarray
    col_means: np.ndarray
    col_scales: np.ndarray
    y_mean: float
    constant_cols: tuple[int, ...] = ()

    def unstandardize(self, Z: np.ndarray | None = None) -> np.ndarray:
        """Map standardized rows back to the raw scale."""
        Z = self.Z if Z is None else np.asarray(Z, dtype=float)
        return Z * self.col_scales + self.col_means

    def design(self) -> np.ndarray:
        """``[1 | Z]``, the standardized design with an intercept column."""
        return np.column_stack([np.ones(self.Z.shape[0]), self.Z])


def standardize(d: Dataset) -> StandardizedData:
    """Scale columns of ``X`` to mean 0, sample SD 1 (ddof=1) and center ``y``.

    Zero-variance columns are kept with scale 1 (so they become all zeros)
    and an :class:`ACDWarning` is emitted.
    """
    X, y = d.X, d.y
    means = X.mean(axis=0)
    scales = X.std(axis=0, ddof=1)
    constant = np.flatnonzero(np.all(X == X[0], axis=0) | (scales == 0))
    if len(constant):
        labels = ", ".join(d.names[k] for k in constant)
        warnings.warn(f"constant column(s) kept with scale 1: {labels}", ACDWarning, stacklevel=2)
        scales[constant] = 1.0
        means[constant] = X[0, constant]
    Z = (X - means) / scales
    y_mean = float(y.mean())
    return StandardizedData(
        Z=_frozen(Z),
        y_c=_frozen(y - y_mean),
        col_means=_frozen(means),
        col_scales=_frozen(scales),
        y_mean=y_mean,
        constant_cols=tuple(int(k) for k in constant),
    )


@dataclass(frozen=True)
class CorrelationSpec:
    kind: str = "identity"  # identity | ar1 | exchangeable
    rho: float = 0.0

    def __post_init__(self):
        kind = self.kind.lower().replace("-", "").replace("_", "")
        aliases = {"identity": "identity", "independent": "identity", "ar1": "ar1",
                   "exchangeable": "exchangeable", "exch": "exchangeable", "cs": "exchangeable"}
        if kind not in aliases:
            raise ACDError(f"unknown correlation structure {self.kind!r}")
        object.__setattr__(self, "kind", aliases[kind])
        if not -1.0 < self.rho < 1.0:
            raise ACDError(f"rho must lie in (-1, 1), got {self.rho}")


def build_sigma(spec: CorrelationSpec, p: int) -> np.ndarray:
    """Correlation matrix for the given structure, symmetric by construction."""
    if p < 1:
        raise ACDError("p must be >= 1")
    if spec.kind == "identity":
        return np.eye(p)
    if spec.kind == "ar1":
        lag = np.abs(np.subtract.outer(np.arange(p), np.arange(p)))
        return np.power(spec.rho, lag.astype(float))
    if p > 1 and spec.rho <= -1.0 / (p - 1):
        raise ACDError(f"exchangeable rho={spec.rho} is not positive definite for p={p}")
    S = np.full((p, p), float(spec.rho))
    np.fill_diagonal(S, 1.0)
    return S


def cholesky_sample(sigma: np.ndarray, mean, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` iid rows from N_p(mean, sigma)."""
    sigma = np.asarray(sigma, dtype=float)
    p = sigma.shape[0]
    try:
        L = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise ACDError(f"covariance is not positive definite: {exc}") from exc
    mean = np.broadcast_to(np.asarray(mean, dtype=float), (p,))
    if n == 0:
        return np.empty((0, p))
    return mean + rng.standard_normal((n, p)) @ L.T


def spawn_streams(seed: int | np.random.SeedSequence, k: int) -> list[np.random.Generator]:
    """Independent generators, one per replicate or worker."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.default_rng(s) for s in ss.spawn(k)]


def as_dataset(X, y, names: Sequence[str] | None = None) -> Dataset:
    return Dataset(np.asarray(X, dtype=float), np.asarray(y, dtype=float), tuple(names or ()))
