"""Kernel weights around an anchor observation and the global bandwidth."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .errors import ACDError


@dataclass(frozen=True)
class WeightVector:
    anchor_index: int
    w: np.ndarray


def estimate_tau(Z: np.ndarray) -> float:
    """Mean Euclidean distance over all n(n-1)/2 pairs of rows."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    if Z.shape[0] < 2:
        raise ACDError("bandwidth needs at least two rows", stage="estimate_tau")
    tau = float(pdist(Z).mean())
    if not tau > 0:
        raise ACDError("all rows identical: bandwidth is zero and kernel weights are undefined",
                       stage="estimate_tau")
    return tau


def kernel_from_distances(dist: np.ndarray, tau: float) -> np.ndarray:
    """Normalized ``exp(-dist / tau**2)`` along the last axis.

    Distances enter unsquared. The exponent is shifted by its maximum so the
    normalizer never underflows.
    """
    if not tau > 0:
        raise ACDError(f"bandwidth must be positive, got {tau}", stage="weights")
    logits = -np.asarray(dist, dtype=float) / tau**2
    logits = logits - logits.max(axis=-1, keepdims=True)
    w = np.exp(logits)
    return w / w.sum(axis=-1, keepdims=True)


def weights_at(Z: np.ndarray, i: int, tau: float) -> WeightVector:
    Z = np.asarray(Z, dtype=float)
    if Z.ndim == 1:
        Z = Z[:, None]
    dist = cdist(Z[i : i + 1], Z)[0]
    return WeightVector(anchor_index=int(i), w=kernel_from_distances(dist, tau))


def weight_matrix(Z: np.ndarray, tau: float) -> np.ndarray:
    """Row ``i`` holds the weight vector anchored at observation ``i``."""
    Z = np.asarray(Z, dtype=float)
    return kernel_from_distances(cdist(Z, Z), tau)
