"""Contaminated-data generators, detection and selection metrics, replicate harness."""
from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .classic import cooks_distance, ols
from .core import normalize_and_flag, run_acd
from .data import CorrelationSpec, Dataset, build_sigma, cholesky_sample, standardize
from .errors import ACDError, ACDWarning
from .penalized import LASSO, SCAD, PenaltySpec, fit_penalized

MOTIVATING_OUTLIERS = (15, 18, 37, 66, 82)  # rows 16, 19, 38, 67, 83 counted from 1
MODEL_II_VALUES = (-2.0, -1.0, 0.5, 1.5, 3.0)


@dataclass(frozen=True)
class SimScenario:
    n: int = 100
    p: int = 10
    beta: tuple[float, ...] | None = None  # None: five random actives (Model II)
    intercept: float = 0.5
    corr: CorrelationSpec = field(default_factory=CorrelationSpec)
    p_out: float = 0.05
    outlier_shift: float = 5.0
    clean_noise_sd: float = 0.8
    link: str = "linear"  # linear | squared
    t_df: float = 10.0
    chi2_df: float = 5.0
    center_chi2: bool = False
    outlier_rows: tuple[int, ...] | None = None  # fixed positions; random when None

    def __post_init__(self):
        if not 0 <= self.p_out < 0.5:
            raise ACDError(f"contamination fraction must lie in [0, 0.5), got {self.p_out}")
        if self.link not in ("linear", "squared"):
            raise ACDError(f"unknown link {self.link!r}")
        if self.beta is not None and len(self.beta) != self.p:
            raise ACDError(f"beta has {len(self.beta)} entries for p={self.p}")
        if self.outlier_rows is not None and len(self.outlier_rows) != self.n_out:
            raise ACDError(f"{len(self.outlier_rows)} fixed outlier rows, expected {self.n_out}")

    @property
    def n_out(self) -> int:
        return int(round(self.n * self.p_out))


def model_one(structure: str = "ar1", rho: float = 0.5, **kw) -> SimScenario:
    """n=100, p=10, beta=(3, 1.5, 0, 0, 2, 0, ...), 5% contamination."""
    beta = np.zeros(10)
    beta[[0, 1, 4]] = (3.0, 1.5, 2.0)
    kw.setdefault("p_out", 0.05)
    return SimScenario(n=100, p=10, beta=tuple(beta), corr=CorrelationSpec(structure, rho), **kw)


def model_two(structure: str = "ar1", rho: float = 0.7, **kw) -> SimScenario:
    """n=100, p=200, 10% contamination, five randomly placed active coefficients."""
    kw.setdefault("p_out", 0.10)
    return SimScenario(n=100, p=200, beta=None, corr=CorrelationSpec(structure, rho), **kw)


def motivating(structure: str = "identity", rho: float = 0.5, link: str = "linear") -> SimScenario:
    """Model I layout with the five contaminated rows at fixed positions."""
    return model_one(structure, rho, link=link, outlier_rows=MOTIVATING_OUTLIERS)


@dataclass(frozen=True)
class LabeledSample:
    data: Dataset
    outliers: frozenset[int]
    beta: np.ndarray


def draw_beta(s: SimScenario, rng: np.random.Generator) -> np.ndarray:
    if s.beta is not None:
        return np.asarray(s.beta, dtype=float)
    beta = np.zeros(s.p)
    k = min(len(MODEL_II_VALUES), s.p)
    pos = rng.choice(s.p, size=k, replace=False)
    beta[pos] = rng.permutation(np.asarray(MODEL_II_VALUES))[:k]
    return beta


def gen_model(s: SimScenario, rng: np.random.Generator) -> LabeledSample:
    """Clean rows N_p(0, S); contaminated rows multivariate t(df) centred at
    ``outlier_shift`` with chi-square response noise."""
    beta = draw_beta(s, rng)
    sigma = build_sigma(s.corr, s.p)
    L = np.linalg.cholesky(sigma)
    n_out = s.n_out
    if s.outlier_rows is not None:
        out = np.asarray(s.outlier_rows, dtype=int)
    else:
        out = np.sort(rng.choice(s.n, size=n_out, replace=False)) if n_out else np.empty(0, int)
    clean = np.setdiff1d(np.arange(s.n), out)

    X = np.empty((s.n, s.p))
    X[clean] = cholesky_sample(sigma, 0.0, len(clean), rng)
    noise = np.empty(s.n)
    noise[clean] = s.clean_noise_sd * rng.standard_normal(len(clean))
    if n_out:
        z = rng.standard_normal((n_out, s.p)) @ L.T
        u = rng.chisquare(s.t_df, size=(n_out, 1)) / s.t_df
        X[out] = s.outlier_shift + z / np.sqrt(u)
        e2 = rng.chisquare(s.chi2_df, size=n_out)
        noise[out] = e2 - s.chi2_df if s.center_chi2 else e2

    index = s.intercept + X @ beta
    mean = index if s.link == "linear" else index**2
    data = Dataset(X, mean + noise)
    return LabeledSample(data=data, outliers=frozenset(int(i) for i in out), beta=beta)


def tpr(flagged: Iterable[int], truth: Iterable[int]) -> float:
    truth = set(truth)
    if not truth:
        raise ACDError("true outlier set is empty; TPR undefined")
    return len(set(flagged) & truth) / len(truth)


def selection_fpr(selected: Iterable[int], beta_true) -> float:
    beta_true = np.asarray(beta_true)
    nulls = set(np.flatnonzero(beta_true == 0).tolist())
    if not nulls:
        raise ACDError("no null coefficients; FPR undefined")
    return len(set(selected) & nulls) / len(nulls)


# Detectors map (Dataset, rng) -> flagged row indices.
Detector = Callable[[Dataset, np.random.Generator], Iterable[int]]


def acd_detector(pen: PenaltySpec = LASSO, cutoff: float | None = None) -> Detector:
    def detect(d: Dataset, rng: np.random.Generator):
        seed = int(rng.integers(2**63 - 1))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ACDWarning)
            return run_acd(d, pen, cutoff=cutoff, seed=seed).flagged
    return detect


def cooks_detector(cutoff: float | None = None, convention: str = "p") -> Detector:
    """Classical Cook's distance, normalized and flagged like ACD."""
    def detect(d: Dataset, rng: np.random.Generator):
        fit = ols(d)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ACDWarning)
            return normalize_and_flag(cooks_distance(fit, d, convention), cutoff).flagged
    return detect


def null_detector(d: Dataset, rng: np.random.Generator):
    return ()


def oracle_detector(truth: Iterable[int]) -> Detector:
    truth = tuple(sorted(truth))
    return lambda d, rng: truth


DETECTORS: dict[str, Callable[[], Detector]] = {
    "ALL": lambda: null_detector,
    "CKD": cooks_detector,
    "ACD-LASSO": lambda: acd_detector(LASSO),
    "ACD-SCAD": lambda: acd_detector(SCAD),
}


def scad_select(d: Dataset, rng: np.random.Generator, pen: PenaltySpec = SCAD) -> tuple[int, ...]:
    """Global SCAD fit with cross-validated lambda on standardized data; the active set."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ACDWarning)
        sd = standardize(d)
    _, B, _ = fit_penalized(sd.Z, sd.y_c, np.ones(d.n), pen, rng=rng)
    return tuple(int(k) for k in np.flatnonzero(B))


def trim(d: Dataset, flagged: Iterable[int]) -> Dataset:
    flagged = set(int(i) for i in flagged)
    if len(flagged) > d.n / 2:
        raise ACDError(f"detector flagged {len(flagged)} of {d.n} rows; refusing to trim",
                       stage="trim_and_select")
    keep = np.array([i for i in range(d.n) if i not in flagged], dtype=int)
    return d.subset(keep)


def trim_and_select(sample, detector: Detector, rng: np.random.Generator,
                    pen: PenaltySpec = SCAD) -> tuple[int, ...]:
    """Drop detector-flagged rows, then select variables with SCAD."""
    d = sample.data if isinstance(sample, LabeledSample) else sample
    det_rng, sel_rng = rng.spawn(2)
    flagged = detector(d, det_rng)
    return scad_select(trim(d, flagged), sel_rng, pen)


@dataclass(frozen=True)
class StabilityResult:
    names: tuple[str, ...]
    proportions: np.ndarray
    reps: int

    @property
    def stable(self) -> np.ndarray:
        """Variables selected in at least half the replicates."""
        return self.proportions >= 0.5


def stability_selection(d: Dataset, detector: Detector | None, reps: int = 100,
                        frac: float = 0.95, rng: np.random.Generator | None = None,
                        pen: PenaltySpec = SCAD) -> StabilityResult:
    """Selection proportions over ``reps`` subsamples drawn without replacement.

    Within each subsample the detector's flagged rows are trimmed first
    (``detector=None`` keeps every row).
    """
    if reps < 1:
        raise ACDError("reps must be >= 1")
    rng = np.random.default_rng(0) if rng is None else rng
    m = int(np.floor(frac * d.n))
    if m < 10:
        raise ACDError(f"subsample of {m} rows is too small (need >= 10)")
    counts = np.zeros(d.p)
    for child in rng.spawn(reps):
        rows = np.sort(child.choice(d.n, size=m, replace=False))
        sub = d.subset(rows)
        det = null_detector if detector is None else detector
        sel = trim_and_select(sub, det, child, pen)
        counts[list(sel)] += 1
    return StabilityResult(names=d.names, proportions=counts / reps, reps=reps)


@dataclass(frozen=True)
class MetricRow:
    replicate: int
    method: str
    metric: str
    value: float


def _one_replicate(args) -> list[MetricRow]:
    r, scenario, methods, metrics, stream = args
    data_seq, select_seq, *method_seqs = stream.spawn(2 + len(methods))
    sample = gen_model(scenario, np.random.default_rng(data_seq))
    rows = []
    for name, seq in zip(methods, method_seqs):
        flagged = DETECTORS[name]()(sample.data, np.random.default_rng(seq))
        if "tpr" in metrics and name != "ALL":
            rows.append(MetricRow(r, name, "tpr", tpr(flagged, sample.outliers)))
        if "fpr" in metrics:
            # every method refits with the same CV stream (common random numbers)
            sel = scad_select(trim(sample.data, flagged), np.random.default_rng(select_seq))
            rows.append(MetricRow(r, name, "fpr", selection_fpr(sel, sample.beta)))
    return rows


def run_study(scenario: SimScenario, methods: Iterable[str], reps: int, seed: int = 0,
              metrics: Iterable[str] = ("tpr",), workers: int = 1) -> list[MetricRow]:
    """Replicate-level metrics. Replicate ``r`` draws from its own spawned
    stream, so results do not depend on ``workers``."""
    methods = tuple(methods)
    unknown = [m for m in methods if m not in DETECTORS]
    if unknown:
        raise ACDError(f"unknown method(s): {', '.join(unknown)}")
    metrics = tuple(metrics)
    streams = np.random.SeedSequence(seed).spawn(reps)
    jobs = [(r, scenario, methods, metrics, streams[r]) for r in range(reps)]
    if workers > 1 and reps > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one_replicate, jobs))
    else:
        results = [_one_replicate(j) for j in jobs]
    return [row for rows in results for row in rows]


def summarize(rows: Iterable[MetricRow]) -> dict[tuple[str, str], dict[str, float]]:
    """Five-number summary and mean per (method, metric)."""
    groups: dict[tuple[str, str], list[float]] = {}
    for row in rows:
        groups.setdefault((row.method, row.metric), []).append(row.value)
    out = {}
    for key, vals in groups.items():
        v = np.asarray(vals)
        q = np.quantile(v, [0, 0.25, 0.5, 0.75, 1])
        out[key] = dict(min=q[0], q1=q[1], median=q[2], q3=q[3], max=q[4], mean=v.mean(), n=len(v))
    return out


__all__ = [
    "SimScenario", "LabeledSample", "model_one", "model_two", "motivating", "gen_model",
    "tpr", "selection_fpr", "acd_detector", "cooks_detector", "null_detector",
    "oracle_detector", "scad_select", "trim", "trim_and_select", "stability_selection",
    "StabilityResult", "run_study", "summarize", "MetricRow",
]
