import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from acd.core import (SvdSummary, adaptive_distances, fit_all_local, leading_direction,
                      normalize_and_flag, resolve_threads, run_acd)
from acd.data import Dataset, standardize
from acd.errors import ACDError, ACDWarning
from acd.kernel import estimate_tau
from acd.penalized import LASSO, SCAD, PenaltySpec
from acd.sim import gen_model, motivating


def small_data(seed=0, n=40, p=4):
    r = np.random.default_rng(seed)
    X = r.standard_normal((n, p))
    y = X @ np.r_[2.0, -1.0, np.zeros(p - 2)] + 0.3 * r.standard_normal(n)
    return Dataset(X, y)


def test_leading_direction_matches_numpy(rng):
    Lam = rng.standard_normal((30, 5)) + [3, 1, 0, 0, 0]
    s = leading_direction(Lam)
    _, sv, Vt = np.linalg.svd(Lam)
    assert s.d1 == pytest.approx(sv[0])
    assert abs(abs(s.v1 @ Vt[0]) - 1) < 1e-12
    assert s.rank == 5
    assert (Lam @ s.v1).sum() >= 0


def test_leading_direction_wide_matches_tall(rng):
    Lam = rng.standard_normal((6, 40))
    Lam[:, 0] += 5
    s = leading_direction(Lam)
    _, sv, Vt = np.linalg.svd(Lam, full_matrices=False)
    assert s.d1 == pytest.approx(sv[0], rel=1e-10)
    assert abs(abs(s.v1 @ Vt[0]) - 1) < 1e-10


def test_leading_direction_sign_invariant(rng):
    Lam = rng.standard_normal((20, 4)) + 1
    np.testing.assert_allclose(leading_direction(Lam).v1, leading_direction(-Lam).v1 * -1,
                               atol=1e-12)


def test_leading_direction_zero_raises():
    with pytest.raises(ACDError):
        leading_direction(np.zeros((5, 3)))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(3, 30), st.integers(1, 6))
def test_distances_sign_flip_invariant(seed, n, p):
    r = np.random.default_rng(seed)
    Lam = r.standard_normal((n, p + 1)) + r.standard_normal(p + 1)
    design = np.column_stack([np.ones(n), r.standard_normal((n, p))])
    s = leading_direction(Lam)
    flipped = SvdSummary(-s.v1, s.d1, s.rank, s.singular_values)
    D1 = adaptive_distances(Lam, s, design)
    np.testing.assert_allclose(adaptive_distances(Lam, flipped, design), D1, rtol=0, atol=1e-12)
    D2 = adaptive_distances(-Lam, leading_direction(-Lam), design)
    np.testing.assert_allclose(D2, D1, rtol=1e-10, atol=1e-12)
    assert np.all(D1 >= 0)


def test_distances_gram_and_product_agree(rng):
    Lam = rng.standard_normal((15, 4))
    design = np.column_stack([np.ones(15), rng.standard_normal((15, 3))])
    s = leading_direction(Lam)
    np.testing.assert_allclose(adaptive_distances(Lam, s, design, method="gram"),
                               adaptive_distances(Lam, s, design, method="product"), rtol=1e-10)


def test_distances_explicit_formula(rng):
    Lam = rng.standard_normal((10, 3)) + [1, 2, 0]
    design = np.column_stack([np.ones(10), rng.standard_normal((10, 2))])
    s = leading_direction(Lam)
    ref = [np.sum((design @ (s.v1 - Lam[i])) ** 2) / (2 * s.d1**2) for i in range(10)]
    np.testing.assert_allclose(adaptive_distances(Lam, s, design), ref, rtol=1e-12)


def test_distances_shape_mismatch(rng):
    Lam = rng.standard_normal((10, 3))
    with pytest.raises(ACDError):
        adaptive_distances(Lam, leading_direction(Lam), np.ones((10, 4)))


def test_normalize_and_flag_rule():
    D = np.array([1.0, 1.1, 0.9, 1.0, 1.05, 0.95, 1.0, 1.02, 0.98, 9.0])
    rep = normalize_and_flag(D)
    assert rep.D_norm.min() == 0 and rep.D_norm.max() == 1
    assert rep.threshold == pytest.approx(rep.D_norm.mean() + 2 * rep.D_norm.std(ddof=1))
    assert rep.flagged == (9,)
    assert rep.rule == "mean+2sd"


def test_normalize_fixed_cutoff_strict():
    rep = normalize_and_flag(np.array([0.0, 0.5, 1.0]), cutoff=0.5)
    assert rep.threshold == 0.5 and rep.flagged == (2,)
    assert rep.rule == "fixed:0.5"


def test_normalize_flat_distances_warn():
    with pytest.warns(ACDWarning):
        rep = normalize_and_flag(np.full(5, 2.0))
    assert rep.flagged == () and np.all(rep.D_norm == 0)


@pytest.mark.parametrize("D", [np.array([1.0]), np.array([1.0, np.nan])])
def test_normalize_bad_input(D):
    with pytest.raises(ACDError):
        normalize_and_flag(D)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=2, max_size=50))
def test_normalized_in_unit_interval(vals):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ACDWarning)
        rep = normalize_and_flag(np.array(vals))
    assert np.all((rep.D_norm >= 0) & (rep.D_norm <= 1))
    assert all(rep.D_norm[i] > rep.threshold for i in rep.flagged)


def test_fit_all_local_threads_agree():
    sd = standardize(small_data())
    tau = estimate_tau(sd.Z)
    g1 = fit_all_local(sd.Z, sd.y_c, tau, LASSO, seed=3, threads=1)
    g3 = fit_all_local(sd.Z, sd.y_c, tau, LASSO, seed=3, threads=3)
    np.testing.assert_array_equal(g1.Lam, g3.Lam)
    np.testing.assert_array_equal(g1.lambdas, g3.lambdas)


def test_resolve_threads_env(monkeypatch):
    monkeypatch.setenv("ACD_THREADS", "2")
    assert resolve_threads(8) == 2
    monkeypatch.delenv("ACD_THREADS")
    assert resolve_threads(3) == 3 and resolve_threads(None) >= 1


@pytest.mark.parametrize("pen", [LASSO, SCAD])
def test_run_acd_finds_motivating_outliers(pen):
    s = gen_model(motivating(), np.random.default_rng(5))
    rep = run_acd(s.data, pen, seed=5)
    assert set(rep.flagged) == set(s.outliers)
    assert rep.v1.shape == (11,) and rep.gradients.shape == (100, 11)
    assert np.all((rep.D_norm >= 0) & (rep.D_norm <= 1))


def test_run_acd_deterministic():
    d = small_data(2)
    a, b = run_acd(d, seed=4), run_acd(d, seed=4)
    np.testing.assert_array_equal(a.D_raw, b.D_raw)


def test_run_acd_raw_design_and_fixed_lambda():
    d = small_data(3)
    rep = run_acd(d, PenaltySpec("lasso", lam=0.05), design="raw")
    assert np.all(rep.lambdas == 0.05)
    with pytest.raises(ACDError):
        run_acd(d, design="other")


def test_run_acd_constant_column_warns():
    d = small_data(4)
    X = d.X.copy()
    X[:, 1] = 3.0
    with pytest.warns(ACDWarning):
        rep = run_acd(Dataset(X, d.y))
    assert np.all(np.isfinite(rep.D_raw))


def test_run_acd_identical_rows_error():
    d = Dataset(np.ones((10, 2)), np.arange(10.0))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ACDWarning)
        with pytest.raises(ACDError) as exc:
            run_acd(d)
    assert exc.value.stage == "estimate_tau"


def test_run_acd_constant_response_error():
    d = small_data(5)
    with pytest.raises(ACDError) as exc:
        run_acd(Dataset(d.X, np.ones(d.n)))
    assert exc.value.stage == "leading_direction"
