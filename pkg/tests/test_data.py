import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from acd.data import (CorrelationSpec, Dataset, as_dataset, build_sigma, cholesky_sample,
                      spawn_streams, standardize)
from acd.errors import ACDError, ACDWarning


def test_dataset_shape_and_names():
    d = Dataset(np.zeros((3, 2)) + [[1, 2]], np.arange(3.0))
    assert (d.n, d.p) == (3, 2)
    assert d.names == ("x1", "x2")
    with pytest.raises(ValueError):
        d.X[0, 0] = 5.0


@pytest.mark.parametrize("X, y", [
    (np.ones((3, 2)), np.ones(4)),
    (np.ones((1, 2)), np.ones(1)),
    (np.ones((3, 0)), np.ones(3)),
    (np.array([[1.0], [np.nan], [2.0]]), np.ones(3)),
    (np.ones((3, 1)), np.array([1.0, np.inf, 0.0])),
])
def test_dataset_rejects_bad_input(X, y):
    with pytest.raises(ACDError):
        Dataset(X, y)


def test_subset_keeps_names():
    d = Dataset(np.arange(12.0).reshape(4, 3), np.arange(4.0), ("a", "b", "c"))
    s = d.subset([0, 2])
    assert s.n == 2 and s.names == ("a", "b", "c")
    np.testing.assert_array_equal(s.X, d.X[[0, 2]])


def test_standardize_small_example():
    d = Dataset(np.array([[1.0], [2.0], [3.0]]), np.zeros(3))
    sd = standardize(d)
    np.testing.assert_allclose(sd.Z[:, 0], [-1, 0, 1])
    np.testing.assert_allclose(sd.y_c, 0)


def test_standardize_constant_column_warns():
    X = np.column_stack([[5.0, 5.0, 5.0], [1.0, 2.0, 4.0]])
    with pytest.warns(ACDWarning):
        sd = standardize(Dataset(X, np.arange(3.0)))
    np.testing.assert_array_equal(sd.Z[:, 0], 0.0)
    assert sd.col_scales[0] == 1.0
    assert sd.constant_cols == (0,)


def test_standardize_random_moments(rng):
    d = Dataset(rng.normal(3, 5, (20, 4)), rng.standard_normal(20))
    sd = standardize(d)
    np.testing.assert_allclose(sd.Z.mean(axis=0), 0, atol=1e-10)
    np.testing.assert_allclose(sd.Z.std(axis=0, ddof=1), 1, atol=1e-10)
    assert abs(sd.y_c.mean()) < 1e-10
    np.testing.assert_allclose(sd.unstandardize(), d.X, atol=1e-10)
    D = sd.design()
    assert D.shape == (20, 5) and np.all(D[:, 0] == 1)


@settings(max_examples=40, deadline=None)
@given(arrays(float, st.tuples(st.integers(3, 12), st.integers(1, 4)),
              elements=st.floats(-1e3, 1e3, allow_nan=False)))
def test_standardize_roundtrip(X):
    d = Dataset(X, np.arange(len(X), dtype=float))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ACDWarning)
        sd = standardize(d)
    np.testing.assert_allclose(sd.unstandardize(), X, atol=1e-8 * (1 + np.abs(X).max()))


def test_build_sigma_examples():
    np.testing.assert_array_equal(build_sigma(CorrelationSpec("identity"), 3), np.eye(3))
    np.testing.assert_array_equal(build_sigma(CorrelationSpec("ar1", 0.5), 3),
                                  [[1, .5, .25], [.5, 1, .5], [.25, .5, 1]])
    np.testing.assert_array_equal(build_sigma(CorrelationSpec("exchangeable", 0.5), 2),
                                  [[1, .5], [.5, 1]])


@pytest.mark.parametrize("kind", ["ar1", "exchangeable"])
@pytest.mark.parametrize("rho", [-0.1, 0.0, 0.5, 0.9])
def test_build_sigma_symmetric_unit_diag(kind, rho):
    S = build_sigma(CorrelationSpec(kind, rho), 6)
    np.testing.assert_array_equal(S, S.T)
    np.testing.assert_array_equal(np.diag(S), 1.0)
    assert np.linalg.eigvalsh(S).min() > 0


def test_exchangeable_not_pd_rejected():
    with pytest.raises(ACDError):
        build_sigma(CorrelationSpec("exchangeable", -0.5), 4)  # -1/(p-1) = -1/3


@pytest.mark.parametrize("rho", [1.0, -1.0, 1.5])
def test_correlation_rho_range(rho):
    with pytest.raises(ACDError):
        CorrelationSpec("ar1", rho)


def test_correlation_unknown_kind():
    with pytest.raises(ACDError):
        CorrelationSpec("toeplitz", 0.3)


def test_cholesky_sample_identity_covariance(rng):
    X = cholesky_sample(np.eye(2), np.zeros(2), 10_000, rng)
    np.testing.assert_allclose(np.cov(X.T), np.eye(2), atol=0.1)


def test_cholesky_sample_correlation(rng):
    X = cholesky_sample(np.array([[1, .9], [.9, 1]]), np.zeros(2), 10_000, rng)
    assert abs(np.corrcoef(X.T)[0, 1] - 0.9) < 0.05


def test_cholesky_sample_empty_and_non_pd(rng):
    assert cholesky_sample(np.eye(3), np.zeros(3), 0, rng).shape == (0, 3)
    with pytest.raises(ACDError):
        cholesky_sample(np.array([[1, 2], [2, 1]]), np.zeros(2), 5, rng)


def test_cholesky_sample_reproducible():
    a = cholesky_sample(np.eye(3), np.ones(3), 5, np.random.default_rng(4))
    b = cholesky_sample(np.eye(3), np.ones(3), 5, np.random.default_rng(4))
    np.testing.assert_array_equal(a, b)


def test_spawn_streams_independent_and_reproducible():
    a = [g.random() for g in spawn_streams(9, 3)]
    b = [g.random() for g in spawn_streams(9, 3)]
    assert a == b and len(set(a)) == 3


def test_as_dataset_names():
    d = as_dataset(np.ones((3, 2)) * [[1, 2]] + np.arange(3)[:, None], np.arange(3.0), ["u", "v"])
    assert d.names == ("u", "v")
