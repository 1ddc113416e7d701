import os
import subprocess
import sys

import numpy as np
import pytest

from acd import _backend
from acd import _cd_py as slow

try:
    from acd import _cd_fast as fast
except ImportError:  # extension not built
    fast = None

needs_fast = pytest.mark.skipif(fast is None, reason="compiled kernels not built")


def gram_problem(seed, m=50, p=15):
    r = np.random.default_rng(seed)
    X = r.standard_normal((m, p))
    X -= X.mean(axis=0)
    y = X[:, :3] @ [2.0, -1.0, 0.5] + r.standard_normal(m)
    y -= y.mean()
    return X, y, X.T @ X / m, X.T @ y / m


@needs_fast
@pytest.mark.parametrize("kind", [0, 1])
@pytest.mark.parametrize("seed", range(4))
def test_paths_identical(kind, seed):
    X, y, G, b = gram_problem(seed)
    lams = np.geomspace(np.abs(b).max(), 0.01 * np.abs(b).max(), 30)
    np.testing.assert_allclose(fast.path_gram(G, b, lams, kind, 3.7, 1e-7, 10_000),
                               slow.path_gram(G, b, lams, kind, 3.7, 1e-7, 10_000),
                               atol=1e-12)
    Xt = np.ascontiguousarray(X.T)
    np.testing.assert_allclose(fast.path_resid(Xt, y, lams, kind, 3.7, 1e-7, 10_000),
                               slow.path_resid(Xt, y, lams, kind, 3.7, 1e-7, 10_000),
                               atol=1e-12)


@needs_fast
@pytest.mark.parametrize("kind", [0, 1])
def test_solvers_identical_with_trace(kind):
    _, _, G, b = gram_problem(9)
    lam = 0.05 * np.abs(b).max()
    bf, sf, tf = fast.solve_gram(G, b, np.zeros(len(b)), lam, kind, 3.7, 1e-9, 10_000, True)
    bs, ss, ts = slow.solve_gram(G, b, np.zeros(len(b)), lam, kind, 3.7, 1e-9, 10_000, True)
    assert sf == ss
    np.testing.assert_allclose(bf, bs, atol=1e-12)
    np.testing.assert_allclose(tf, ts, rtol=1e-12)


@needs_fast
@pytest.mark.parametrize("kind", [0, 1])
@pytest.mark.parametrize("z", [-5.0, -2.2, -0.3, 0.0, 1.1, 2.9, 4.5])
@pytest.mark.parametrize("v", [0.5, 1.0, 2.0])
def test_coordinate_updates_identical(kind, z, v):
    assert fast.coord_update(z, v, 1.0, kind, 3.7) == slow.coord_update(z, v, 1.0, kind, 3.7)


def test_max_sweeps_respected():
    _, _, G, b = gram_problem(1)
    _, sweeps, _ = _backend.kernels.solve_gram(G, b, np.zeros(len(b)), 1e-4, 0, 3.7, 0.0, 3)
    assert sweeps <= 3


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")
    if fast is not None:
        assert _backend.BACKEND == "cython"


def test_env_forces_python_backend():
    env = dict(os.environ, ACD_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import acd; print(acd.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
