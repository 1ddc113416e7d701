import numpy as np
import pytest

from acd.errors import ACDError
from acd.sim import (MOTIVATING_OUTLIERS, MODEL_II_VALUES, DETECTORS, SimScenario, gen_model,
                     model_one, model_two, motivating, null_detector, oracle_detector,
                     run_study, scad_select, selection_fpr, stability_selection, summarize,
                     tpr, trim, trim_and_select)


def test_model_one_layout():
    s = gen_model(model_one(), np.random.default_rng(0))
    assert s.data.X.shape == (100, 10) and len(s.outliers) == 5
    np.testing.assert_array_equal(s.beta, [3, 1.5, 0, 0, 2, 0, 0, 0, 0, 0])


def test_motivating_fixed_rows():
    for seed in range(3):
        s = gen_model(motivating(), np.random.default_rng(seed))
        assert s.outliers == frozenset(MOTIVATING_OUTLIERS)


def test_model_two_beta():
    s = gen_model(model_two(), np.random.default_rng(1))
    assert s.data.X.shape == (100, 200) and len(s.outliers) == 10
    nz = s.beta[s.beta != 0]
    assert sorted(nz) == sorted(MODEL_II_VALUES)


def test_gen_model_reproducible_and_clean_rows_match_model():
    a = gen_model(model_one(p_out=0.0), np.random.default_rng(7))
    b = gen_model(model_one(p_out=0.0), np.random.default_rng(7))
    np.testing.assert_array_equal(a.data.X, b.data.X)
    assert a.outliers == frozenset()
    resid = a.data.y - 0.5 - a.data.X @ a.beta
    assert abs(resid.std() - 0.8) < 0.2


def test_contaminated_rows_shifted():
    s = gen_model(model_one("identity", p_out=0.2), np.random.default_rng(2))
    out = sorted(s.outliers)
    clean = np.setdiff1d(np.arange(100), out)
    assert s.data.X[out].mean() > 3.5 and abs(s.data.X[clean].mean()) < 0.5


def test_squared_link():
    s = gen_model(motivating(link="squared"), np.random.default_rng(3))
    clean = np.setdiff1d(np.arange(100), MOTIVATING_OUTLIERS)
    idx = 0.5 + s.data.X[clean] @ s.beta
    assert np.corrcoef(s.data.y[clean], idx**2)[0, 1] > 0.95


@pytest.mark.parametrize("kw", [dict(p_out=0.6), dict(link="cubic"), dict(beta=(1.0,)),
                                dict(outlier_rows=(1, 2))])
def test_scenario_validation(kw):
    with pytest.raises(ACDError):
        SimScenario(**kw)


def test_metrics():
    assert tpr([1, 2, 9], [1, 2, 3, 4]) == 0.5
    assert selection_fpr([0, 2, 3], [1.0, 0.0, 0.0, 0.0, 2.0]) == pytest.approx(2 / 3)
    with pytest.raises(ACDError):
        tpr([1], [])
    with pytest.raises(ACDError):
        selection_fpr([0], [1.0, 2.0])


def test_trim():
    s = gen_model(model_one(), np.random.default_rng(0))
    t = trim(s.data, [0, 1, 2])
    assert t.n == 97
    np.testing.assert_array_equal(t.X[0], s.data.X[3])
    with pytest.raises(ACDError):
        trim(s.data, range(60))


def test_oracle_trim_helps_selection():
    s = gen_model(model_one(), np.random.default_rng(4))
    rng = np.random.default_rng(0)
    clean = trim_and_select(s, oracle_detector(s.outliers), rng)
    assert {0, 1, 4} <= set(clean)


def test_scad_select_clean_data():
    s = gen_model(model_one(p_out=0.0), np.random.default_rng(5))
    assert {0, 1, 4} <= set(scad_select(s.data, np.random.default_rng(0)))


def test_stability_selection():
    s = gen_model(model_one(p_out=0.0), np.random.default_rng(6))
    res = stability_selection(s.data, None, reps=6, rng=np.random.default_rng(1))
    assert res.proportions.shape == (10,) and res.reps == 6
    assert np.all(res.stable[[0, 1, 4]])
    with pytest.raises(ACDError):
        stability_selection(s.data.subset(range(8)), None, reps=2)


def test_run_study_rows_and_determinism():
    rows = run_study(model_one(), ["CKD", "ACD-LASSO"], reps=2, seed=3)
    assert len(rows) == 4 and {r.metric for r in rows} == {"tpr"}
    again = run_study(model_one(), ["CKD", "ACD-LASSO"], reps=2, seed=3)
    assert rows == again
    both = run_study(model_one(), ["ALL", "CKD"], reps=2, seed=3, metrics=("tpr", "fpr"))
    assert len(both) == 2 * (1 + 2)  # ALL has no TPR row
    s = summarize(both)
    assert s[("CKD", "tpr")]["n"] == 2


def test_run_study_workers_do_not_change_results():
    a = run_study(model_one(), ["CKD"], reps=3, seed=9)
    b = run_study(model_one(), ["CKD"], reps=3, seed=9, workers=2)
    assert a == b


def test_run_study_unknown_method():
    with pytest.raises(ACDError):
        run_study(model_one(), ["XYZ"], reps=1)


def test_detector_registry():
    assert set(DETECTORS) == {"ALL", "CKD", "ACD-LASSO", "ACD-SCAD"}
    assert null_detector(None, None) == ()
