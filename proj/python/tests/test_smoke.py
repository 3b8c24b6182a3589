import math

import numpy as np
import pytest

import funcmax


def test_identical_groups_are_retained():
    rng = np.random.default_rng(1)
    x = rng.normal(size=(12, 3, 8))
    report = funcmax.test(x, x.copy(), seed=4)
    assert report["schema"] == funcmax.REPORT_SCHEMA
    assert report["p_global"] == 1.0
    assert not report["reject_global"]


def test_large_shift_is_rejected():
    rng = np.random.default_rng(2)
    x = rng.normal(size=(100, 1, 50))
    report = funcmax.test(x, x + 10.0, gamma=0.05)
    assert report["p_global"] == 0.0
    assert report["reject_global"]
    assert math.isclose(report["statistic"]["global"], 1e4, rel_tol=1e-9)


def test_statistic_hand_example():
    z = np.array([[[1.0, 3.0]], [[3.0, 1.0]]])
    glob, per_channel = funcmax.statistic(z)
    assert glob == 8.0
    assert per_channel.tolist() == [8.0]
    glob, _ = funcmax.statistic(z, method="max")
    assert math.isclose(glob, 2 * math.sqrt(2))


def test_quantile_and_tail():
    assert funcmax.bootstrap_quantile(list(range(1, 11)), 0.05) == 10
    assert funcmax.ecdf_tail([1, 2, 3, 4], 2.5) == 0.5
    a, b = funcmax.equicorrelation_root(2, 0.5)
    assert math.isclose(a * a + 2 * a * b + 2 * b * b, 1.0)


def test_simulate_and_experiment():
    cfg = {"n": 8, "K": 4, "T": 16, "seed": 3, "s": 0.5, "delta": 0.2}
    z = funcmax.simulate(cfg, run_index=1)
    assert z.shape == (8, 4, 16)
    assert np.array_equal(z, funcmax.simulate(cfg, run_index=1))

    spec = {"dgp": {"n": 10, "K": 2, "T": 10, "seed": 5}, "runs": 4, "N": 20,
            "methods": ["proposed", "max"], "grid": [{"n": 10, "rho": 0.0}]}
    rows = funcmax.run_level(spec)
    assert [r["method"] for r in rows] == ["proposed", "max"]
    assert all(0.0 <= r["rate"] <= 1.0 and r["runs"] == 4 for r in rows)


def test_errors_are_python_exceptions():
    x = np.zeros((3, 1, 4))
    with pytest.raises(funcmax.MethodError):
        funcmax.test(x, x, method="median")
    with pytest.raises(funcmax.SpecError):
        funcmax.run_level({"grid": [{"delta": 0.5, "s": 0.5}], "runs": 1, "N": 2})
    with pytest.raises(funcmax.IngestError):
        funcmax.read_csv("/nonexistent/x.csv", "/nonexistent/y.csv")
    assert issubclass(funcmax.SpecError, ValueError)
