import math

import numpy as np
import pytest

import gmclab


def test_version_and_ids():
    assert isinstance(gmclab.__version__, str)
    assert gmclab.criterion_ids() == [f"C{i}" for i in range(1, 11)]


def test_exponent_roots():
    for g in (0.5, 1.0, 1.8):
        assert gmclab.zeta_bar(0.5, g) == pytest.approx(1.0, abs=1e-12)
        assert gmclab.zeta_bar(gmclab.pc(g), g) == pytest.approx(1.0, abs=1e-12)
    assert gmclab.predicted_scan_slope(0.4, 1.8) == 0.0


def test_first_moments():
    assert gmclab.deterministic_first_moment(gmclab.Rect(-1, 1, 0, 1), 1.0, 2**-6) == pytest.approx(4.0, rel=1e-12)
    cube = gmclab.carleson(-1, 1)
    assert gmclab.deterministic_first_moment(cube, 1.0, 2**-6) == pytest.approx(4 * math.sqrt(2), rel=1e-12)
    d = gmclab.first_moment_divergence(gmclab.Rect(-1, 1, 0, 1), 1.8, [2.0**-k for k in range(4, 9)])
    assert d["diverging"]
    assert d["increment_slope"] == pytest.approx(1.8**2 / 2 - 1, abs=1e-9)


def test_invalid_gamma_raises():
    with pytest.raises(ValueError, match=r"\(0,2\)"):
        gmclab.deterministic_first_moment(gmclab.Rect(-1, 1, 0, 1), 2.5, 2**-4)


def test_sampling_is_reproducible_across_workers():
    region = gmclab.carleson(-0.25, 0.25)
    a = gmclab.sample_log_masses(region, 1 / 16, 1.0, 64, seed=7, workers=1)
    b = gmclab.sample_log_masses(region, 1 / 16, 1.0, 64, seed=7, workers=3)
    assert isinstance(a, np.ndarray) and a.shape == (64,)
    assert np.array_equal(a, b)
    m = gmclab.estimate_moment(a.tolist(), 1.0, 1.0)
    assert m["mean"] > 0 and m["stderr"] > 0


def test_scaling_report():
    rep = gmclab.scaling_check(gmclab.carleson(-0.25, 0.25), 0.5, 0.8, 1.0, 1 / 16, 400, workers=1)
    assert [r["label"] for r in rep["rows"]] == ["rA", "ratio", "A"]
    assert rep["csv"].startswith("label,scale,estimate,stderr,log_estimate,n_samples\n")


def test_inequalities():
    for s in gmclab.fuzz_elementary(500, 3):
        assert s["violations"] == 0
    assert gmclab.kahane_shift_constant(math.log(2), 1.0, 2.0) == pytest.approx(2.0, rel=1e-15)


def test_reduced_criterion():
    r = gmclab.run_criterion("C5", reduced=True)
    assert r["passed"]
    assert "c5_first_moment.csv" in r["csv"]
