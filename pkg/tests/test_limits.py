import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaugefrac.bodies import ConvexBody
from gaugefrac.functions import TestFunction, lp_norm
from gaugefrac.limits import (
    BBM_LADDER,
    MS_LADDER,
    _report,
    bbm_target,
    fit_limit,
    verify_bbm_1d,
    verify_bbm_limit,
    verify_ms_1d,
    verify_ms_limit,
)
from gaugefrac.quadrature import QuadratureSpec
from gaugefrac.seminorm import SeminormEstimate

TENT = TestFunction.make("tent", 1)
COS = TestFunction.make("cosine_bump", 1, scale=0.8)
CHEAP = QuadratureSpec(angular_points=32, spatial_panels=12)


def _fake(mode, values, errors):
    ladder = BBM_LADDER if mode == "bbm" else MS_LADDER
    out = []
    for s, v, e in zip(ladder, values, errors):
        factor = 1 - s if mode == "bbm" else s
        out.append(SeminormEstimate(v / factor, e / factor, "one_d", s, 1.0, "", ""))
    return out


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.sampled_from(["bbm", "ms"]))
def test_quadratic_fit_recovers_polynomial_limit(L, a, b, mode):
    ladder = BBM_LADDER if mode == "bbm" else MS_LADDER
    samples = []
    for s in ladder:
        g = 1 - s if mode == "bbm" else s
        samples.append((s, L + a * g + b * g * g, 0.0))
    limit, resid = fit_limit(samples, mode)
    assert limit == pytest.approx(L, abs=1e-9)
    assert resid < 1e-9


def test_linear_model_needs_two_points_and_fits_lines():
    limit, resid = fit_limit([(0.9, 1.2, 0), (0.95, 1.1, 0), (0.99, 1.02, 0)], "bbm", "linear_in_gap")
    assert limit == pytest.approx(1.0)
    assert resid < 1e-12
    with pytest.raises(ValueError):
        fit_limit([(0.9, 1.2, 0), (0.95, 1.1, 0)], "bbm")


def test_verdicts_from_synthetic_reports():
    g = np.array([1 - s for s in BBM_LADDER])
    clean = 4.0 + 0.3 * g - 0.2 * g**2
    rep = _report("bbm", "one_d", _fake("bbm", clean, [1e-6] * 4), 4.0, "test", 0.02, "quadratic_in_gap", {})
    assert rep.verdict == "pass"
    rep = _report("bbm", "one_d", _fake("bbm", clean, [1e-6] * 4), 5.0, "test", 0.02, "quadratic_in_gap", {})
    assert rep.verdict == "fail"
    # scatter far beyond the stated errors and beyond the residual floor
    noisy = clean + np.array([0.05, -0.05, 0.05, -0.05])
    rep = _report("bbm", "one_d", _fake("bbm", noisy, [1e-4] * 4), 4.0, "test", 0.02, "quadratic_in_gap", {})
    assert rep.verdict == "inconclusive"
    # the same scatter is acceptable when the samples declare it
    rep = _report("bbm", "one_d", _fake("bbm", noisy, [0.05] * 4), 4.0, "test", 0.02, "quadratic_in_gap", {})
    assert rep.verdict != "inconclusive"


def test_report_fields_are_consistent():
    rep = verify_bbm_1d(TENT, 1.0)
    assert [s for s, _, _ in rep.samples] == sorted(BBM_LADDER)
    assert rep.rel_error == pytest.approx(abs(rep.fitted_limit - rep.target) / rep.target, rel=1e-15)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["verdict"] == rep.verdict and d["model"] == "quadratic_in_gap"
    rows = rep.csv_rows()
    assert list(rows[0]) == ["s", "scaled_value", "std_error", "method"]
    assert len(rows) == 4


@pytest.mark.parametrize("p,target", [(1.0, 4.0), (2.0, 2.0)])
def test_bbm_1d_tent(p, target):
    rep = verify_bbm_1d(TENT, p)
    assert rep.target == pytest.approx(target, rel=1e-12)
    assert rep.verdict == "pass"
    assert rep.rel_error < 0.02


@pytest.mark.parametrize("p,target", [(1.0, 4.0), (2.0, 4.0 / 3.0)])
def test_ms_1d_tent(p, target):
    rep = verify_ms_1d(TENT, p)
    assert rep.target == pytest.approx(target, rel=1e-12)
    assert rep.verdict == "pass"


@pytest.mark.parametrize("p", [1.0, 1.5, 3.0])
def test_cosine_bump_limits(p):
    assert verify_bbm_1d(COS, p).verdict == "pass"
    assert verify_ms_1d(COS, p).verdict == "pass"


def test_ladder_preconditions():
    with pytest.raises(ValueError, match="at least 3"):
        verify_ms_1d(TENT, 1.0, [0.5])
    with pytest.raises(ValueError, match="at least 3"):
        verify_bbm_1d(TENT, 1.0, [0.9, 0.99])
    with pytest.raises(ValueError, match=r"s must lie in \(0,1\)"):
        verify_bbm_1d(TENT, 1.0, [0.9, 0.99, 1.0])
    with pytest.raises(ValueError):
        verify_bbm_1d(TestFunction.make("tent", 2), 1.0)


@pytest.mark.parametrize("p", [1.0, 2.0])
def test_one_dimensional_specializations_agree(p):
    interval = ConvexBody.interval(1.0)
    a = verify_bbm_limit(TENT, interval, p)
    b = verify_bbm_1d(TENT, p)
    assert np.allclose([v for _, v, _ in a.samples], [v for _, v, _ in b.samples], rtol=1e-10, atol=0)
    assert a.details["one_d_target"] == pytest.approx(a.target, rel=1e-8)
    assert a.target == pytest.approx(b.target, rel=1e-8)
    c = verify_ms_limit(TENT, interval, p)
    d = verify_ms_1d(TENT, p)
    assert np.allclose([v for _, v, _ in c.samples], [v for _, v, _ in d.samples], rtol=1e-10, atol=0)
    # (2n/p) Vol([-1, 1]) = 4/p
    assert c.target == d.target


def test_one_dimensional_targets_for_wider_interval():
    info = bbm_target(TENT, ConvexBody.interval(2.0), 1.5)
    assert info["one_d_target"] == pytest.approx(info["target"], rel=1e-8)


@pytest.mark.parametrize("lam", [0.5, 2.0])
@pytest.mark.parametrize("body", [ConvexBody.box([1.0, 0.5]), ConvexBody.ball(2)], ids=lambda b: b.kind)
def test_targets_scale_with_body(body, lam):
    f = TestFunction.make("smooth_bump", 2)
    p = 1.5
    a = bbm_target(f, body, p)["target"]
    b = bbm_target(f, body.scaled(lam), p)["target"]
    assert b == pytest.approx(lam ** (2 + p) * a, rel=1e-8)
    assert body.scaled(lam).volume() == pytest.approx(lam**2 * body.volume(), rel=1e-12)


def test_ms_target_for_disk():
    f = TestFunction.make("cosine_bump", 2)
    rep = verify_ms_limit(f, ConvexBody.ball(2), 2.0, spec=CHEAP, with_bp=False)
    assert rep.target == pytest.approx(4 / 2 * math.pi * lp_norm(f, 2.0) ** 2, rel=1e-12)
    assert rep.verdict == "pass"


def test_bbm_report_records_both_routes():
    f = TestFunction.make("cosine_bump", 2)
    rep = verify_bbm_limit(f, ConvexBody.ball(2), 2.0, spec=CHEAP)
    assert rep.verdict == "pass"
    assert rep.details["bp"]["rel_error"] < 0.05
    assert rep.details["moment_energy"] == pytest.approx(math.pi / 2 * rep.details["polar_gauge_energy"], rel=1e-8)
