import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaugefrac.quadrature import (
    MIN_CUTOFF,
    QuadratureSpec,
    circle_rule,
    composite_gauss,
    golden_breaks,
    half_sphere_rule,
    orthonormal_complement,
    radial_unit_rule,
    sphere_area,
)


def test_spec_defaults_and_digest_stable():
    a, b = QuadratureSpec(), QuadratureSpec()
    assert a.digest == b.digest
    assert a.digest != QuadratureSpec(seed=1).digest


@pytest.mark.parametrize(
    "kw",
    [
        {"radial_panels": 7},
        {"radial_grading": 1.0},
        {"angular_points": 0},
        {"mc_samples": 0},
        {"split_radius": -1.0},
        {"seed": -1},
        {"seed": 2**64},
    ],
)
def test_spec_rejects_bad_fields(kw):
    with pytest.raises(ValueError):
        QuadratureSpec(**kw)


def test_spec_from_dict_rejects_unknown_field():
    with pytest.raises(ValueError, match="unknown"):
        QuadratureSpec.from_dict({"radial_panel": 9})


@given(
    st.integers(8, 80),
    st.floats(0.2, 0.8),
    st.integers(1, 32),
    st.integers(0, 2**64 - 1),
)
def test_spec_round_trip(panels, grading, order, seed):
    spec = QuadratureSpec(radial_panels=panels, radial_grading=grading, radial_order=order, seed=seed)
    assert QuadratureSpec.from_dict(spec.to_dict()) == spec


def test_coarsened_and_refined():
    spec = QuadratureSpec()
    c = spec.coarsened()
    assert c.radial_order == spec.radial_order // 2
    assert c.angular_points == spec.angular_points // 2
    r = spec.refined()
    assert r.radial_panels == 2 * spec.radial_panels
    assert r.angular_points == 2 * spec.angular_points


def test_composite_gauss_is_exact_for_polynomials():
    x, w = composite_gauss(np.array([0.0, 0.3, 1.0, 2.5]), 4)
    assert np.sum(w * x**7) == pytest.approx(2.5**8 / 8, rel=1e-13)


def test_golden_breaks_avoid_lattice_points():
    br = golden_breaks(-1.0, 1.0, 24)
    assert br[0] == -1.0 and br[-1] == 1.0
    assert np.all(np.diff(br) > 0)
    x, _ = composite_gauss(br, 4)
    assert np.min(np.abs(x)) > 1e-6


def test_radial_rule_integrates_singular_power():
    t, w, eps = radial_unit_rule(30, 0.5, 8, 0.125)
    assert eps >= MIN_CUTOFF
    a = -0.9
    exact = (1.0 - eps ** (a + 1)) / (a + 1)
    assert np.sum(w * t**a) == pytest.approx(exact, rel=1e-12)


def test_radial_rule_cutoff_is_capped():
    _, _, eps30 = radial_unit_rule(30, 0.5, 8, 0.125)
    _, _, eps60 = radial_unit_rule(60, 0.5, 8, 0.125)
    assert eps60 == eps30 >= MIN_CUTOFF


@pytest.mark.parametrize("n", [1, 2, 3])
def test_half_sphere_weights(n):
    u, w = half_sphere_rule(n, 32)
    assert np.sum(w) == pytest.approx(sphere_area(n) / 2, rel=1e-12)
    assert np.allclose(np.linalg.norm(u, axis=1), 1.0)


def test_half_sphere_rule_integrates_even_quadratic():
    u, w = half_sphere_rule(3, 32)
    # int_{S^2} u_1^2 = 4 pi / 3
    assert 2 * np.sum(w * u[:, 0] ** 2) == pytest.approx(4 * math.pi / 3, rel=1e-10)


def test_circle_rule_with_kinks_integrates_abs_cos():
    kinks = [math.pi / 2]
    theta, w = circle_rule(64, kinks)
    assert np.sum(w) == pytest.approx(math.pi)
    assert np.sum(w * np.abs(np.cos(theta))) == pytest.approx(2.0, rel=1e-12)


def test_orthonormal_complement():
    u = np.array([1.0, 2.0, 2.0]) / 3
    q = orthonormal_complement(u)
    assert np.allclose(q @ u, 0)
    assert np.allclose(q @ q.T, np.eye(2))
