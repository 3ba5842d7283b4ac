import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from airy_nonlocal import FunctionSpec
from airy_nonlocal.contour_quadrature import (
    ContourPath,
    QuadratureSpec,
    SECTORS,
    Segment,
    build_contour,
    closed_sector_loop,
    composite_rule,
    cumulative_matrices,
    fourier_coefficient,
    fourier_coefficients,
    integrate_contour,
    integrate_real_pv,
    panel_tail_estimate,
)


def test_composite_rule_integrates_polynomial_exactly():
    x, w = composite_rule([0.0, 0.3, 1.0], 16)
    assert np.sum(w * x ** 7) == pytest.approx(1 / 8, rel=1e-14)


def test_cumulative_matrices_match_antiderivative():
    L, Rm = cumulative_matrices(16)
    from airy_nonlocal.contour_quadrature import gauss_legendre
    x, _ = gauss_legendre(16)
    f = np.exp(x)
    assert np.allclose(L @ f, np.exp(x) - np.exp(-1), atol=1e-14)
    assert np.allclose(Rm @ f, np.exp(1) - np.exp(x), atol=1e-14)


def test_panel_tail_estimate_small_for_smooth_values():
    from airy_nonlocal.contour_quadrature import gauss_legendre
    x, _ = gauss_legendre(16)
    est = panel_tail_estimate(np.cos(x)[None, :], np.array([1.0]))
    assert est[0] < 1e-13
    rough = panel_tail_estimate(np.abs(x)[None, :], np.array([1.0]))
    assert rough[0] > 1e-4


def test_dD_plus_geometry():
    path = build_contour("dD_plus", 1.0, 10.0)
    ray_in, arc, ray_out = path.components[0]
    assert ray_in.start == pytest.approx(10 * np.exp(2j * np.pi / 3))
    assert ray_in.end == pytest.approx(np.exp(2j * np.pi / 3))
    assert arc.kind == "arc" and arc.radius == 1.0
    assert ray_out.end == pytest.approx(10 * np.exp(1j * np.pi / 3))


def test_dD_minus_has_two_components():
    path = build_contour("dD_minus", 1.0, 10.0)
    assert len(path.components) == 2
    for comp in path.components:
        for a, b in zip(comp[:-1], comp[1:]):
            assert abs(a.end - b.start) < 1e-12


def test_contour_errors():
    with pytest.raises(ValueError):
        build_contour("nowhere", 1.0, 10.0)
    with pytest.raises(ValueError):
        build_contour("dD_plus", 2.0, 1.0)


def test_full_loop_of_all_sectors_winds_once():
    total = 0j
    for region in ("D_plus", "D_minus", "E_plus", "E_minus"):
        for a, b in SECTORS[region]:
            # each annular sector loop encloses no pole; the inner arcs sum to the
            # clockwise circle, so subtract that to recover the anticlockwise winding
            loop = ContourPath("custom", (closed_sector_loop(a, b, 1.0, 10.0),), 1.0, 10.0, True)
            total += integrate_contour(lambda z: 1 / z, loop).value
            far = Segment("arc", radius=10.0, theta0=a, theta1=b)
            total -= integrate_contour(lambda z: 1 / z, ContourPath("custom", ((far,),), 1, 10)).value
    # what is left is the sum of the inner arcs traversed clockwise
    assert total == pytest.approx(-2j * np.pi, abs=1e-12)


@pytest.mark.parametrize("deg", [0, 3, 7])
def test_closed_loop_cauchy_polynomial(deg):
    for region in ("D_plus", "E_minus"):
        for a, b in SECTORS[region]:
            loop = ContourPath("custom", (closed_sector_loop(a, b, 0.5, 2.0),), 0.5, 2.0, closed=True)
            r = integrate_contour(lambda z: z ** deg + 1j, loop)
            assert abs(r.value) < 1e-10
            assert r.est_abs_error < 1e-10


def test_straight_segment_and_zero_integrand():
    seg = Segment("line", start_point=0j, end_point=1 + 0j)
    path = ContourPath("custom", ((seg,),), 1.0, 1.0)
    assert integrate_contour(lambda z: z, path).value == pytest.approx(0.5, abs=1e-15)
    r = integrate_contour(lambda z: 0 * z, path)
    assert r.value == 0 and r.est_abs_error == 0


def test_decaying_ray_matches_closed_form():
    # int over i[1, 40] of e^{i lam} d lam = i int_1^40 e^{-s} ds
    seg = Segment("ray", base=1j, direction=1j, length=39.0)
    r = integrate_contour(lambda z: np.exp(1j * z), ContourPath("custom", ((seg,),), 1.0, 40.0))
    assert r.value == pytest.approx(1j * (np.exp(-1) - np.exp(-40)), abs=1e-14)
    assert r.est_abs_error < 1e-10


@settings(max_examples=20, deadline=None)
@given(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
       st.integers(0, 4))
def test_orientation_reversal_negates(c, k):
    path = build_contour("dE_plus", 1.0, 5.0)
    f = lambda z: (z - c) ** k * np.exp(-0.1 * z * z)
    a = integrate_contour(f, path).value
    b = integrate_contour(f, path.reversed()).value
    assert abs(a + b) <= 1e-11 * (1 + abs(a))


def test_real_pv_odd_and_arctan():
    spec = QuadratureSpec()
    assert abs(integrate_real_pv(lambda z: z / (1 + z ** 4), spec, L=200.0).value) < 1e-12
    r = integrate_real_pv(lambda z: 1 / (1 + z * z), spec, L=1e4)
    assert r.value.real == pytest.approx(np.pi - 2 * np.arctan(1e-4), abs=1e-10)


def test_real_pv_removable_point_stable_under_halving():
    f = lambda z: np.sinc((z - 1) / np.pi) * np.exp(-z * z)
    a = integrate_real_pv(f, QuadratureSpec(pv_epsilon=1e-3), removable=[1.0], L=10.0).value
    b = integrate_real_pv(f, QuadratureSpec(pv_epsilon=5e-4), removable=[1.0], L=10.0).value
    ref = integrate_real_pv(f, QuadratureSpec(), L=10.0).value
    assert abs(a - b) < 1e-12 and abs(a - ref) < 1e-12


def test_fourier_coefficients_orthogonality():
    T = 3.0
    w = 2 * np.pi / T
    cos = FunctionSpec.modes([(w, 0.5), (-w, 0.5)], (0.0, T))
    assert fourier_coefficient(cos, 1, T) == pytest.approx(0.5, abs=1e-15)
    assert fourier_coefficient(cos, -1, T) == pytest.approx(0.5, abs=1e-15)
    assert abs(fourier_coefficient(cos, 2, T)) < 1e-15
    c = fourier_coefficients(lambda t: np.exp(3j * w * t), 5, T)
    expect = np.zeros(11, complex)
    expect[5 + 3] = 1
    assert np.allclose(c, expect, atol=1e-14)
    const = fourier_coefficients(lambda t: 2.5 + 0 * t, 4, T)
    assert const[4] == pytest.approx(2.5) and np.allclose(np.delete(const, 4), 0, atol=1e-15)


def test_fourier_roundtrip_exact_for_trigonometric():
    T = 2 * np.pi
    h = lambda t: np.cos(t) + 0.3 * np.sin(4 * t) - 0.1j * np.exp(-2j * t)
    c = fourier_coefficients(h, 6, T)
    t = np.linspace(0, T, 37)
    rec = sum(c[k + 6] * np.exp(1j * k * t) for k in range(-6, 7))
    assert np.max(np.abs(rec - h(t))) < 1e-14


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rel_tol=0)
    with pytest.raises(ValueError):
        QuadratureSpec(max_panels=8)
