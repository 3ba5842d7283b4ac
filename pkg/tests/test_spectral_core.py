import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from airy_nonlocal import DataError, FunctionSpec, ProblemData, SingularDeltaError
from airy_nonlocal.spectral_core import (
    ALPHA,
    ROT,
    delta,
    delta_array,
    delta_prime,
    fourier_restricted,
    kappa_hat,
    n0,
    n1,
    n_combined,
    time_transform,
    weighted_integral,
)
from airy_nonlocal.invp_solver import right_combination

F = FunctionSpec
RNG = np.random.default_rng(20261014)


def cquad(f, a, b):
    warnings.simplefilter("ignore")
    re = quad(lambda s: np.real(f(s)), a, b, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    im = quad(lambda s: np.imag(f(s)), a, b, limit=400, epsabs=1e-14, epsrel=1e-13)[0]
    return re + 1j * im


def scalar(spec):
    return lambda s: complex(spec.evaluate(np.array([s]))[0])


WEIGHTS = [F.polynomial([1.0]), F.polynomial([1.0, 0.3, -0.2]),
           F.modes([(0.0, 1.0), (2.0, 0.25j)]),
           F.samples(1 + 0.5 * np.cos(3 * np.linspace(0, 1, 41)), 3)]


def random_lams(k, rmax=20.0):
    r = RNG.uniform(1, rmax, k)
    th = RNG.uniform(-np.pi, np.pi, k)
    return r * np.exp(1j * th)


# -- FunctionSpec ------------------------------------------------------------

def test_function_spec_kinds_evaluate():
    x = np.linspace(0, 1, 5)
    assert np.allclose(F.polynomial([1, 2, 3]).evaluate(x), 1 + 2 * x + 3 * x ** 2)
    assert np.allclose(F.modes([(2.0, 1j)]).evaluate(x), 1j * np.exp(2j * x))
    assert np.allclose(F.builtin("cos", amp=2.0, freq=3.0).evaluate(x), 2 * np.cos(3 * x))
    lin = F.samples([0.0, 1.0, 4.0], order=1)
    assert lin.evaluate(np.array([0.25]))[0] == pytest.approx(0.5)
    cub = F.samples(np.linspace(0, 1, 11) ** 3, order=3)
    assert np.allclose(cub.evaluate(x), x ** 3, atol=1e-14)


def test_function_spec_derivatives_and_builtins():
    bump = F.builtin("compatible_bump")
    cubic = F.builtin("compatible_cubic")
    one = np.array([1.0])
    for f in (bump, cubic):
        assert abs(f.evaluate(one)[0]) < 1e-15
        assert abs(f.evaluate(one, 1)[0]) < 1e-15
        assert abs(weighted_integral(F.polynomial([1.0]), f)) < 1e-15
    m = F.modes([(1.5, 2.0)])
    assert m.evaluate(np.array([0.3]), 2)[0] == pytest.approx(2 * (1.5j) ** 2 * np.exp(0.45j))


def test_function_spec_validation():
    with pytest.raises(DataError):
        F.samples([1.0])
    with pytest.raises(DataError):
        F.samples([1.0, 2.0, 3.0], order=2)
    with pytest.raises(DataError):
        F.builtin("nonsense")
    with pytest.raises(DataError):
        F.from_dict({"unknown": 1})


@pytest.mark.parametrize("spec", [
    F.polynomial([1, 2j]), F.modes([(2.0, 1 + 1j)]), F.samples([1, 2, 3, 5]),
    F.builtin("compatible_bump", amp=0.1), F.sum([F.polynomial([1]), F.modes([(1.0, 2.0)])]),
    F.samples([1, 2j, 3], order=1, domain=(0, 2), periodic=True),
])
def test_function_spec_round_trip(spec):
    assert F.from_dict(spec.to_dict()) == spec


# -- transforms --------------------------------------------------------------

def test_fourier_restricted_examples():
    one = F.polynomial([1.0])
    assert fourier_restricted(one, 0.0, 0.0, 1.0).value == pytest.approx(1.0)
    assert fourier_restricted(one, 2.3 + 1j, 0.5, 0.5).value == 0
    assert fourier_restricted(one, np.pi, 0, 1).value == pytest.approx(2 / (1j * np.pi), abs=1e-15)
    with pytest.raises(ValueError):
        fourier_restricted(one, 1.0, 0.7, 0.2)


@pytest.mark.parametrize("f", WEIGHTS + [F.builtin("compatible_bump")])
def test_fourier_restricted_against_quad(f):
    for lam in [0.3, -4.0 + 2j, 11.0 - 3j]:
        y, z = 0.15, 0.85
        ref = cquad(lambda x: np.exp(-1j * lam * x) * scalar(f)(x), y, z)
        r = fourier_restricted(f, lam, y, z)
        assert abs(r.value - ref) <= 1e-12 * max(1, abs(ref))


def test_kappa_hat_examples():
    assert kappa_hat(F.polynomial([1.0]), 0).value == pytest.approx(1.0)
    lam = 2.7 - 0.4j
    assert kappa_hat(F.polynomial([1.0]), lam).value == pytest.approx((1 - np.exp(-1j * lam)) / (1j * lam))
    assert kappa_hat(F.polynomial([0.0, 1.0]), 0).value == pytest.approx(0.5)


@pytest.mark.parametrize("K", WEIGHTS[:3])
def test_kappa_hat_consistent_with_fourier(K):
    for lam in random_lams(100):
        a = kappa_hat(K, lam).value
        b = np.exp(-1j * lam) * fourier_restricted(K, -lam, 0, 1).value
        assert abs(a - b) <= 1e-12 * max(1, abs(b))


def test_time_transform_examples():
    one = F.polynomial([1.0], (0.0, np.inf))
    assert time_transform(one, 0.0, 2.0).value == pytest.approx(2.0)
    assert time_transform(one, 1.0, 1.0).value == pytest.approx((1 - np.exp(-1j)) / 1j)
    mu = 0.7
    h = F.modes([(mu, 1.0)], (0.0, np.inf))
    lam, tp = 1.3 + 0.2j, 1.7
    k = mu - lam ** 3
    assert time_transform(h, lam, tp).value == pytest.approx((np.exp(1j * k * tp) - 1) / (1j * k))


def test_delta_examples():
    one = F.polynomial([1.0])
    assert delta(one, 0.0).value == 0
    lam = np.pi
    expect = (4 - 2j * np.cosh(np.pi * np.sqrt(3) / 2)) / (1j * np.pi)
    assert delta(one, lam).value == pytest.approx(expect, rel=1e-13)


@pytest.mark.parametrize("K", WEIGHTS)
def test_delta_rotation_symmetry(K):
    lam = random_lams(100)
    d = delta_array(K, lam)
    dr = delta_array(K, ALPHA * lam)
    assert np.all(np.abs(dr - d / ALPHA) <= 1e-10 * (1 + np.abs(d)))


@pytest.mark.parametrize("K", WEIGHTS[:3])
def test_delta_prime_central_difference(K):
    lam = 2.2 + 1.1j
    dp = delta_prime(K, lam).value
    errs = []
    for h in (1e-2, 5e-3):
        fd = (delta(K, lam + h).value - delta(K, lam - h).value) / (2 * h)
        errs.append(abs(fd - dp))
    assert errs[1] < errs[0] / 3          # second-order convergence
    assert errs[1] < 1e-4 * max(1, abs(dp))
    assert abs(delta_prime(F.polynomial([1.0]), 0.0).value) < 1e-15
    assert delta_prime(K, ALPHA * lam).value == pytest.approx(delta_prime(K, lam).value / ALPHA ** 2, rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 15), st.floats(-np.pi, np.pi))
def test_delta_rotation_property(r, th):
    K = WEIGHTS[1]
    lam = r * np.exp(1j * th)
    d = delta(K, lam).value
    assert abs(delta(K, ALPHA * lam).value - d / ALPHA) <= 1e-10 * (1 + abs(d))


# -- problem data ------------------------------------------------------------

def _zero_data(K=None):
    z = F.zero((0.0, np.inf))
    return ProblemData(F.zero(), K or F.polynomial([1.0]), z, z, z)


def test_problem_data_validation():
    z = F.zero((0.0, np.inf))
    with pytest.raises(DataError, match="nonzero at 0"):
        ProblemData(F.zero(), F.polynomial([0.0, 1.0]), z, z, z)
    with pytest.raises(DataError, match="incompatible"):
        ProblemData(F.polynomial([1.0]), F.polynomial([1.0]), z, z, z)
    h = F.modes([(1.0, 1.0)], (0.0, np.inf))
    with pytest.raises(DataError, match="periodic"):
        ProblemData(F.zero(), F.polynomial([1.0]), h.scaled(0) + F.polynomial([0.0, 1.0], (0, np.inf)),
                    z, z, period=2.0, check=True)


def test_zero_data_gives_zero_spectral_values():
    d = _zero_data()
    for fn in (n1, n_combined, n0):
        r = fn(d, 2.0 + 1j, 1.0)
        assert r.value == 0


def _generic_data():
    K = F.polynomial([1.0, 0.3, -0.2])
    U = F.sum([F.polynomial([0.2, -0.1, 0.4]), F.modes([(2.0, 0.3j)])])
    tdom = (0.0, np.inf)
    h0 = F.modes([(1.0, 0.5), (0.0, 0.1)], tdom)
    h1 = F.polynomial([0.2, 0.3j], tdom)
    h2 = F.modes([(-0.5, 0.2j)], tdom)
    return ProblemData(U, K, h0, h1, h2, check=False)


def _n1_oracle(d, lam, tp):
    K, U = scalar(d.weight), scalar(d.initial)
    kfwd = cquad(lambda x: np.exp(1j * lam * x) * K(x), 0, 1)    # K_hat(-lam)
    ht = [cquad(lambda s, h=h: np.exp(-1j * lam ** 3 * s) * scalar(h)(s), 0, tp)
          for h in (d.boundary0, d.boundary1, d.nonlocal_)]
    inner = lambda y: cquad(lambda x: np.exp(-1j * lam * x) * U(x), y, 1)
    dbl = cquad(lambda y: K(y) * np.exp(1j * lam * y) * inner(y), 0, 1)
    e = np.exp(-1j * lam)
    return lam ** 2 * e * kfwd * ht[0] - 1j * lam * e * kfwd * ht[1] - lam ** 2 * ht[2] + dbl, ht


@pytest.mark.parametrize("lam", [0.8 + 0.3j, -2.5 + 1.0j, 3.0 - 2.0j])
def test_n1_against_direct_assembly(lam):
    d = _generic_data()
    tp = 0.9
    ref, _ = _n1_oracle(d, lam, tp)
    assert abs(n1(d, lam, tp).value - ref) <= 1e-8 * max(1, abs(ref))


def test_n1_at_zero_is_double_integral():
    d = _generic_data()
    K, U = scalar(d.weight), scalar(d.initial)
    ref = cquad(lambda y: K(y) * cquad(U, y, 1), 0, 1)
    assert n1(d, 0.0, 1.3).value == pytest.approx(ref, abs=1e-12)


def test_n_combined_and_n0_against_direct_assembly():
    d = _generic_data()
    tp = 0.9
    lam = 1.7 + 0.6j
    n1s = [_n1_oracle(d, a * lam, tp)[0] for a in ROT]
    dl = delta(d.weight, lam).value
    n_ref = sum(a * v for a, v in zip(ROT, n1s)) / dl
    assert abs(n_combined(d, lam, tp).value - n_ref) <= 1e-8 * max(1, abs(n_ref))
    _, ht = _n1_oracle(d, lam, tp)
    U = scalar(d.initial)
    uhat = cquad(lambda x: np.exp(-1j * lam * x) * U(x), 0, 1)
    n0_ref = np.exp(-1j * lam) * (n_ref + 1j * lam * ht[1] - lam ** 2 * ht[0]) - uhat
    assert abs(n0(d, lam, tp).value - n0_ref) <= 1e-8 * max(1, abs(n0_ref))


def test_real_line_identity_for_n0(mode_case):
    d = mode_case.data
    tp = 0.6
    for lam in RNG.uniform(-12, 12, 5):
        lhs = fourier_restricted(d.initial, lam, 0, 1).value
        ht0 = time_transform(d.boundary0, lam, tp).value
        ht1 = time_transform(d.boundary1, lam, tp).value
        rhs = -n0(d, lam, tp).value + np.exp(-1j * lam) * (
            n_combined(d, lam, tp).value + 1j * lam * ht1 - lam ** 2 * ht0)
        assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lam) ** 2)


def test_homogeneous_n_independent_of_t_prime():
    U = F.builtin("compatible_cubic")
    z = F.zero((0.0, np.inf))
    d = ProblemData(U, F.polynomial([1.0]), z, z, z)
    for lam in (1.5 + 2j, -3.0 - 1j):
        assert n_combined(d, lam, 0.5).value == pytest.approx(n_combined(d, lam, 4.0).value, rel=1e-14)


def test_n_decays_like_inverse_lambda_on_dD_minus(mode_case):
    d = mode_case.data
    th = -np.pi / 6
    vals = [abs(n_combined(d, r * np.exp(1j * th), 1.0).value) * r for r in (20, 40, 80, 160)]
    # |lam| |n| must stay bounded: a non-increasing ladder certifies the trend
    assert all(b <= 1.5 * a for a, b in zip(vals[:-1], vals[1:]))


def test_linearity_of_n1_and_n0(mode_case):
    a = mode_case.data
    b = _generic_data()
    s = ProblemData(a.initial + b.initial, a.weight, a.boundary0 + b.boundary0,
                    a.boundary1 + b.boundary1, a.nonlocal_ + b.nonlocal_, check=False)
    b = b.replace(weight=a.weight)
    lam = 2.0 + 0.5j
    for fn in (n1, n0):
        assert fn(s, lam, 1.0).value == pytest.approx(fn(a, lam, 1.0).value + fn(b, lam, 1.0).value,
                                                      rel=1e-12)


def test_singular_delta_raises():
    K = F.polynomial([1.0])
    root = -5.549438397570431j
    z = F.zero((0.0, np.inf))
    d = ProblemData(F.builtin("compatible_cubic"), K, z, z, z)
    with pytest.raises(SingularDeltaError):
        n_combined(d, root, 1.0)


def test_right_combination_manufactured(mode_case):
    # the time transform of u_xx + i lam u_x - lam^2 u at x = 1 for u = e^{i(x+t)};
    # the identity holds up to a part of size |e^{-i lam^3 t'}|, negligible in D-
    d = mode_case.data
    for lam, tp in [(2.0 - 1.5j, 1.0), (4 * np.exp(-1j * np.pi / 6), 1.0),
                    (3 * np.exp(-5j * np.pi / 6), 2.0)]:
        k = 1 - lam ** 3
        htilde = (np.exp(1j * k * tp) - 1) / (1j * k)
        expect = (-1 - lam - lam ** 2) * np.exp(1j) * htilde
        r = right_combination(d, lam, tp)
        assert abs(np.exp(-1j * lam ** 3 * tp)) < 1e-6
        assert abs(r.value - expect) <= 1e-6 * max(1, abs(expect))
    z = _zero_data()
    assert right_combination(z, 1.0 - 1j, 1.0).value == 0


def test_right_combination_linear(mode_case):
    d = mode_case.data
    d2 = ProblemData(d.initial.scaled(2), d.weight, d.boundary0.scaled(2), d.boundary1.scaled(2),
                     d.nonlocal_.scaled(2), check=False)
    lam = 1.5 - 2.0j
    assert right_combination(d2, lam, 1.0).value == pytest.approx(
        2 * right_combination(d, lam, 1.0).value, rel=1e-13)
