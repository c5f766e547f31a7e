import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from homhardy.calculus import (
    ANALYTIC,
    DEFAULT_FD,
    RadialMethod,
    check_homogeneity,
    commutation_residual,
    euler_apply,
    fd_weights,
    radial_derivative,
    radial_jet,
)
from homhardy.group import QuasiNorm, make_group
from homhardy.quadrature import SupportBox
from homhardy.testfuncs import (
    CapabilityError,
    Constant,
    CoordinateTrace,
    PowerProfile,
    general,
    make_bump,
    separable,
)

G = make_group((1, 1, 2))
ANISO = QuasiNorm(G, "anisotropic")
KOR = QuasiNorm(G, "koranyi")
RNG = np.random.default_rng(1)


def offcentre_bump(x):
    c = np.array([0.6, -0.2, 0.5])
    d2 = np.sum(((x - c) / np.array([0.5, 0.6, 0.7])) ** 2, axis=-1)
    out = np.zeros(d2.shape)
    live = d2 < 1
    out[live] = np.exp(-1.0 / (1.0 - d2[live]))
    return out


BUMP_G = general(offcentre_bump, SupportBox((-1.0, -1.0, -1.0), (2.0, 2.0, 2.0)))


def test_method_validation():
    with pytest.raises(ValueError):
        RadialMethod("fd", h=0.0)
    with pytest.raises(ValueError):
        RadialMethod("fd", order=3)
    with pytest.raises(ValueError):
        RadialMethod("spectral")
    assert DEFAULT_FD.step(3) == pytest.approx(4e-3)


@pytest.mark.parametrize("order", [2, 4, 6])
def test_fd_weights_reproduce_monomials(order):
    for k in (1, 2, 3, 4):
        offs, c = fd_weights(k, order)
        for m in range(order + k):
            want = math.factorial(k) if m == k else 0.0
            assert np.dot(c, offs.astype(float) ** m) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("nu", [-1.5, 0.5, 2.0])
@pytest.mark.parametrize("method", [ANALYTIC, DEFAULT_FD])
def test_power_profile_derivative(nu, method):
    f = separable(PowerProfile(nu), Constant(1.0), ANISO)
    x = RNG.normal(size=(20, 3))
    r = ANISO(x)
    d = radial_derivative(f, x, 1, method)
    assert np.allclose(d, nu * r ** (nu - 1), rtol=1e-9)
    d2 = radial_derivative(f, x, 2, method)
    assert np.allclose(d2, nu * (nu - 1) * r ** (nu - 2), rtol=1e-7, atol=1e-12)


def test_constant_has_zero_derivative():
    f = general(lambda x: np.full(x.shape[:-1], 3.0), SupportBox((-1,) * 3, (1,) * 3))
    x = RNG.normal(size=(10, 3))
    assert np.max(np.abs(radial_derivative(f, x, 1, DEFAULT_FD, ANISO))) < 1e-10
    assert np.max(np.abs(euler_apply(f, x, ANISO))) < 1e-10


def test_errors():
    f = separable(make_bump(0.5, 1.5), Constant(1.0), ANISO)
    with pytest.raises(ValueError):
        radial_derivative(f, np.zeros(3), 1)
    with pytest.raises(CapabilityError):
        radial_derivative(f, np.ones(3), 7, ANALYTIC)
    with pytest.raises(CapabilityError):
        radial_derivative(BUMP_G, np.ones(3), 1, ANALYTIC, ANISO)
    with pytest.raises(ValueError):
        radial_derivative(f, np.ones(3), 0)


def test_general_bump_against_polynomial_fit():
    x = np.array([0.45, -0.1, 0.3])
    r = float(ANISO(x))
    s = r * (1 + np.linspace(-0.03, 0.03, 13))
    phi = offcentre_bump(G.dilate(s / r, np.tile(x, (13, 1))))
    coef = np.polyfit(s - r, phi, 6)
    oracle = coef[-2]
    a = float(radial_derivative(BUMP_G, x, 1, RadialMethod(h=1e-3), ANISO))
    b = float(radial_derivative(BUMP_G, x, 1, RadialMethod(h=1e-4), ANISO))
    assert abs(a - b) < 1e-8 * max(1.0, abs(a))
    assert a == pytest.approx(oracle, rel=1e-6)


def test_euler_on_radial_bump_matches_1d_oracle():
    g = make_bump(0.5, 1.5)
    f = separable(g, Constant(1.0), KOR)
    r0 = 0.8
    x = G.dilate(r0, np.array([[0.9, 0.0, 0.0]]) / float(KOR(np.array([0.9, 0.0, 0.0]))))
    h = 1e-5
    oracle = r0 * (g(r0 + h) - g(r0 - h)) / (2 * h)
    assert float(euler_apply(f, x)[0]) == pytest.approx(float(oracle), rel=1e-6)


def _fd_errors(f, order, hs):
    x = G.dilate(0.8, np.array([[0.6, 0.3, 0.5]]) / float(ANISO(np.array([0.6, 0.3, 0.5]))))
    exact = float(radial_derivative(f, x, 1, ANALYTIC)[0])
    return [abs(float(radial_derivative(f, x, 1, RadialMethod("fd", h, order, False))[0])
                - exact) for h in hs]


STEP_GRID = [1e-2, 5e-3, 2.5e-3]
BUMP_F = separable(make_bump(0.5, 1.5), CoordinateTrace(0, 2), ANISO)
POWER_F = separable(PowerProfile(-1.5), CoordinateTrace(0, 2), ANISO)


@pytest.mark.parametrize("f,order,hs", [
    (BUMP_F, 2, STEP_GRID),
    (BUMP_F, 4, STEP_GRID),
    (POWER_F, 2, STEP_GRID),
    (POWER_F, 4, STEP_GRID),
    # sixth order reaches rounding level on the standard grid, so double the steps twice
    (POWER_F, 6, [4e-2, 2e-2, 1e-2]),
])
def test_fd_convergence_order(f, order, hs):
    err = _fd_errors(f, order, hs)
    slope = np.polyfit(np.log(hs), np.log(err), 1)[0]
    assert abs(slope - order) <= 0.2


def test_euler_is_gauge_independent():
    x = RNG.uniform(-0.5, 0.8, size=(50, 3))
    e1 = euler_apply(BUMP_G, x, ANISO)
    e2 = euler_apply(BUMP_G, x, KOR)
    assert np.max(np.abs(e1 - e2)) < 1e-10
    # the radial derivative itself carries the ratio of gauges
    r1 = radial_derivative(BUMP_G, x, 1, DEFAULT_FD, ANISO) * ANISO(x)
    r2 = radial_derivative(BUMP_G, x, 1, DEFAULT_FD, KOR) * KOR(x)
    assert np.max(np.abs(r1 - r2)) < 1e-10


HOMOGENEOUS = [
    (lambda x: x[..., 0] ** 2 + 3 * x[..., 2], 2.0),
    (lambda x: x[..., 0] * x[..., 1] * x[..., 2], 4.0),
    (lambda x: KOR(x) ** -1.5 * (1 + x[..., 0] / KOR(x)), -1.5),
]


@pytest.mark.parametrize("func,nu", HOMOGENEOUS)
def test_euler_detects_homogeneous_functions(func, nu):
    f = general(func, SupportBox((-1,) * 3, (1,) * 3))
    x = RNG.uniform(0.2, 1.0, size=(40, 3))
    lam = RNG.uniform(0.3, 3.0, size=40)
    assert check_homogeneity(f, nu, zip(x, lam), G) < 1e-12
    e = euler_apply(f, x, ANISO)
    fx = f(x)
    assert np.max(np.abs(e - nu * fx)) / np.max(np.abs(fx)) < 1e-10


@pytest.mark.parametrize("nu", [-2.0, 0.0, 1.0, 3.0])
def test_euler_rejects_bumps_as_homogeneous(nu):
    f = separable(make_bump(0.5, 1.5), CoordinateTrace(0, 1), ANISO)
    y = RNG.normal(size=(30, 3))
    y = G.dilate(1.0 / ANISO(y), y)
    x = G.dilate(RNG.uniform(0.6, 1.4, 30), y)
    fx = f(x)
    gap = np.max(np.abs(euler_apply(f, x) - nu * fx)) / np.max(np.abs(fx))
    assert gap > 0.1
    assert check_homogeneity(f, nu, [(xi, 1.3) for xi in x], G) > 0.1


def test_check_homogeneity_guards():
    zero = general(lambda x: np.zeros(x.shape[:-1]), SupportBox((-1,) * 3, (1,) * 3))
    assert check_homogeneity(zero, 1.0, [(np.ones(3), 2.0)], G) == 0.0
    with pytest.raises(ValueError):
        check_homogeneity(zero, 1.0, [], G)
    with pytest.raises(ValueError):
        check_homogeneity(zero, 1.0, [(np.ones(3), -1.0)], G)


def test_commutation():
    f = separable(make_bump(0.5, 1.5), CoordinateTrace(0, 2), ANISO)
    x = G.dilate(RNG.uniform(0.6, 1.4, 20), RNG.normal(size=(20, 3)) * 0.3)
    x = x[(ANISO(x) > 0.55) & (ANISO(x) < 1.45)]
    assert np.max(commutation_residual(f, 0.0, x)) == 0.0
    assert np.max(commutation_residual(f, 1.0, x, method=ANALYTIC)) < 1e-12
    assert np.max(commutation_residual(f, (G.Q - 2) / 2, x, method=DEFAULT_FD)) < 1e-6


@given(seed=st.integers(0, 10**6))
def test_orbit_characterisation(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-0.8, 0.8, size=3)
    if float(ANISO(x)) < 0.1:
        return
    h = 1e-4
    fd = (offcentre_bump(G.dilate(1 + h, x)) - offcentre_bump(G.dilate(1 - h, x))) / (2 * h)
    rhs = float(ANISO(x)) * float(radial_derivative(BUMP_G, x, 1, DEFAULT_FD, ANISO))
    assert float(fd) == pytest.approx(rhs, abs=1e-6)


@given(seed=st.integers(0, 10**6), nu=st.floats(-3, 3))
def test_radial_derivative_lowers_degree(seed, nu):
    f = separable(PowerProfile(nu), CoordinateTrace(1, 2), KOR)
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.1, 1.0, size=(5, 3))
    rf = general(lambda z: radial_derivative(f, z, 1, ANALYTIC), SupportBox((-1,) * 3, (1,) * 3))
    assert check_homogeneity(rf, nu - 1, [(xi, 1.7) for xi in x], G) < 1e-10


def test_jet_shapes_and_consistency():
    f = separable(make_bump(0.5, 1.5), CoordinateTrace(2, 1), KOR)
    x = G.dilate(np.linspace(0.7, 1.3, 7), RNG.normal(size=(7, 3)))
    x = G.dilate(1.0 / KOR(x), x)
    x = G.dilate(np.linspace(0.7, 1.3, 7), x)
    ja = radial_jet(f, x, 3, ANALYTIC)
    jf = radial_jet(f, x, 3, DEFAULT_FD)
    assert ja.shape == (4, 7)
    assert np.allclose(ja, jf, atol=1e-6 * np.max(np.abs(ja)))
