import numpy as np
import pytest
from scipy import integrate
from scipy.special import exp1, j1

from mcsdiss import statics
from mcsdiss.errors import RegimeError
from mcsdiss.spectral import ModelParams


def two(d=1.0, kappa=0.1, e=1.0, sigma=0.5, angle=0.3, omegas=(1.0, 1.3)):
    return ModelParams(omegas=omegas, e=e, kappa=kappa, sigma=sigma,
                       positions=((0.2, -0.1), (0.2 + d * np.cos(angle), -0.1 + d * np.sin(angle))))


def single(e=0.01, kappa=0.1, sigma=0.5, w=1.0):
    return ModelParams(m=1.0, omegas=(w,), e=e, kappa=kappa, sigma=sigma, positions=((0.0, 0.0),))


def shift(p):
    x = 2 * p.sigma * p.kappa**2
    return p.e**2 * p.kappa**2 / (8 * np.pi) * exp1(x) * np.exp(x)


def test_quadratic_diagonal_limit():
    p = two()
    V = statics.quadratic_potential(p, 1, 1)
    np.testing.assert_allclose(V, (1.3**2 + 1 / (16 * np.pi * 0.5)) * np.eye(2), rtol=1e-14)


def test_quadratic_closed_vs_quadrature():
    p = two(d=1.0, kappa=0.0)
    a = statics.quadratic_potential(p, 0, 1)
    b = statics.quadratic_potential_quad(p, 0, 1)
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(b))


def test_quadratic_kappa_independent():
    a = statics.quadratic_potential(two(kappa=0.0), 0, 1)
    b = statics.quadratic_potential(two(kappa=1.0), 0, 1)
    assert np.array_equal(a, b)


@pytest.mark.parametrize("d", [0.05, 0.6, 2.0, 7.0])
def test_quadratic_transpose_symmetry(d):
    p = two(d=d, angle=1.1)
    np.testing.assert_array_equal(statics.quadratic_potential(p, 0, 1),
                                  statics.quadratic_potential(p, 1, 0).T)


def test_linear_potential_single_kappa_zero():
    np.testing.assert_array_equal(statics.linear_potential(single(kappa=0.0), 0), np.zeros(2))


def _cs_term(p):
    return statics.linear_potential(p, 0) - 2 * statics.coulomb_gradient(p, 0, 1)


def test_linear_cs_term_vanishes_linearly():
    r = [np.linalg.norm(_cs_term(two(d=d, e=1.0, kappa=0.5))) / d for d in (1e-2, 1e-3, 1e-4)]
    assert r[2] == pytest.approx(r[1], rel=1e-3)
    assert np.linalg.norm(_cs_term(two(d=1e-6, kappa=0.5))) < 1e-5


def test_linear_cs_term_value():
    p = two(d=1.0, e=1.0, kappa=0.1, sigma=0.5, angle=0.0)
    ref, _ = integrate.quad(lambda k: np.exp(-k * k) * j1(k) / (k * k + 0.01), 0, 40, limit=400)
    expected = -1.0 * 0.01 / (2 * np.pi) * ref
    # axis 1 points from particle 1 towards particle 0
    np.testing.assert_allclose(_cs_term(p), [-expected, 0.0], atol=1e-12, rtol=1e-9)


def test_coulomb_gradient_vs_area_oracle():
    # field of a Gaussian charge (variance 4 sigma per axis) by 2D quadrature,
    # polar coordinates around the field point remove the 1/|r| singularity
    sigma, e = 0.5, 1.0
    p = two(d=1.0, e=e, sigma=sigma, angle=0.7)
    r = np.array(p.positions[0]) - np.array(p.positions[1])
    var = 4 * sigma

    def comp(c):
        f = lambda s, th: (np.exp(-np.sum((r + s * np.array([np.cos(th), np.sin(th)]))**2) / (2 * var))
                           / (2 * np.pi * var) * -np.array([np.cos(th), np.sin(th)])[c])
        return integrate.dblquad(f, 0, 2 * np.pi, 0, 30, epsabs=1e-13, epsrel=1e-11)[0]

    field = np.array([comp(0), comp(1)])
    np.testing.assert_allclose(statics.coulomb_gradient(p, 0, 1), -(e**2 / (4 * np.pi)) * field,
                               rtol=1e-8, atol=1e-13)


def test_coincident_particles_flagged():
    p = ModelParams(omegas=(1.0, 1.0), positions=((0, 0), (0, 0)))
    v, flags = statics.linear_potential(p, 0, return_flags=True)
    assert flags and np.all(v == 0)


def test_backreaction_kappa_zero():
    sigma, e = 0.5, 1.0
    for d in (0.3, 1.0, 3.0):
        p = two(d=d, kappa=0.0, angle=0.0, sigma=sigma, e=e)
        z = d * d / (8 * sigma)
        L = -np.expm1(-z) / d**2
        expected = e**2 / (2 * np.pi) * np.diag([L, np.exp(-z) / (4 * sigma) - L])
        np.testing.assert_allclose(statics.backreaction_quadratic(p, 0, 1), expected, rtol=1e-10, atol=1e-15)


@pytest.mark.xfail(strict=True, reason="delta-2-2-only kappa=0 form drops the J1 contribution")
def test_backreaction_kappa_zero_delta22_only():
    p = two(d=1.0, kappa=0.0, angle=0.0)
    expected = np.diag([0.0, 1 / (8 * np.pi * 0.5) * np.exp(-1 / 4)])
    np.testing.assert_allclose(statics.backreaction_quadratic(p, 0, 1), expected, atol=1e-10)


def test_backreaction_coincident_diagonal():
    p = single(e=1.0, kappa=0.7)
    VB = statics.quadratic_potential(p, 0, 0) - statics.backreaction_quadratic(p, 0, 0)
    np.testing.assert_allclose(VB, (1.0 - shift(p)) * np.eye(2), rtol=1e-10)


def test_backreaction_closed_vs_quadrature():
    p = two(d=1.0, e=1.0, kappa=0.5, sigma=0.5, angle=0.4)
    a = statics.backreaction_quadratic(p, 0, 1)
    b = statics.backreaction_quadratic_quad(p, 0, 1)
    assert np.max(np.abs(a - b)) <= 1e-8 * np.max(np.abs(b))


def test_backreaction_even_in_kappa():
    a = statics.backreaction_quadratic(two(kappa=0.4), 0, 1)
    b = statics.backreaction_quadratic(two(kappa=-0.4), 0, 1)
    assert np.isrealobj(a)
    np.testing.assert_allclose(a, b, rtol=1e-14)


def test_positivity_weak_coupling():
    rep = statics.positivity_check(single())
    assert rep.passes and rep.subsidiary_ok
    assert rep.radius_R >= 0
    assert "passes = True" in rep.to_text()


def test_positivity_crossing():
    p0 = single(e=1.0, kappa=0.1)
    e_star = np.sqrt(1.0 / shift(p0))
    assert statics.positivity_check(single(e=0.999 * e_star, kappa=0.1)).passes
    assert not statics.positivity_check(single(e=1.001 * e_star, kappa=0.1)).passes


def test_positivity_strong_kappa_threshold():
    # sigma kappa^2 = 100: threshold m sigma w^2 / e^2 = 1/(16 pi)
    sigma, kappa = 0.5, np.sqrt(200.0)
    e_star = np.sqrt(1.0 / shift(single(e=1.0, kappa=kappa, sigma=sigma)))
    ratio = sigma / e_star**2
    assert ratio == pytest.approx(1 / (16 * np.pi), rel=0.05)
    assert statics.positivity_check(single(e=0.97 * e_star, kappa=kappa, sigma=sigma)).passes
    assert not statics.positivity_check(single(e=1.03 * e_star, kappa=kappa, sigma=sigma)).passes


def test_positivity_monotone_in_e():
    es = np.linspace(0.5, 20, 25)
    res = [statics.positivity_check(two(d=0.4, e=e, kappa=0.8)).passes for e in es]
    first_fail = res.index(False) if False in res else len(res)
    assert not any(res[first_fail:])

