import warnings

import numpy as np
import pytest

from mcsdiss import greens as G
from mcsdiss.errors import RegimeError
from mcsdiss.kernel import self_energy_freq
from mcsdiss.noise import coth_half
from mcsdiss.spectral import ModelParams, spectral_density_bw


def single(w=1.0, e=1.0, kappa=0.01, sigma=0.5, beta=np.inf):
    return ModelParams(omegas=(w,), e=e, kappa=kappa, sigma=sigma, positions=((0.0, 0.0),), beta=beta)


def pair(e=0.7, kappa=0.2, d=0.5):
    return ModelParams(omegas=(1.0, 1.4), e=e, kappa=kappa, sigma=0.5,
                       positions=((0.0, 0.0), (d * 0.6, d * 0.8)))


def test_negative_frequency_conjugate():
    p = pair()
    for w in (0.3, 1.1, 2.5):
        np.testing.assert_allclose(G.retarded_green_freq(p, -w), np.conj(G.retarded_green_freq(p, w)),
                                   rtol=1e-12, atol=1e-14)


def test_decoupled_limit():
    p = ModelParams(omegas=(1.0, 1.4), e=0.0, kappa=0.2, positions=((0, 0), (1, 0)))
    for w in (0.4, 1.2, 3.0):
        g = G.retarded_green_freq(p, w)
        expected = np.diag(np.repeat(1 / (p.m * (np.array(p.omegas) ** 2 - w * w)), 2))
        np.testing.assert_allclose(g, expected, rtol=1e-14, atol=1e-15)


def test_pole_warning():
    p = ModelParams(omegas=(1.0,), e=0.0, kappa=0.2)
    with pytest.warns(G.PoleWarning):
        G.retarded_green_grid(p, [1.0])


def test_linear_solve_oracle():
    p = single(w=1.0, e=1.0, kappa=0.01)
    w = 1.5 * p.kappa
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", G.PoleWarning)
        g = G.retarded_green_freq(p, w)
    S = self_energy_freq(p, 0, 0, w)
    A = -p.m * w * w * np.eye(2) + G.potential_matrix(p) - S
    np.testing.assert_allclose(g, np.linalg.solve(A, np.eye(2)), rtol=1e-10)
    np.testing.assert_allclose(g @ A, np.eye(2), atol=1e-10)


def test_large_frequency_decay():
    p = pair()
    w1, w2 = 10 / p.width, 20 / p.width
    r = np.abs(G.retarded_green_freq(p, w1)[0, 0]) / np.abs(G.retarded_green_freq(p, w2)[0, 0])
    assert r == pytest.approx(4.0, rel=1e-2)


def test_stationarity_weak_coupling_passes():
    res = G.stationarity_check(single(w=2.0, e=0.1, kappa=1.0))
    assert res.passes and res.status == "stationary"
    assert res.roots and all(r > 1.0 for r in res.roots)


def test_stationarity_bound_mode_fails():
    res = G.stationarity_check(single(w=0.005, e=0.01, kappa=0.01))
    assert not res.passes and res.status == "bound_mode"
    assert min(res.roots) < 0.01
    assert "passes = False" in res.to_text()


def test_stationarity_decoupled():
    assert G.stationarity_check(single(w=1.0, e=0.0, kappa=0.1)).passes
    assert not G.stationarity_check(single(w=0.05, e=0.0, kappa=0.1)).passes


def test_correlator_identities():
    p = pair()
    w = np.array([-1.7, -0.4, 0.3, 0.9, 2.2])
    for beta in (0.5, 3.0):
        lam, delta = G.stationary_correlators(p, w, beta)
        ratio = -0.5j * coth_half(beta, w)[:, None, None]
        np.testing.assert_allclose(delta, ratio * lam, rtol=1e-12, atol=0)
        # 2i G I G^+ with Hermitian I is anti-Hermitian
        np.testing.assert_allclose(np.conj(np.swapaxes(lam, 1, 2)), -lam, atol=1e-14)


def test_kms_time_domain():
    p = single(w=1.0, e=2.0, kappa=0.001)
    assert G.kms_time_check(p, [0.0, 1.0, 3.0], beta=2.0, n_omega=801) <= 1e-3
    with pytest.raises(ValueError):
        G.kms_time_check(p, [0.0], beta=np.inf)


def test_bw_decoupled_limit():
    p = ModelParams(omegas=(1.0, 1.4), e=0.0, kappa=0.2, positions=((0, 0), (1, 0)))
    bw = G.breit_wigner_reduce(p)
    np.testing.assert_allclose(np.diag(bw.Omega), np.repeat(p.omegas, 2), rtol=1e-12)
    np.testing.assert_array_equal(bw.Gamma, 0)
    np.testing.assert_allclose(bw.Z, 2 * np.pi, rtol=1e-12)


def test_bw_kappa_zero_no_rotation():
    p = single(w=1.0, e=1.0, kappa=0.0)
    bw = G.breit_wigner_reduce(p)
    assert bw.Omega_sq[0, 1] == pytest.approx(0, abs=1e-15)
    assert bw.Omega_sq[1, 0] == pytest.approx(0, abs=1e-15)
    assert bw.Gamma[0, 0] > 0 and bw.Gamma[0, 0] == pytest.approx(bw.Gamma[1, 1], rel=1e-12)


def test_bw_fig1_bath_regression():
    # single oscillator, Fig. 1 bath, bare frequency 5 kappa
    bw = G.breit_wigner_reduce(single(w=0.05, e=1.0, kappa=0.01))
    assert bw.Omega_sq[0, 0] == pytest.approx(3.53638525e-02, rel=1e-6)
    assert bw.Omega_sq[0, 1] == pytest.approx(-7.22312331e-05, rel=1e-5)
    assert bw.Gamma[0, 0] == pytest.approx(1.79342e-03, rel=1e-4)
    assert bw.Z[0, 0] == pytest.approx(6.22257139, rel=1e-6)
    # rotational entry exceeds the width: not Markovian by the literal test
    assert not bw.markov_valid


def test_bw_hermiticity_constraint():
    bw = G.breit_wigner_reduce(single(w=1.0, e=2.0, kappa=0.001))
    assert bw.Omega_sq[0, 1] == pytest.approx(-bw.Omega_sq[1, 0], rel=1e-12)
    assert np.all(np.diag(bw.Omega) > 0) and np.all(np.diag(bw.Gamma) > 0)


def test_bw_reproduces_green_near_pole():
    p = single(w=1.0, e=2.0, kappa=0.001)
    bw = G.breit_wigner_reduce(p)
    assert bw.markov_valid
    Om = np.sqrt(bw.Omega_sq[0, 0])
    g = G.retarded_green_freq(p, Om)
    gbw = np.linalg.inv(bw.inverse_green(Om))
    gam = bw.Gamma[0, 0] / Om
    assert np.abs(g[0, 0] - gbw[0, 0]) / np.abs(g[0, 0]) <= 10 * gam


def test_bw_rotational_identity():
    bw = G.breit_wigner_reduce(single(w=1.0, e=2.0, kappa=0.001))
    J = spectral_density_bw(bw, 0, 0, 0.7).entries
    assert J[0, 1] == pytest.approx(-1j * np.pi * bw.m * bw.Omega_sq[0, 1] / bw.Z[0, 1], rel=1e-14)


def test_bw_regime_error():
    # a bare frequency far below the dipole shift has no real pole
    with pytest.raises(RegimeError):
        G.breit_wigner_reduce(single(w=0.01, e=5.0, kappa=0.3), max_iter=5)


def test_bw_csv(tmp_path):
    bw = G.breit_wigner_reduce(single(w=1.0, e=2.0, kappa=0.001))
    bw.to_csv(tmp_path / "bw.csv")
    lines = (tmp_path / "bw.csv").read_text().splitlines()
    assert "i,alpha,j,beta,omega_sq,gamma,z" in lines
    assert len([ln for ln in lines if not ln.startswith("#")]) == 5
