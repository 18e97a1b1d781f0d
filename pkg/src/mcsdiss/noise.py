"""Fluctuating-force statistics.

Stationary thermal part (anticommutator/2 convention):
    N(tau) = (1/pi) int coth(beta w/2) [Re J cos(w tau) + Im J sin(w tau)] dw

plus the preparation-dependent (non-stochastic) part Upsilon + Xi built
from the spectral functions G~ and F~, which decays at long times.
"""
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from . import quad
from .errors import DomainError, GapError
from .kernel import _lower, _spectrum_fn, imag_self_energy
from .spectral import _check_pair

__all__ = [
    "NoiseCorrelator",
    "NonStochasticSpectral",
    "coth_half",
    "thermal_noise_corr",
    "thermal_noise_grid",
    "thermal_noise_zero_T_closed",
    "nonstochastic_spectral",
    "nonstochastic_fluctuations",
    "fdt_check",
]


@dataclass
class NoiseCorrelator:
    tau: float
    beta: float
    entries: np.ndarray
    pair: tuple


@dataclass
class NonStochasticSpectral:
    omega: float
    omega_prime: float
    t0: float
    entries_G: np.ndarray
    entries_F: np.ndarray


def coth_half(beta, w):
    """coth(beta w / 2) = 1 + 2 n(w); sign(w) at zero temperature.

    Near w = 0 the Laurent form 2/(beta w) + beta w/6 avoids 0/0.
    """
    w = np.asarray(w, float)
    if np.isinf(beta):
        return np.sign(w)
    x = 0.5 * beta * w
    with np.errstate(divide="ignore", invalid="ignore"):
        big = 1.0 / np.tanh(x)
        small = 1.0 / x + x / 3.0 - x**3 / 45.0
    return np.where(np.abs(x) < 1e-4, small, big)


def thermal_noise_grid(p, i, j, taus, beta=None, spectrum="exact", spec=quad.DEFAULT_SPEC):
    """Stationary noise correlator on a grid of lags; shape (len, 2, 2)."""
    _check_pair(p, i, j)
    beta = p.beta if beta is None else beta
    taus = np.atleast_1d(np.asarray(taus, float))
    J = _spectrum_fn(p, i, j, spectrum)
    lo = _lower(p, spectrum)
    if lo == 0 and not np.isinf(beta):
        raise DomainError("finite-temperature noise needs a gapped spectrum (coth pole at 0)")

    def f(w):
        Jw = J(w) * coth_half(beta, w)[..., None, None] if np.ndim(w) else J(w) * coth_half(beta, w)
        c = np.cos(w * taus)[:, None, None]
        s = np.sin(w * taus)[:, None, None]
        return (Jw.real * c + Jw.imag * s).ravel()

    tmax = np.max(np.abs(taus))
    cutoff = lo + spec.upper_cutoff_multiplier * p.width
    nodes = np.arange(lo + np.pi / tmax, cutoff, np.pi / tmax) if tmax > 0 else None
    # the coth factor is sharply peaked just above a small gap
    if lo > 0 and not np.isinf(beta):
        extra = lo + np.geomspace(1e-6, 1.0, 13) * min(1.0, cutoff - lo)
        nodes = extra if nodes is None else np.concatenate([nodes, extra])
    val, _ = quad.integrate_interval(f, lo, cutoff, spec, nodes)
    return val.reshape(len(taus), 2, 2) / np.pi


def thermal_noise_corr(p, i, j, tau, beta=None, spectrum="exact", spec=quad.DEFAULT_SPEC):
    beta = p.beta if beta is None else beta
    ent = thermal_noise_grid(p, i, j, [tau], beta, spectrum, spec)[0]
    return NoiseCorrelator(float(tau), beta, ent, (i, j))


def thermal_noise_zero_T_closed(p, i, j, t):
    """Zero-temperature closed form of the noise correlator; shape t.shape+(2,2)."""
    _check_pair(p, i, j)
    t = np.asarray(t, float)
    x = np.abs(t) / np.sqrt(8 * p.sigma)
    sgn = np.sign(t)
    D = p.distance(i, j) ** 2
    s = p.sigma
    k2 = p.kappa ** 2
    g = 1 + 2 * k2 * s
    pre = p.e ** 2 * np.exp(-x * x) / (2 * np.sqrt(2 * np.pi * (16 * s) ** 5))
    x2 = x * x
    n11 = pre * (-3 * D + 32 * s - 14 * D * k2 * s + 192 * k2 * s * s
                 + (12 * D - 64 * s + 40 * D * k2 * s - 128 * k2 * s * s) * x2
                 - 4 * D * g * x2 * x2)
    n22 = pre * (-9 * D + 32 * s - 10 * D * k2 * s + 192 * k2 * s * s
                 + (36 * D - 64 * s + 56 * D * k2 * s - 128 * k2 * s * s) * x2
                 - 12 * D * g * x2 * x2)
    n12 = (p.e ** 2 * p.kappa / (256 * np.sqrt(np.pi) * s * s)
           * sgn * x * np.exp(-x2) * (16 * s + D * (2 * x2 - 3)))
    out = np.zeros(t.shape + (2, 2))
    out[..., 0, 0] = n11
    out[..., 1, 1] = n22
    out[..., 0, 1] = n12
    out[..., 1, 0] = -n12
    return out


def fdt_check(p, i, j, omega_grid, beta=None, spectrum="exact"):
    """Max deviation of <{xi, xi+}>/(2 I) from coth(beta w/2) on a grid.

    The symmetrized force spectrum is assembled mode by mode: each bath
    mode at |w| carries (n(|w|) + 1/2) quanta, with n from the Bose
    occupation, and couples through J (conj(J) for w > 0).  The
    dissipative part I comes from the kernel module.
    """
    beta = p.beta if beta is None else beta
    w = np.atleast_1d(np.asarray(omega_grid, float))
    aw = np.abs(w)
    Jw = _spectrum_fn(p, i, j, spectrum)(aw)
    with np.errstate(over="ignore"):
        n_occ = np.zeros_like(aw) if np.isinf(beta) else 1.0 / np.expm1(beta * aw)
    pos = (w > 0)[:, None, None]
    sym = (1 + 2 * n_occ)[:, None, None] * np.where(pos, np.conj(Jw), Jw) / (2 * np.pi)
    I = imag_self_energy(p, i, j, w, spectrum)
    mask = np.abs(I) > 1e-300
    ratio = sym / np.where(mask, I, 1.0)
    dev = np.abs(ratio - coth_half(beta, w)[:, None, None]) / np.maximum(1.0, np.abs(coth_half(beta, w)))[:, None, None]
    return float(np.max(np.where(mask, dev, 0.0))) if np.any(mask) else 0.0


# non-stochastic spectral functions -------------------------------------

def _j1o(z):
    return np.where(np.abs(z) > 1e-8, sc.j1(z) / np.where(z == 0, 1, z), 0.5)


def _j2o(z):
    # J2(z)/z
    return np.where(np.abs(z) > 1e-6, sc.jv(2, z) / np.where(z == 0, 1, z), z / 8.0)


def _uz(xc, y, z):
    """u(xc z, y, z)/z = xc J1(z) + y J2(z)/z."""
    return xc * sc.j1(z) + y * _j2o(z)


def _R(k, kp, c, d, w, wp, kappa):
    """Matrix R(a=k, b=k', c, d); frequencies enter through w, w'.

    The 1/(a c b d) prefactor is absorbed into u(x z, y, z)/z.
    """
    s = np.sign(kappa)
    kk = abs(kappa)
    zc, zd = k * c, kp * d
    R = np.zeros(np.broadcast(k, kp, c, d).shape + (2, 2), dtype=complex)
    y11 = 2 * s * w - 2 * kappa
    y12 = -2 * s * w - 2 * kappa
    R[..., 0, 0] = _uz(kappa, y11, zc) * _uz(kappa, y11, zd)
    R[..., 0, 1] = 1j * _uz(-kappa, y12, zc) * _uz(-wp, -kk + 2 * wp, zd)
    R[..., 1, 0] = 1j * _uz(wp, -kk - 2 * wp, zc) * _uz(kappa * kp, y12, zd)
    R[..., 1, 1] = _uz(w, kk - 2 * w, zc) * _uz(wp, kk - 2 * wp, zd)
    return R


def _T(k, kp, a, b, w, wp, kappa):
    """Matrix T(k, k', a, b) transcribed term by term.

    Factors 1/a and 1/b are absorbed into J(z)/z so that a, b -> 0 is
    finite.
    """
    s = np.sign(kappa)
    kk = abs(kappa)
    za, zb = a * k, b * kp
    J1a, J1b = sc.j1(za), sc.j1(zb)
    J2a_a = k * _j2o(za)          # J2(ak)/a
    J2b_b = kp * _j2o(zb)         # J2(bk')/b
    pref = 4 * np.pi**2 / (k * kp * w * wp)
    T = np.zeros(np.broadcast(k, kp, a, b).shape + (2, 2), dtype=complex)
    T[..., 0, 0] = pref * (
        k * kappa * J1a * (-kp * kappa * J1b + 2 * (kappa - s * wp) * J2b_b)
        + 2 * J2a_a * (kp * kappa * (kappa - s * w) * J1b
                       + 2 * (kk * (wp + w) + w * wp - kappa**2) * J2b_b))
    T[..., 0, 1] = -1j * pref * (
        a * k * k * kappa * J1a * (kp * wp * J1b - 2 * (wp - kk) * J2b_b)
        + 2 * k * sc.jv(2, za) * (kp * wp * (kappa + s * w) * J1b
                               + 2 * ((wp + w) * kappa + kappa**2 + s * w * wp) * J2b_b))
    T[..., 1, 0] = -1j * pref * (
        a * k * k * w * J1a * (kp**2 * kappa * J1b - 2 * (kappa + s * wp) * J2b_b)
        - 2 * k * sc.jv(2, za) * (kp * kappa * (kappa + s * w) * J1b
                                  - 2 * (kappa * (wp + w) - kappa**2 + s * w * wp) * J2b_b))
    T[..., 1, 1] = pref * (
        -k * w * J1a * (kp * wp * kappa * J1b + 2 * (wp + kk * kp) * J2b_b)
        + 2 * J2a_a * (kp * wp * kappa * (2 * w + kk * k) * J1b
                       - 2 * (kappa**2 + kk * (wp + w) - w * wp) * J2b_b))
    return T


def _pair_sums(p, i, j):
    q = np.asarray(p.positions)
    c = np.hypot(*(q[i] + q).T)
    d = np.hypot(*(q[j] + q).T)
    return c, d


def _GF(p, i, j, w, wp, t0):
    kap = p.kappa
    k = np.sqrt(np.maximum(w * w - kap * kap, 0.0))
    kp = np.sqrt(np.maximum(wp * wp - kap * kap, 0.0))
    c, d = _pair_sums(p, i, j)
    # sum over (l, m) of R and T
    Rs = 0.0
    Ts = 0.0
    for cl in c:
        for dm in d:
            Rs = Rs + _R(k, kp, cl, dm, w, wp, kap)
            Ts = Ts + _T(k, kp, cl, dm, w, wp, kap)
    env = p.e**4 * kap**2 / (16 * w * wp) * np.exp(-2 * p.sigma * (w * w + wp * wp - 2 * kap * kap))
    G = (env * np.exp(1j * (w - wp) * t0))[..., None, None] * Rs
    F = -(env * np.exp(1j * (w + wp) * t0))[..., None, None] * Ts
    return G, F


def nonstochastic_spectral(p, i, j, omega, omega_prime, t0=0.0):
    """G~ and F~ at (w, w'), both >= |kappa|."""
    _check_pair(p, i, j)
    if omega < abs(p.kappa) or omega_prime < abs(p.kappa):
        raise GapError("non-stochastic spectral functions live above the gap")
    G, F = _GF(p, i, j, np.float64(omega), np.float64(omega_prime), t0)
    return NonStochasticSpectral(float(omega), float(omega_prime), t0, G, F)


CHUNK = 64


def _gl_panels(lo, hi, width, order, refine=None):
    npan = max(1, int(np.ceil((hi - lo) / width)))
    edges = np.linspace(lo, hi, npan + 1)
    if refine:
        # geometric panels resolve features of size ~refine next to lo
        first = edges[1]
        geo = lo + np.geomspace(refine * 1e-3, min(10 * refine, first - lo), 13)
        edges = np.unique(np.concatenate([edges, geo[geo < first]]))
    x, wt = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * wt[None, :]).ravel()
    return nodes, weights


def nonstochastic_fluctuations(p, i, j, t, t_prime, t0=0.0, order=12, return_info=False):
    """Upsilon + Xi at real times t, t' >= t0 as a 2x2 real matrix.

    The double frequency integral is done as nested 1D Gauss-Legendre
    passes over panels no wider than a half period of the fastest
    oscillation.  The estimate is repeated at 1.5x order; the difference
    is the error estimate.  ``info['imag_residue']`` is the imaginary
    part left after adding each quadrant to its conjugate partner.
    """
    _check_pair(p, i, j)
    if t < t0 or t_prime < t0:
        raise DomainError("times must not precede the preparation time t0")

    def run(order):
        # integrate in k = sqrt(w^2 - kappa^2): removes the branch point at the gap
        tm = max(abs(t), abs(t_prime), 1e-12)
        width = min(np.pi / tm, p.width / 2)
        kn, kw = _gl_panels(0.0, 8.0 * p.width, width, order,
                            refine=abs(p.kappa) or None)
        wn = np.sqrt(kn * kn + p.kappa ** 2)
        ww = kw * kn / wn
        qG = np.zeros((2, 2), dtype=complex)
        qF = np.zeros((2, 2), dtype=complex)
        Wp = wn[None, :]
        eGp = np.exp(1j * Wp * t_prime)
        eFp = np.exp(-1j * Wp * t_prime)
        # row blocks keep the (w, w') arrays small; Bessel factors stay 1D
        for r0 in range(0, len(wn), CHUNK):
            W = wn[r0:r0 + CHUNK, None]
            G, F = _GF(p, i, j, W, Wp, t0)
            wts = (ww[r0:r0 + CHUNK, None] * ww[None, :])
            e = np.exp(-1j * W * t) * wts
            qG += np.einsum("ab,abij->ij", e * eGp, G)
            qF += np.einsum("ab,abij->ij", e * eFp, F)
        ups = qG + np.conj(qG)
        xi = qF + np.conj(qF)
        tot = 4.0 / np.pi**2 * 0.5 * (ups + xi)
        return tot

    a = run(order)
    b = run(int(1.5 * order))
    info = {"error": float(np.max(np.abs(a - b))), "imag_residue": float(np.max(np.abs(b.imag)))}
    out = b.real
    return (out, info) if return_info else out
