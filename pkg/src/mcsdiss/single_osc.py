"""Markovian single oscillator: poles, response and position correlators.

The Breit-Wigner inverse response is

    chi^{-1}(w) = m [[a, c], [-c, a]],  a = Omega0^2 - w^2 - 2i Gamma0 w,

with c = sign(OmegaCS) OmegaCS^2 the rotational strength.  G(tau) =
(1/2pi) int chi(w) e^{-i w tau} dw is the causal response.  Symmetrized
correlators follow from the fluctuation-dissipation relation

    Delta(t) = (1/2pi) int coth(beta w/2) (chi - chi^+)/(2i) e^{-i w t} dw.

Writing chi in terms of the scalar responses g_pm = 1/(m(a +- i c)),
chi11 = (g_+ + g_-)/2 and chi12 = i(g_- - g_+)/2, the integral is closed
in the lower half plane: four oscillator poles plus the Matsubara poles
w = -i nu_n (and w = 0 for the cross-correlation).  At zero temperature
the integrals are evaluated directly as cosine/sine transforms.
"""
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = [
    "ConvergenceWarning",
    "RegimeWarning",
    "SOParams",
    "poles",
    "g_so",
    "response_freq",
    "autocorr",
    "crosscorr",
    "msd",
    "from_bw",
]


class ConvergenceWarning(RuntimeWarning):
    pass


class RegimeWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class SOParams:
    m: float = 1.0
    Omega0: float = 10.0
    Gamma0: float = 1.0
    OmegaCS: float = 0.5
    beta: float = np.inf

    def __post_init__(self):
        if not (self.m > 0 and self.Omega0 > 0 and self.Gamma0 > 0):
            raise DomainError("m, Omega0 and Gamma0 must be > 0")
        if not np.isfinite(self.OmegaCS):
            raise DomainError("OmegaCS must be finite")
        if not self.beta > 0:
            raise DomainError("beta must be > 0 (np.inf for zero temperature)")

    @property
    def c(self):
        """Signed rotational strength sign(OmegaCS) OmegaCS^2."""
        return np.sign(self.OmegaCS) * self.OmegaCS ** 2

    @property
    def decays(self):
        return self.OmegaCS ** 4 < 4 * self.Gamma0 ** 2 * self.Omega0 ** 2

    @property
    def markov_flags(self):
        return {"weak_damping": self.Gamma0 / self.Omega0 < 0.1,
                "weak_rotation": abs(self.OmegaCS) < self.Gamma0}

    def replace(self, **kw):
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return SOParams(**d)


def from_bw(bw, beta=np.inf, i=0):
    """SOParams from Breit-Wigner coefficients of oscillator i (isotropic average)."""
    d = slice(2 * i, 2 * i + 2)
    Om2 = np.mean(np.diag(bw.Omega_sq[d, d]))
    G0 = np.mean(np.diag(bw.Gamma[d, d]))
    w = 2 * np.pi * bw.Omega_sq[2 * i, 2 * i + 1] / bw.Z[2 * i, 2 * i + 1]
    return SOParams(bw.m, float(np.sqrt(Om2)), float(G0), float(np.sign(w) * np.sqrt(abs(w))), beta)


def poles(s):
    """lambda_pm = Gamma0 +- eta, eta = sqrt(Gamma0^2 - Omega0^2 + i c) (principal)."""
    eta = np.sqrt(complex(s.Gamma0 ** 2 - s.Omega0 ** 2, s.c))
    return s.Gamma0 + eta, s.Gamma0 - eta, bool(s.decays)


def _eta(s):
    return np.sqrt(complex(s.Gamma0 ** 2 - s.Omega0 ** 2, s.c))


def _sinhc(t, z):
    """sinh(t z)/z with the z -> 0 limit."""
    z = complex(z)
    if abs(z) * np.max(np.abs(t), initial=0) < 1e-8:
        return t * (1 + (t * z) ** 2 / 6)
    return np.sinh(t * z) / z


def g_so(s, tau):
    """Causal response [[f_+, -i f_-], [i f_-, f_+]](eta tau); shape (..., 2, 2)."""
    tau = np.asarray(tau, float)
    eta = _eta(s)
    tp = np.where(tau > 0, tau, 0.0)
    a = _sinhc(tp, np.conj(eta))
    b = _sinhc(tp, eta)
    pre = np.exp(-s.Gamma0 * tp) / (2 * s.m)
    fp = pre * (a + b)
    fm = pre * (a - b)
    out = np.empty(tau.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = out[..., 1, 1] = fp
    out[..., 0, 1] = -1j * fm
    out[..., 1, 0] = 1j * fm
    scale = np.max(np.abs(out), initial=1e-300)
    if np.max(np.abs(out.imag), initial=0) > 1e-10 * scale:
        raise ArithmeticError("g_so lost realness")
    out = out.real
    out[tau <= 0] = 0.0
    return out


def response_freq(s, omega):
    """chi(w) = [m [[a, c], [-c, a]]]^{-1}; shape (..., 2, 2)."""
    w = np.asarray(omega, complex)
    a = s.Omega0 ** 2 - w * w - 2j * s.Gamma0 * w
    det = s.m * (a * a + s.c ** 2)
    out = np.empty(w.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = out[..., 1, 1] = a / det
    out[..., 0, 1] = -s.c / det
    out[..., 1, 0] = s.c / det
    return out


# correlators ------------------------------------------------------------

def _chi11(s, w):
    a = s.Omega0 ** 2 - w * w - 2j * s.Gamma0 * w
    return a / (s.m * (a * a + s.c ** 2))


def _chi12(s, w):
    a = s.Omega0 ** 2 - w * w - 2j * s.Gamma0 * w
    return -s.c / (s.m * (a * a + s.c ** 2))


def _pole_part(s, t, fn, beta):
    """-1/2 sum over oscillator poles of coth(beta w/2) Res[chi_xy] e^{-i w t}."""
    eta = _eta(s)
    G, m = s.Gamma0, s.m
    total = 0j
    # g_- poles at -i(G +- eta), g_+ poles at -i(G +- conj(eta))
    for z, minus in ((eta, True), (np.conj(eta), False)):
        for sgn in (1, -1):
            wp = -1j * (G + sgn * z)
            res_g = -sgn * 1j / (2 * m * z)
            # chi11 = (g_+ + g_-)/2, chi12 = i (g_- - g_+)/2
            if fn == "11":
                res = 0.5 * res_g
            else:
                res = 0.5j * res_g if minus else -0.5j * res_g
            total += 1 / np.tanh(beta * wp / 2) * res * np.exp(-1j * wp * t)
    return -0.5 * total


def _matsubara_summand(s, t, beta, fn):
    def f(x):
        nu = 2 * np.pi * x / beta
        if fn == "11":
            v = _chi11(s, -1j * nu) - _chi11(s, 1j * nu)
        else:
            v = _chi12(s, -1j * nu) + _chi12(s, 1j * nu)
        return -0.5 * (2 / beta) * v.real * np.exp(-nu * t)
    return f


def _default_n(s, beta):
    return int(max(1000, 20 / (beta * min(s.Gamma0, s.Omega0))))


def _matsubara(s, t, beta, fn, n_matsubara, tol):
    f = _matsubara_summand(s, t, beta, fn)
    n = np.arange(1, n_matsubara + 1)
    head = float(np.sum(f(n)))
    x0 = n_matsubara + 0.5
    tail, _ = integrate.quad(f, x0, np.inf, epsabs=1e-16, epsrel=1e-12, limit=200)
    h = 1e-3 * x0
    err = abs((f(x0 + h) - f(x0 - h)) / (2 * h)) / 24
    if err > tol:
        warnings.warn(f"Matsubara truncation error bound {err:.3g} exceeds {tol:.3g}",
                      ConvergenceWarning)
    return head + tail, err


def _zero_t(s, t, fn):
    if fn == "11":
        f = lambda w: _chi11(s, w).imag
        kind = "cos"
    else:
        f = lambda w: -_chi12(s, w).real
        kind = "sin"
    scale = max(s.Omega0, s.Gamma0)
    if t == 0:
        val, err = integrate.quad(f, 0, np.inf, epsabs=1e-14, epsrel=1e-12, limit=500)
        return val / np.pi, err / np.pi
    # finite head through the resonance, QAWF beyond
    cut = 4 * scale
    g = (lambda w: f(w) * np.cos(w * t)) if kind == "cos" else (lambda w: f(w) * np.sin(w * t))
    h, eh = integrate.quad(g, 0, cut, epsabs=1e-14, epsrel=1e-12, limit=2000,
                           points=[s.Omega0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tl, et = integrate.quad(lambda w: f(w + cut), 0, np.inf, weight=kind, wvar=t,
                                epsabs=1e-14, limlst=200)
    # shift the oscillatory weight back to w + cut
    if kind == "cos":
        tl2, et2 = _shifted(f, cut, t, "sin")
        tail = np.cos(cut * t) * tl - np.sin(cut * t) * tl2
    else:
        tl2, et2 = _shifted(f, cut, t, "cos")
        tail = np.sin(cut * t) * tl2 + np.cos(cut * t) * tl
    return (h + tail) / np.pi, (eh + et + et2) / np.pi


def _shifted(f, cut, t, kind):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(lambda w: f(w + cut), 0, np.inf, weight=kind, wvar=t,
                              epsabs=1e-14, limlst=200)


def _literal(s, t, fn, n_matsubara):
    """The literal closed forms (pole terms S_0 + S_CS and Matsubara sums)."""
    G, O, m, b = s.Gamma0, s.Omega0, s.m, s.beta
    c2 = s.c ** 2
    lp, lm, _ = poles(s)
    mup, mum = 4 * G * G * O * O + c2, 4 * G * G * O * O - c2
    cp, cm = 1 / np.tanh(1j * b * lp / 2), 1 / np.tanh(1j * b * lm / 2)
    S0 = 1j * mup / (2 * m * mum * (lp - lm)) * (cm * np.exp(-lm * t) - cp * np.exp(-lp * t))
    Scs = 2 * G * abs(s.c) / (m * mum * (lp - lm)) * (lp * cm * np.exp(-lm * t) - lm * cp * np.exp(-lp * t))
    nu = 2 * np.pi * np.arange(1, n_matsubara + 1) / b
    den = ((nu ** 2 - lp ** 2) * (nu ** 2 - lm ** 2) * (nu ** 2 - np.conj(lp) ** 2)
           * (nu ** 2 - np.conj(lm) ** 2))
    if fn == "11":
        q = np.sum(np.exp(-nu * t) * ((nu ** 2 + O ** 2) ** 2 + 3 * c2 - 4 * G * G * nu ** 2) / den)
        return float((S0 + Scs).real + 4 * G / (m * b) * q.real)
    q = np.sum(np.exp(-nu * t) * ((nu ** 2 + O ** 2) ** 2 + c2 - 12 * G * G * nu ** 2) / den)

    def integrand(w):
        if w == 0:
            w = 1e-300
        d = ((w * w + lp ** 2) * (w * w + lm ** 2) * (w * w + np.conj(lp) ** 2)
             * (w * w + np.conj(lm) ** 2))
        return (((w * w - O * O) ** 2 + c2 + 12 * G * G * w * w) / (w * d)).real

    tail, _ = integrate.quad(integrand, 0, np.inf, weight="sin", wvar=t, limlst=200)
    return float((S0 + Scs).imag + 2 * abs(s.c) / (m * b) * q.real
                 + 2 * abs(s.c) / (np.pi * m * b) * tail)


def _correlator(s, t, fn, n_matsubara, tol, method, return_error):
    t = float(t)
    if method == "literal":
        if np.isinf(s.beta):
            raise DomainError("the literal closed forms need finite beta")
        val, err = _literal(s, t, fn, n_matsubara or _default_n(s, s.beta)), np.nan
    elif method != "residue":
        raise DomainError("method must be 'residue' or 'literal'")
    elif np.isinf(s.beta):
        val, err = _zero_t(s, t, fn)
    else:
        n = n_matsubara or _default_n(s, s.beta)
        if n < 1:
            raise DomainError("n_matsubara must be >= 1")
        pole = _pole_part(s, t, fn, s.beta)
        mats, err = _matsubara(s, t, s.beta, fn, n, tol)
        val = pole.real + mats
        if fn == "12":
            # half residue of the coth pole at w = 0
            val += -0.5 * (2 / s.beta) * _chi12(s, 0.0).real
    return (float(val), float(err)) if return_error else float(val)


def autocorr(s, t, n_matsubara=None, tol=1e-10, method="residue", return_error=False):
    """Delta^{11}(t) = Delta^{22}(t), symmetrized position autocorrelation.

    ``method='residue'`` sums the oscillator poles and the Matsubara
    series (Euler-Maclaurin tail, error bound reported); at zero
    temperature it evaluates the cosine transform directly.
    ``method='literal'`` evaluates the literal closed forms.
    """
    if t < 0:
        t = -t
    return _correlator(s, t, "11", n_matsubara, tol, method, return_error)


def crosscorr(s, t, n_matsubara=None, tol=1e-10, method="residue", return_error=False):
    """Delta^{12}(t) for t > 0; odd in the sign of OmegaCS."""
    if not t > 0:
        raise DomainError("crosscorr needs t > 0")
    if s.OmegaCS == 0:
        return (0.0, 0.0) if return_error else 0.0
    return _correlator(s, t, "12", n_matsubara, tol, method, return_error)


def msd(s, regime="high_T"):
    """Mean-square dispersion <Q^2> in the high- or zero-temperature limit."""
    G, O, m = s.Gamma0, s.Omega0, s.m
    c2 = s.c ** 2
    if regime == "high_T":
        if np.isinf(s.beta):
            raise DomainError("high_T needs finite beta")
        if G * s.beta > 0.1:
            warnings.warn(f"Gamma0 beta = {G * s.beta:.3g} is not small", RegimeWarning)
        num = c2 * O * O + 4 * G * G * (O ** 4 + 2 * c2)
        return num / (m * s.beta * (4 * G * G * O * O - c2) * (O ** 4 + c2))
    if regime == "zero_T":
        r = np.sqrt(complex(G * G - O * O))
        if abs(r) < 1e-12 * O:
            base = 1 / (np.pi * m * G)
        else:
            z = np.log((G + r) / (G - r)) / (2 * np.pi * m * r)
            if abs(z.imag) > 1e-12 * abs(z):
                raise ArithmeticError("zero_T dispersion lost realness")
            base = z.real
        return float(base + (s.OmegaCS / O) ** 2 / (2 * m * G))
    raise DomainError("regime must be 'high_T' or 'zero_T'")
