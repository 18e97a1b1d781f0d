"""Retarded self-energy in time and frequency.

Time domain:
    Sigma(t) = (2/pi) Theta(t - |dq|) int [Re J sin(w t) + Im J cos(w t)] dw

Frequency domain (convention r~(w) = (1/2pi) int e^{iwt} r(t) dt):
    I(w) = (1/2pi) [Theta(w) conj(J(w)) - Theta(-w) J(-w)]
    R(w) = (1/pi) P int I(w') / (w' - w) dw'
    Sigma~(w) = R(w) + i I(w)
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.special import dawsn

from . import quad
from .errors import AccuracyError, DomainError
from .spectral import _approx_array, _check_pair, _exact_array

__all__ = [
    "KernelGrid",
    "self_energy_time",
    "self_energy_time_grid",
    "self_energy_time_closed",
    "self_energy_freq",
    "self_energy_freq_grid",
    "imag_self_energy",
    "self_energy_freq_from_time",
    "field_commutator",
]

SPECTRA = ("exact", "approx")

# beyond this x = t/sqrt(8 sigma) the Dawson closed forms lose digits to
# cancellation and the asymptotic series takes over
X_ASYMPTOTIC = 8.0
N_ASYMPTOTIC = 24


@dataclass
class KernelGrid:
    """Sampled kernel values: shape (len(points), 2, 2)."""

    points: np.ndarray
    values: np.ndarray
    pair: tuple
    domain: str = "time"
    causality_lag: float = 0.0
    meta: dict = field(default_factory=dict)

    def to_csv(self, path, header=()):
        from .cli import write_csv

        pts = np.asarray(self.points)
        v = self.values.reshape(len(pts), 4)
        if self.domain == "time":
            cols = ["t", "pair", "s11", "s12", "s21", "s22"]
            rows = [[t, f"{self.pair[0]}-{self.pair[1]}", *row.real] for t, row in zip(pts, v)]
        else:
            cols = ["omega", "pair"] + [f"{p}{ab}" for ab in ("11", "12", "21", "22") for p in ("re", "im")]
            rows = [[w, f"{self.pair[0]}-{self.pair[1]}",
                     *np.column_stack([row.real, row.imag]).ravel()] for w, row in zip(pts, v)]
        write_csv(path, cols, rows, header)


def _spectrum_fn(p, i, j, spectrum):
    if spectrum not in SPECTRA:
        raise DomainError(f"spectrum must be one of {SPECTRA}")
    a = p.distance(i, j)
    fn = _exact_array if spectrum == "exact" else _approx_array
    return lambda w: fn(p.e, p.kappa, p.sigma, a, w)


def _lower(p, spectrum):
    return abs(p.kappa) if spectrum == "exact" else 0.0


def self_energy_time(p, i, j, t, spectrum="exact", causal=True, spec=quad.DEFAULT_SPEC):
    """Sigma_ij(t) as a 2x2 real matrix by direct quadrature.

    ``spectrum='approx'`` integrates the second-order spectral density
    from w = 0, which is the integral the closed forms evaluate.
    ``causal`` applies the hard zero for t < |dq|.
    """
    return self_energy_time_grid(p, i, j, [t], spectrum, causal, spec).values[0]


def self_energy_time_grid(p, i, j, times, spectrum="exact", causal=True,
                          spec=quad.DEFAULT_SPEC):
    """Sigma_ij on a grid of times, all points in one adaptive pass."""
    _check_pair(p, i, j)
    times = np.atleast_1d(np.asarray(times, float))
    J = _spectrum_fn(p, i, j, spectrum)
    lo = _lower(p, spectrum)

    def f(w):
        Jw = J(w)
        s = np.sin(w * times)[:, None, None]
        c = np.cos(w * times)[:, None, None]
        return (Jw.real * s + Jw.imag * c).ravel()

    tmax = np.max(np.abs(times)) if times.size else 0.0
    cutoff = lo + spec.upper_cutoff_multiplier * p.width
    nodes = np.arange(lo + np.pi / tmax, cutoff, np.pi / tmax) if tmax > 0 else None
    val, _ = quad.integrate_interval(f, lo, cutoff, spec, nodes)
    vals = 2.0 / np.pi * val.reshape(len(times), 2, 2)
    lag = p.distance(i, j)
    if causal:
        vals[times < lag] = 0.0
    vals[times < 0] = 0.0
    return KernelGrid(times, vals, (i, j), "time", lag, {"spectrum": spectrum})


def _dawson_series(n_terms):
    # F(x) ~ sum_n c_n x^{-2n-1}, c_n = (2n-1)!!/2^{n+1}
    c = np.empty(n_terms)
    c[0] = 0.5
    for k in range(1, n_terms):
        c[k] = c[k - 1] * (2 * k - 1) / 2.0
    return c


_C = _dawson_series(N_ASYMPTOTIC + 3)


def _poly_minus_dawson(x, poly, bracket):
    """poly(x) - F(x) * bracket(x) with bracket = b0 + b2 x^2 + b4 x^4.

    ``poly`` holds the odd-power coefficients (p1, p3).  For large x the
    positive powers cancel analytically and the 1/x series is used.
    """
    p1, p3 = poly
    b0, b2, b4 = bracket
    x = np.asarray(x, float)
    out = np.empty_like(x)
    small = x < X_ASYMPTOTIC
    xs = x[small]
    out[small] = p1 * xs + p3 * xs**3 - dawsn(xs) * (b0 + b2 * xs**2 + b4 * xs**4)
    xl = x[~small]
    k = np.arange(N_ASYMPTOTIC)
    coef = b0 * _C[k] + b2 * _C[k + 1] + b4 * _C[k + 2]
    out[~small] = -np.sum(coef[None, :] * xl[:, None] ** (-2.0 * k - 1)[None, :], axis=1)
    return out


def _offdiag_closed(x, D, sigma):
    """D(x^2-1) + 8 sigma + x (D(3-2x^2) - 16 sigma) F(x)."""
    x = np.asarray(x, float)
    out = np.empty_like(x)
    small = x < X_ASYMPTOTIC
    xs = x[small]
    out[small] = D * (xs**2 - 1) + 8 * sigma + xs * (D * (3 - 2 * xs**2) - 16 * sigma) * dawsn(xs)
    xl = x[~small]
    b0, b2 = 3 * D - 16 * sigma, -2 * D
    k = np.arange(1, N_ASYMPTOTIC)
    coef = b0 * _C[k] + b2 * _C[k + 1]
    out[~small] = np.sum(coef[None, :] * xl[:, None] ** (-2.0 * k)[None, :], axis=1)
    return out


def _closed_coefficients(p, i, j):
    D = p.distance(i, j) ** 2
    s = p.sigma
    k2 = p.kappa ** 2
    g = 1 + 2 * k2 * s
    s11 = ((32 * s * g - D * (5 + 18 * k2 * s), 2 * D * g),
           (3 * D - 32 * s + 14 * D * k2 * s - 192 * k2 * s * s,
            -12 * D + 64 * s - 40 * D * k2 * s + 128 * k2 * s * s,
            4 * D * g))
    s22 = ((32 * s * g - D * (15 + 22 * k2 * s), 6 * D * g),
           (9 * D - 32 * s + 10 * D * k2 * s - 192 * k2 * s * s,
            -36 * D + 64 * s - 56 * D * k2 * s + 128 * k2 * s * s,
            12 * D * g))
    return D, s11, s22


def self_energy_time_closed(p, i, j, t):
    """Weak-kappa, close-particle closed form of Sigma_ij(t), t >= 0.

    Vectorized over t: returns shape t.shape + (2, 2).  Exact for the
    second-order spectral density integrated from w = 0; no causal lag
    is applied (t = 0 gives the t -> 0+ limit).
    """
    _check_pair(p, i, j)
    t = np.asarray(t, float)
    if np.any(t < 0):
        raise DomainError("closed forms are defined for t >= 0")
    x = np.atleast_1d(t / np.sqrt(8 * p.sigma))
    D, c11, c22 = _closed_coefficients(p, i, j)
    pre = p.e ** 2 / (16 * np.pi * np.sqrt(2 * (4 * p.sigma) ** 5))
    out = np.zeros(x.shape + (2, 2))
    out[..., 0, 0] = pre * _poly_minus_dawson(x, *c11)
    out[..., 1, 1] = pre * _poly_minus_dawson(x, *c22)
    s12 = p.e ** 2 * p.kappa / (64 * np.pi * p.sigma ** 2) * _offdiag_closed(x, D, p.sigma)
    out[..., 0, 1] = s12
    out[..., 1, 0] = -s12
    return out.reshape(t.shape + (2, 2))


def imag_self_energy(p, i, j, omega, spectrum="exact"):
    """Dissipative part I(w) of the frequency-domain self-energy.

    Vectorized over omega; Theta(0) = 1/2.
    """
    _check_pair(p, i, j)
    J = _spectrum_fn(p, i, j, spectrum)
    w = np.asarray(omega, float)
    aw = np.abs(w)
    Jw = J(aw)
    pos = np.where(w > 0, 1.0, np.where(w == 0, 0.5, 0.0))[..., None, None]
    neg = np.where(w < 0, 1.0, np.where(w == 0, 0.5, 0.0))[..., None, None]
    return (pos * np.conj(Jw) - neg * Jw) / (2 * np.pi)


def _breakpoints(p, spectrum):
    k = abs(p.kappa)
    if spectrum == "exact" and k > 0:
        return (-k, 0.0, k)
    return (0.0,)


def self_energy_freq(p, i, j, omega, spectrum="exact", spec=quad.DEFAULT_SPEC):
    """Sigma~_ij(w) = R + i I with R the Kramers-Kronig transform of I."""
    I = lambda w: imag_self_energy(p, i, j, w, spectrum).ravel()
    R = quad.hilbert(I, float(omega), spec, _breakpoints(p, spectrum), scale=p.width)
    R = np.asarray(R).reshape(2, 2)
    return R + 1j * imag_self_energy(p, i, j, float(omega), spectrum)


def self_energy_freq_grid(p, i, j, omegas, spectrum="exact", spec=quad.DEFAULT_SPEC):
    """Sigma~_ij on a grid of nonzero frequencies in one adaptive pass.

    Uses the parity of I (diagonal odd, off-diagonal even) to fold the
    principal value onto w > 0,
        R_d(l) = (2/pi) P int_0^inf w I_d(w)/(w^2 - l^2) dw
        R_o(l) = (2 l/pi) P int_0^inf I_o(w)/(w^2 - l^2) dw
    and removes the pole with P int_0^inf dw/(w^2 - l^2) = 0.
    Returns shape (len(omegas), 2, 2).
    """
    _check_pair(p, i, j)
    lam = np.atleast_1d(np.asarray(omegas, float))
    if np.any(lam == 0):
        raise DomainError("omega must be nonzero")
    J = _spectrum_fn(p, i, j, spectrum)
    a = np.abs(lam)

    def fvals(w):
        # f_d = w I_d, f_o = I_o on w > 0; I = conj(J)/2pi there
        Iw = np.conj(J(w)) / (2 * np.pi)
        return np.stack([w * Iw[..., 0, 0], w * Iw[..., 1, 1], Iw[..., 0, 1], Iw[..., 1, 0]], axis=-1)

    f_at = fvals(a)                      # (N, 4)
    cutoff = _lower(p, spectrum) + spec.upper_cutoff_multiplier * p.width
    cutoff = max(cutoff, 1.5 * np.max(a))

    def g(w):
        d = w * w - a * a
        num = fvals(np.float64(w))[None, :] - f_at
        safe = np.abs(d) > 1e-300
        out = np.where(safe[:, None], num / np.where(safe, d, 1.0)[:, None], 0.0)
        return out.ravel()

    pts = list(_breakpoints(p, spectrum)) + list(a)
    val, _ = quad.integrate_interval(g, 0.0, cutoff, spec, [x for x in pts if x > 0])
    val = val.reshape(len(a), 4)
    # tail beyond the cutoff, where f ~ 0: -f(l) P int_c^inf dw/(w^2 - l^2)
    tail = np.log(np.abs((cutoff + a) / (cutoff - a))) / (2 * a)
    val = val - f_at * tail[:, None]
    out = np.zeros((len(a), 2, 2), dtype=complex)
    out[:, 0, 0] = 2 / np.pi * val[:, 0]
    out[:, 1, 1] = 2 / np.pi * val[:, 1]
    out[:, 0, 1] = 2 * lam / np.pi * val[:, 2]
    out[:, 1, 0] = 2 * lam / np.pi * val[:, 3]
    return out + 1j * imag_self_energy(p, i, j, lam, spectrum)


def self_energy_freq_from_time(p, i, j, omega, spec=quad.DEFAULT_SPEC):
    """(1/2pi) int_0^inf e^{iwt} Sigma(t) dt from the closed-form kernel.

    Independent route to R + i I: cosine and sine transforms of the time
    kernel, evaluated with QUADPACK's Fourier-integral rule.  Uses the
    causal support t >= 0 of the closed forms.
    """
    w = float(omega)
    if w == 0:
        raise DomainError("omega must be nonzero")
    out = np.zeros((2, 2), dtype=complex)
    err = 0.0
    cache = {}

    def sig(t):
        # QAWF visits the same abscissae for every entry and kind
        if t not in cache:
            cache[t] = self_energy_time_closed(p, i, j, np.atleast_1d(t))[0]
        return cache[t]

    for a in range(2):
        for b in range(2):
            if a == 1 and b == 0:
                continue
            f = lambda t, a=a, b=b: sig(t)[a, b]
            parts = []
            for kind in ("cos", "sin"):
                with warnings.catch_warnings():
                    # QAWF warns on the slow 1/t tail; its error estimate is checked below
                    warnings.simplefilter("ignore", integrate.IntegrationWarning)
                    v, e = integrate.quad(f, 0, np.inf, weight=kind, wvar=abs(w), limlst=400,
                                          epsabs=spec.abs_tol * 1e-2)
                parts.append(v)
                err = max(err, e)
            out[a, b] = (parts[0] + 1j * np.sign(w) * parts[1]) / (2 * np.pi)
    if err / (2 * np.pi) > max(spec.abs_tol, spec.rel_tol * np.max(np.abs(out))) * 1e3:
        raise AccuracyError("Fourier transform of the kernel did not converge",
                            estimate=out, error=err)
    out[1, 0] = -out[0, 1]
    return out


def field_commutator(p, i, j):
    """Coefficient c of the equal-time commutator [E^1_i, E^2_j] = -i c."""
    _check_pair(p, i, j)
    return p.kappa * np.exp(-p.distance(i, j) ** 2 / (8 * p.sigma)) / (8 * np.pi * p.sigma)
