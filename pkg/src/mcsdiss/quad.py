"""Quadrature and transform engine.

All routines accept scalar- or vector-valued integrands; vector output
lets one adaptive pass integrate every matrix entry (or every time
point of a grid) at once.  Adaptive Gauss-Kronrod work is delegated to
``scipy.integrate.quad_vec``; this module adds the panel layout
(oscillation nodes, Gaussian cutoff, pole-symmetric pairs) on top.
"""
from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal

from .errors import AccuracyError, DomainError

__all__ = [
    "QuadSpec",
    "integrate_semiinf",
    "integrate_interval",
    "fourier_sin_cos",
    "hilbert",
    "hilbert_grid",
]


@dataclass(frozen=True)
class QuadSpec:
    """Tolerances and truncation rule for the adaptive integrators.

    ``upper_cutoff_multiplier`` counts damping scales; beyond six scales
    a Gaussian envelope is below 1e-15 of its peak.
    """

    abs_tol: float = 1e-13
    rel_tol: float = 1e-10
    max_subdivisions: int = 20000
    upper_cutoff_multiplier: float = 8.0

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("QuadSpec tolerances must be > 0")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")
        if self.upper_cutoff_multiplier < 6:
            raise DomainError("upper_cutoff_multiplier must be >= 6")


DEFAULT_SPEC = QuadSpec()


def _unwrap(x):
    x = np.asarray(x)
    if x.ndim == 0:
        x = x.item()
        if isinstance(x, complex) and x.imag == 0:
            return x.real
    return x


def _check(val, err, spec, what):
    scale = np.max(np.abs(val)) if np.size(val) else 0.0
    if err > max(spec.abs_tol, spec.rel_tol * scale) * 10:
        raise AccuracyError(f"{what}: error estimate {err:.3e} above tolerance",
                            estimate=_unwrap(val), error=err)


def integrate_interval(f, a, b, spec=DEFAULT_SPEC, points=None):
    """Adaptive Gauss-Kronrod on [a, b] (either end may be infinite).

    Returns ``(value, error_estimate)``.  ``points`` are interior
    breakpoints (oscillation nodes, discontinuities).
    """
    if a == b:
        v = np.asarray(f(0.5 * (a + b))) * 0.0
        return v, 0.0
    pts = None
    if points is not None and np.isfinite(a) and np.isfinite(b):
        lo, hi = min(a, b), max(a, b)
        pts = [p for p in np.unique(np.asarray(points, float)) if lo < p < hi]
        pts = pts or None
    res, err, info = integrate.quad_vec(
        f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, norm="max",
        limit=spec.max_subdivisions, points=pts, full_output=True)
    if info.status == 1:
        raise AccuracyError("subdivision limit reached", estimate=_unwrap(res), error=err)
    return res, err


def _tail(f, cutoff, spec):
    """Integral of f over [cutoff, inf), skipped when f is negligible there."""
    probe = np.max(np.abs(np.asarray(f(cutoff))))
    probe2 = np.max(np.abs(np.asarray(f(1.5 * cutoff))))
    if max(probe, probe2) * cutoff < spec.abs_tol * 1e-3:
        return 0.0, max(probe, probe2) * cutoff
    return integrate_interval(f, cutoff, np.inf, spec)


def integrate_semiinf(integrand, damping_scale, spec=DEFAULT_SPEC, osc_freq=None):
    """Integral of ``integrand`` over [0, inf).

    Parameters
    ----------
    integrand : callable, real or complex, scalar or vector valued
    damping_scale : width of the decaying envelope, e.g. 1/sqrt(2 sigma)
        for e^{-2 sigma k^2}; sets the truncation point
    osc_freq : optional angular frequency of an oscillating factor
        (Bessel J(k a) or trig); panels are split every pi/osc_freq
    """
    if not damping_scale > 0:
        raise DomainError("damping_scale must be > 0")
    cutoff = spec.upper_cutoff_multiplier * damping_scale
    nodes = None
    if osc_freq:
        step = np.pi / abs(osc_freq)
        nodes = np.arange(step, cutoff, step)
    val, err = integrate_interval(integrand, 0.0, cutoff, spec, nodes)
    tv, te = _tail(integrand, cutoff, spec)
    val = val + tv
    err = err + te
    _check(val, err, spec, "integrate_semiinf")
    return _unwrap(val)


def fourier_sin_cos(spectrum, t, kind, omega_min=0.0, spec=DEFAULT_SPEC,
                    damping_scale=1.0, return_error=False):
    """Integral of spectrum(w) * sin(w t) or cos(w t) over [omega_min, inf).

    Panels have width at most pi/|t| so each one holds a half period.
    ``spectrum`` may be vector valued.
    """
    if kind not in ("sin", "cos"):
        raise DomainError("kind must be 'sin' or 'cos'")
    trig = np.sin if kind == "sin" else np.cos
    if kind == "sin" and t == 0:
        z = np.asarray(spectrum(omega_min + 1.0)) * 0.0
        return (_unwrap(z), 0.0) if return_error else _unwrap(z)

    def f(w):
        return np.asarray(spectrum(w)) * trig(w * t)

    cutoff = omega_min + spec.upper_cutoff_multiplier * damping_scale
    nodes = None
    if t != 0:
        step = np.pi / abs(t)
        nodes = np.arange(omega_min + step, cutoff, step)
    val, err = integrate_interval(f, omega_min, cutoff, spec, nodes)
    tv, te = _fourier_tail(spectrum, t, trig, kind, cutoff, spec)
    val = val + tv
    err = err + te
    _check(val, err, spec, "fourier_sin_cos")
    return (_unwrap(val), err) if return_error else _unwrap(val)


def _fourier_tail(spectrum, t, trig, kind, cutoff, spec):
    probe = max(np.max(np.abs(np.asarray(spectrum(cutoff)))),
                np.max(np.abs(np.asarray(spectrum(2 * cutoff)))))
    if probe * cutoff < spec.abs_tol * 1e-3:
        return 0.0, probe * cutoff
    if t == 0:
        return integrate_interval(spectrum, cutoff, np.inf, spec)
    # QAWF handles the oscillatory infinite tail, one component at a time
    shape = np.shape(spectrum(cutoff))
    flat = int(np.prod(shape)) if shape else 1
    out = np.zeros(flat, dtype=complex)
    err = 0.0
    for c in range(flat):
        for part in (np.real, np.imag):
            g = lambda w, c=c, part=part: part(np.ravel(np.asarray(spectrum(w)))[c])
            if part is np.imag and not np.iscomplexobj(spectrum(cutoff)):
                continue
            v, e = integrate.quad(g, cutoff, np.inf, weight=kind, wvar=abs(t), limlst=200)
            if kind == "sin" and t < 0:
                v = -v
            out[c] += v if part is np.real else 1j * v
            err += e
    if not np.iscomplexobj(spectrum(cutoff)):
        out = out.real
    return (out.reshape(shape) if shape else out[0]), err


def hilbert(values, omega, spec=DEFAULT_SPEC, breakpoints=(), scale=1.0,
            return_error=False):
    """Principal-value transform (1/pi) P int f(w')/(w' - w) dw'.

    The pole is handled by folding [w-h, w+h] into the symmetric pair
    (f(w+u) - f(w-u))/u on [0, h]; the wings are integrated adaptively
    out to +-inf.  ``breakpoints`` lists discontinuities of f; the fold
    half-width h never straddles one.  ``scale`` is the width of the
    features of f and caps h.
    """
    bps = np.unique(np.asarray(breakpoints, float)) if len(breakpoints) else np.array([])
    dist = np.min(np.abs(bps - omega)) if bps.size else np.inf
    if dist == 0:
        raise AccuracyError("pole coincides with a discontinuity of f; PV diverges")
    h = min(scale, 0.5 * dist)

    def pair(u):
        return (np.asarray(values(omega + u)) - np.asarray(values(omega - u))) / u

    def wing(x):
        return np.asarray(values(x)) / (x - omega)

    v0, e0 = integrate_interval(pair, 0.0, h, spec)
    left_pts = [b for b in bps if b < omega - h]
    right_pts = [b for b in bps if b > omega + h]
    # finite stretch of each wing spans all breakpoints plus a margin
    lo = min([omega - h - 10 * scale] + [b - scale for b in left_pts])
    hi = max([omega + h + 10 * scale] + [b + scale for b in right_pts])
    v1, e1 = integrate_interval(wing, lo, omega - h, spec, left_pts)
    v2, e2 = integrate_interval(wing, omega + h, hi, spec, right_pts)
    v3, e3 = integrate_interval(wing, -np.inf, lo, spec)
    v4, e4 = integrate_interval(wing, hi, np.inf, spec)
    val = (v0 + v1 + v2 + v3 + v4) / np.pi
    err = (e0 + e1 + e2 + e3 + e4) / np.pi
    _check(val, err, spec, "hilbert")
    return (_unwrap(val), err) if return_error else _unwrap(val)


def hilbert_grid(samples, pad_factor=8):
    """FFT-based (1/pi) P int f(y)/(y - x) dy on a uniform grid.

    ``samples`` must decay to ~0 at both grid ends; zero padding by
    ``pad_factor`` suppresses the periodic images.  The transform is
    scale free, so the grid spacing does not enter.
    """
    samples = np.asarray(samples, dtype=float)
    n = samples.shape[-1]
    padded = np.zeros(samples.shape[:-1] + (pad_factor * n,))
    start = (pad_factor - 1) * n // 2
    padded[..., start:start + n] = samples
    # scipy's analytic signal has Im = (1/pi) P int f(y)/(x - y) dy
    h = -np.imag(signal.hilbert(padded, axis=-1))
    return h[..., start:start + n]
