"""Model parameters and bath spectral densities.

Three forms of the 2x2 spectral matrix J_ab(w, dq) are provided:

* ``spectral_density``: exact gapped form, nonzero only for w >= |kappa|
* ``spectral_density_approx``: second order in |dq|, weak kappa, w >= 0
* ``spectral_density_bw``: Ohmic form implied by a Breit-Wigner reduction

The ``_*_array`` helpers are vectorized over w and return arrays of
shape (..., 2, 2); the kernel and noise modules integrate over them.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sc

from . import quad
from .errors import DomainError, RegularizationError

__all__ = [
    "ModelParams",
    "SpectralMatrix",
    "spectral_density",
    "spectral_density_approx",
    "spectral_density_bw",
    "aux_J",
]


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs in natural units.

    ``beta`` may be ``np.inf`` (zero temperature).  ``e = 0`` is allowed
    as the decoupled limit.  Bare frequencies below |kappa| are accepted
    (``in_band`` is then False) so that gap-violating configurations can
    be diagnosed rather than rejected.
    """

    m: float = 1.0
    omegas: tuple = (1.0,)
    e: float = 1.0
    kappa: float = 0.01
    sigma: float = 0.5
    positions: tuple = ((0.0, 0.0),)
    beta: float = np.inf

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in np.atleast_1d(self.omegas)))
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "positions", tuple(tuple(p) for p in pos))
        if not self.m > 0:
            raise DomainError("mass must be > 0")
        if not self.sigma > 0:
            raise DomainError("sigma must be > 0")
        if not self.e >= 0:
            raise DomainError("charge e must be >= 0")
        if not self.beta > 0:
            raise DomainError("beta must be > 0 (np.inf for zero temperature)")
        if len(self.omegas) < 1 or any(not w > 0 for w in self.omegas):
            raise DomainError("need n >= 1 positive bare frequencies")
        if pos.shape != (len(self.omegas), 2) or not np.all(np.isfinite(pos)):
            raise DomainError("positions must be n finite 2-vectors")
        if not np.isfinite(self.kappa):
            raise DomainError("kappa must be finite")

    @property
    def n(self):
        return len(self.omegas)

    @property
    def in_band(self):
        return all(w > abs(self.kappa) for w in self.omegas)

    @property
    def width(self):
        """Damping scale 1/sqrt(2 sigma) of the coupling."""
        return 1.0 / np.sqrt(2.0 * self.sigma)

    def separation(self, i, j):
        """Vector q_i - q_j."""
        return np.subtract(self.positions[i], self.positions[j])

    def distance(self, i, j):
        return float(np.hypot(*self.separation(i, j)))

    def replace(self, **kw):
        d = {f: getattr(self, f) for f in self.__dataclass_fields__}
        d.update(kw)
        return ModelParams(**d)


@dataclass
class SpectralMatrix:
    entries: np.ndarray
    omega: float
    pair: tuple
    gap: bool = False
    notes: list = field(default_factory=list)

    def __getitem__(self, idx):
        return self.entries[idx]


def _check_pair(p, i, j):
    if not (0 <= i < p.n and 0 <= j < p.n):
        raise DomainError("oscillator index out of range")


def _j1_over(a, b):
    """(b/a) J1(a b), with the a -> 0 limit b^2/2."""
    a = np.asarray(a, float)
    z = a * b
    with np.errstate(invalid="ignore", divide="ignore"):
        val = np.where(z > 1e-6, b * sc.j1(z) / np.where(a > 0, a, 1.0),
                       0.5 * b * b * (1.0 - z * z / 8.0))
    return val


def _exact_array(e, kappa, sigma, a, w):
    """Exact spectral matrix on an array of frequencies; zero in the gap."""
    w = np.asarray(w, float)
    inband = w >= abs(kappa)
    b = np.sqrt(np.where(inband, w * w - kappa * kappa, 0.0))
    env = np.where(inband, 0.25 * e * e * np.exp(-2.0 * sigma * (w * w - kappa * kappa)), 0.0)
    j0 = sc.j0(a * b)
    y1 = _j1_over(a, b)
    out = np.zeros(w.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = env * (kappa * kappa * j0 + y1)
    out[..., 1, 1] = env * (w * w * j0 - y1)
    out[..., 0, 1] = 1j * env * kappa * w * j0
    out[..., 1, 0] = -1j * env * kappa * w * j0
    return out


def _approx_array(e, kappa, sigma, a, w):
    """Second-order-in-|dq| spectral matrix, valid for w >= 0.

    The off-diagonal quartic correction is written as i kappa D w^3 so
    that no 1/w pole appears.
    """
    w = np.asarray(w, float)
    d2 = a * a
    k2 = kappa * kappa
    env = (e / 4.0) ** 2 * np.exp(-2.0 * sigma * w * w)
    w2 = w * w
    q = d2 * w2 * w2 / 4.0
    fac = 1.0 + 2.0 * k2 * sigma
    out = np.zeros(w.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = env * (0.25 * (8 * k2 + 2 * (4 - k2 * (d2 - 8 * sigma)) * w2) - fac * q)
    out[..., 1, 1] = env * (0.25 * (8 * k2 + 2 * (4 + k2 * (d2 + 8 * sigma)) * w2) - 3 * fac * q)
    off = env * kappa * w * (4.0 - d2 * w2)
    out[..., 0, 1] = 1j * off
    out[..., 1, 0] = -1j * off
    return out


def spectral_density(p, i, j, omega):
    """Exact gapped spectral matrix for the pair (i, j) at frequency omega.

    Below the gap the bath has no modes: a zero matrix with ``gap=True``
    is returned.
    """
    _check_pair(p, i, j)
    ent = _exact_array(p.e, p.kappa, p.sigma, p.distance(i, j), float(omega))
    return SpectralMatrix(ent, float(omega), (i, j), gap=bool(omega < abs(p.kappa)))


def spectral_density_approx(p, i, j, omega):
    """Close-particle, weak-kappa spectral matrix (defined for omega >= 0)."""
    _check_pair(p, i, j)
    if omega < 0:
        raise DomainError("approximate spectral density defined for omega >= 0")
    ent = _approx_array(p.e, p.kappa, p.sigma, p.distance(i, j), float(omega))
    return SpectralMatrix(ent, float(omega), (i, j))


def spectral_density_bw(bw, i, j, omega):
    """Ohmic spectral matrix implied by Breit-Wigner coefficients.

    Diagonal: (2 pi m Gamma / Z) w.  Off-diagonal: -i eps_ab pi m W2 with
    W2 = (Omega o2)^{12} / Z^{12} the rotational-force strength.
    """
    a, b = 2 * i, 2 * j
    m = bw.m
    ent = np.zeros((2, 2), dtype=complex)
    for al in range(2):
        ent[al, al] = 2 * m * np.pi * bw.Gamma[a + al, b + al] / bw.Z[a + al, b + al] * omega
    w2 = bw.rotational_strength(i, j)
    ent[0, 1] = -1j * np.pi * m * w2
    ent[1, 0] = 1j * np.pi * m * w2
    return SpectralMatrix(ent, float(omega), (i, j))


def aux_J(l, p, i, j, k_min=0.0, spec=quad.DEFAULT_SPEC):
    """Auxiliary integral int_{k_min}^inf k^{l+1} e^{-2 s k^2} J_l(k a) / (k^2 (k^2+kappa^2)) dk.

    For l = 0 the integrand behaves as 1/(kappa^2 k) at the origin, so a
    positive ``k_min`` is mandatory.
    """
    if l not in (0, 1):
        raise DomainError("l must be 0 or 1")
    a = p.distance(i, j)
    k2 = p.kappa ** 2
    if l == 0 and not k_min > 0:
        raise RegularizationError("aux_J(0) is infrared divergent; supply k_min > 0")
    if l == 1 and k2 == 0 and a > 0 and not k_min > 0:
        raise RegularizationError("aux_J(1) diverges at kappa = 0; supply k_min > 0")

    def f(x):
        k = x + k_min
        env = np.exp(-2 * p.sigma * k * k) / (k * k + k2)
        if l == 0:
            return env * sc.j0(k * a) / k
        return env * sc.j1(k * a)

    return quad.integrate_semiinf(f, p.width, spec, osc_freq=a if a > 0 else None)
