"""Static coefficients of the dissipative Hamiltonian and its positivity.

Pair quantities are first built in the pair frame (axis 1 along
q_i - q_j, axis 2 perpendicular) and then rotated to the lab frame.
Swapping i and j flips both frame axes, so lab-frame matrices satisfy
X_ij = X_ji^T.

The backreaction matrix is evaluated from the Laplace representation
1/(k^2 + kappa^2) = int_0^inf e^{-s(k^2 + kappa^2)} ds, which turns each
Bessel k-integral into a smooth integral over s without truncation.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy import special as sc

from . import quad
from .errors import RegimeError
from .spectral import _check_pair, aux_J
from .specfun import gamma_upper_zero_scaled, whittaker_m_half_one

__all__ = [
    "PositivityReport",
    "quadratic_potential",
    "quadratic_potential_quad",
    "coulomb_gradient",
    "linear_potential",
    "backreaction_quadratic",
    "backreaction_quadratic_quad",
    "positivity_matrix",
    "positivity_check",
    "default_k_min",
]


def default_k_min(p):
    return 1e-4 / np.sqrt(2 * p.sigma)


@dataclass
class PositivityReport:
    passes: bool
    lhs_min_eigenvalue: float
    rhs_value: float
    radius_R: float
    subsidiary_ok: bool
    k_min_used: float
    linear_offset: float = 0.0
    notes: list = field(default_factory=list)

    def to_text(self):
        rows = [
            ("passes", self.passes),
            ("lhs_min_eigenvalue", f"{self.lhs_min_eigenvalue:.12g}"),
            ("rhs_value", f"{self.rhs_value:.12g}"),
            ("radius_R", f"{self.radius_R:.12g}"),
            ("subsidiary_ok", self.subsidiary_ok),
            ("k_min_used", f"{self.k_min_used:.12g}"),
            ("linear_offset", f"{self.linear_offset:.12g}"),
        ]
        rows += [("note", n) for n in self.notes]
        return "\n".join(f"{k} = {v}" for k, v in rows)


def _frame(p, i, j):
    """Rotation whose columns are the pair-frame axes; identity for i = j."""
    d = p.separation(i, j)
    a = np.hypot(*d)
    if a == 0:
        return np.eye(2), 0.0
    e1 = d / a
    return np.array([[e1[0], -e1[1]], [e1[1], e1[0]]]), a


def _to_lab(p, i, j, M):
    """R diag(M) R^T as a sum of outer products, so the result is exactly symmetric."""
    R, _ = _frame(p, i, j)
    d = np.diag(M)
    return d[0] * np.outer(R[:, 0], R[:, 0]) + d[1] * np.outer(R[:, 1], R[:, 1])


# quadratic potential ----------------------------------------------------

def _dipole_pair(e, sigma, a):
    """Pair-frame e^2 part of V for separation a > 0."""
    z = a * a / (8 * sigma)
    # exponentially scaled Bessel absorbs the e^{-z/2} prefactor
    i_half = sc.ive(0.5, z / 2)
    pre = e * e / (4 * np.pi * np.sqrt(2 * sigma) * a)
    diag = pre * np.sqrt(np.pi) * i_half
    perp = pre * np.exp(-z / 2) * whittaker_m_half_one(z)
    return np.diag([diag, diag - perp])


def quadratic_potential(p, i, j):
    """V_ij as a 2x2 lab-frame matrix, dipole self-energy included.

    For i = j (or coincident centres) the separation -> 0 limit
    delta_ab e^2/(16 pi sigma) is used.
    """
    _check_pair(p, i, j)
    _, a = _frame(p, i, j)
    bare = p.m * p.omegas[i] ** 2 if i == j else 0.0
    if a == 0:
        return (bare + p.e ** 2 / (16 * np.pi * p.sigma)) * np.eye(2)
    return bare * np.eye(2) + _to_lab(p, i, j, _dipole_pair(p.e, p.sigma, a))


def quadratic_potential_quad(p, i, j, spec=quad.DEFAULT_SPEC):
    """V_ij from the Bessel k-integral; independent of the Whittaker form."""
    _check_pair(p, i, j)
    _, a = _frame(p, i, j)
    bare = p.m * p.omegas[i] ** 2 if i == j else 0.0

    def f(k):
        z = k * a
        j1z = np.where(z > 1e-8, sc.j1(z) / np.where(z > 0, z, 1), 0.5)
        return k * np.exp(-2 * p.sigma * k * k) * np.array([j1z, j1z - sc.jv(2, z)])

    d11, d22 = quad.integrate_semiinf(f, p.width, spec, osc_freq=a or None)
    M = p.e ** 2 / (2 * np.pi) * np.diag([d11, d22])
    return bare * np.eye(2) + _to_lab(p, i, j, M)


# linear potential -------------------------------------------------------

def coulomb_gradient(p, i, j, spec=quad.DEFAULT_SPEC):
    """Gradient of the Gaussian-smeared 2D Coulomb potential at q_i - q_j.

    Hankel form: -(e^2/4pi) rhat int_0^inf e^{-2 sigma k^2} J1(k r) dk.
    """
    _check_pair(p, i, j)
    R, r = _frame(p, i, j)
    if r == 0:
        return np.zeros(2)
    mag = quad.integrate_semiinf(lambda k: np.exp(-2 * p.sigma * k * k) * sc.j1(k * r),
                                 p.width, spec, osc_freq=r)
    return -(p.e ** 2 / (4 * np.pi)) * mag * R[:, 0]


def linear_potential(p, i, k_min=None, spec=quad.DEFAULT_SPEC, return_flags=False):
    """V_i = sum_j [2 V_c'(q_i - q_j) - (e^2 kappa^2/2pi) J_1(|dq|) e_ij].

    e_ij is the unit vector along q_i - q_j.  Distinct particles at the
    same centre contribute nothing by symmetry; this is flagged.
    """
    _check_pair(p, i, i)
    out = np.zeros(2)
    flags = []
    for j in range(p.n):
        R, a = _frame(p, i, j)
        if a == 0:
            if j != i:
                flags.append(f"particles {i} and {j} coincide; pair term set to 0")
            continue
        out += 2 * coulomb_gradient(p, i, j, spec)
        if p.kappa != 0:
            kk = 0.0 if k_min is None else k_min
            j1 = aux_J(1, p, i, j, kk, spec)
            out -= p.e ** 2 * p.kappa ** 2 / (2 * np.pi) * j1 * R[:, 0]
    return (out, flags) if return_flags else out


# backreaction -----------------------------------------------------------

def _laplace(p, a, power):
    """e^{2 s kappa^2} int_{2 s}^inf e^{-u kappa^2 - a^2/4u} u^{-power} du.

    Mapped to v = 2 sigma/u on (0, 1]; the exponent is kept <= 0.
    """
    s2 = 2 * p.sigma
    k2 = p.kappa ** 2

    def f(v):
        if v == 0:
            return 0.0
        expo = s2 * k2 * (1 - 1 / v) - a * a * v / (4 * s2)
        return np.exp(expo) * v ** (power - 2) * s2 ** (1 - power)

    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=0, epsrel=1e-13, limit=200)
    return val


def _backreaction_pair(p, a):
    e2 = p.e ** 2
    k2 = p.kappa ** 2
    L = 0.25 * _laplace(p, a, 2)
    K0 = 0.5 * k2 * _laplace(p, a, 1) if k2 > 0 else 0.0
    g0 = np.exp(-a * a / (8 * p.sigma)) / (4 * p.sigma)
    return e2 / (2 * np.pi) * np.diag([K0 + L, g0 - L])


def backreaction_quadratic(p, i, j):
    """sum_k w(k)(h_a h_b^+ + c.c.) for the pair (i, j), lab frame.

    Real, symmetric under (i,a) <-> (j,b), and a function of kappa^2.
    At zero separation both diagonal entries equal
    e^2/(16 pi sigma) + (e^2 kappa^2/8pi) Gamma(0, 2 sigma kappa^2) e^{2 sigma kappa^2}.
    """
    _check_pair(p, i, j)
    _, a = _frame(p, i, j)
    return _to_lab(p, i, j, _backreaction_pair(p, a))


def backreaction_quadratic_quad(p, i, j, spec=quad.DEFAULT_SPEC):
    """Same matrix from the k-integral before any contour reduction."""
    _check_pair(p, i, j)
    _, a = _frame(p, i, j)
    k2 = p.kappa ** 2

    def f(k):
        z = k * a
        env = k * np.exp(-2 * p.sigma * k * k)
        j1z = np.where(z > 1e-8, sc.j1(z) / np.where(z > 0, z, 1), 0.5)
        frac = k * k / (k * k + k2) if k2 > 0 else 1.0
        lt = frac * j1z          # k/(k^2+kappa^2) J1(ka)/a
        t11 = (1 - frac) * sc.j0(z) + lt
        t22 = sc.j0(z) - lt
        return env * np.array([t11, t22])

    d11, d22 = quad.integrate_semiinf(f, p.width, spec, osc_freq=a or None)
    return _to_lab(p, i, j, p.e ** 2 / (2 * np.pi) * np.diag([d11, d22]))


# positivity -------------------------------------------------------------

def positivity_matrix(p):
    """A = V - B over all oscillator pairs, shape (2n, 2n)."""
    n = p.n
    A = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            A[2 * i:2 * i + 2, 2 * j:2 * j + 2] = (quadratic_potential(p, i, j)
                                                   - backreaction_quadratic(p, i, j))
    return 0.5 * (A + A.T)


def positivity_check(p, k_min=None, spec=quad.DEFAULT_SPEC):
    """Quadratic-form test of the positivity inequality.

    ``passes`` is lambda_min(V - B) > 0.  The linear term is then
    absorbed by completing the square; its offset -b A^{-1} b / 2 is
    reported as ``linear_offset``.  For n = 1 the excluded radius R
    and the subsidiary condition (margin factor 10) are filled in.
    """
    k_min = default_k_min(p) if k_min is None else k_min
    if not k_min > 0:
        raise ValueError("k_min must be > 0")
    A = positivity_matrix(p)
    lam = np.linalg.eigvalsh(A)
    scale = max(np.max(np.abs(A)), 1e-300)
    if abs(lam[0]) <= 1e-13 * scale:
        raise RegimeError("quadratic part is singular; positivity undecided")
    notes = []
    k2 = p.kappa ** 2
    rhs = 0.0
    if k2 > 0 and p.e > 0:
        rhs = sum(p.e ** 2 * k2 / (4 * np.pi) * aux_J(0, p, i, j, k_min, spec)
                  for i in range(p.n) for j in range(p.n))
    b = np.concatenate([linear_potential(p, i, k_min, spec) for i in range(p.n)])
    passes = bool(lam[0] > 0)
    offset = float(-0.5 * b @ np.linalg.solve(A, b)) if passes else -np.inf
    if not passes:
        notes.append("quadratic part not positive: unbounded below")
    radius = np.nan
    sub_ok = True
    if p.n == 1:
        w2 = p.omegas[0] ** 2
        shift = p.e ** 2 * k2 / (8 * np.pi) * (gamma_upper_zero_scaled(2 * p.sigma * k2) if k2 > 0 else 0.0)
        denom = p.m * w2 - shift
        r0sq = aux_J(0, p, 0, 0, k_min, spec) if k2 > 0 and p.e > 0 else 0.0
        radius = float(np.sqrt(p.e ** 2 * k2 * r0sq / (2 * np.pi * denom))) if denom > 0 else np.inf
        sub_ok = bool(10 * p.e ** 2 / (2 * p.m * p.sigma ** 2 * w2) * p.sigma * k2 <= 1)
    notes.append("linear term handled by completing the square")
    return PositivityReport(passes, float(lam[0]), float(rhs), radius, sub_ok, float(k_min),
                            offset, notes)
