"""Special functions used by the kernel formulas.

Thin, domain-checked wrappers over ``scipy.special`` plus the one
function scipy lacks (the Whittaker function M_{1/2,1}).  All functions
accept scalars or arrays and return the same shape.
"""
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .errors import DomainError, RangeError

__all__ = [
    "FnAccuracy",
    "bessel_j",
    "bessel_k",
    "bessel_k_scaled",
    "erfi",
    "erfi_scaled",
    "dawson",
    "gamma_upper_zero",
    "gamma_upper_zero_scaled",
    "digamma",
    "whittaker_m_half_one",
]

EULER_GAMMA = np.euler_gamma

# erfi(30) ~ 1e389 overflows a double; beyond this use erfi_scaled
ERFI_MAX_ARG = 26.5


@dataclass(frozen=True)
class FnAccuracy:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("tolerances must be strictly positive")


DEFAULT_ACCURACY = FnAccuracy()


def _finite(x, name):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError(f"{name}: non-finite argument")
    return x


def _positive(x, name):
    x = _finite(x, name)
    if np.any(x <= 0):
        raise DomainError(f"{name}: argument must be > 0")
    return x


def _out(y):
    return y.item() if np.ndim(y) == 0 else y


def bessel_j(order, x):
    """Bessel function of the first kind J_n(x) for n in {0, 1, 2}."""
    x = _finite(x, "bessel_j")
    if order == 0:
        return _out(sc.j0(x))
    if order == 1:
        return _out(sc.j1(x))
    if order == 2:
        return _out(sc.jv(2, x))
    raise DomainError("bessel_j: order must be 0, 1 or 2")


def bessel_k(order, x):
    """Modified Bessel function K_n(x), n in {0, 1}, x > 0."""
    x = _positive(x, "bessel_k")
    if order == 0:
        return _out(sc.k0(x))
    if order == 1:
        return _out(sc.k1(x))
    raise DomainError("bessel_k: order must be 0 or 1")


def bessel_k_scaled(order, x):
    """e^x K_n(x), free of underflow for large x."""
    x = _positive(x, "bessel_k_scaled")
    if order == 0:
        return _out(sc.k0e(x))
    if order == 1:
        return _out(sc.k1e(x))
    raise DomainError("bessel_k_scaled: order must be 0 or 1")


def erfi(x):
    """Imaginary error function -i erf(ix)."""
    x = _finite(x, "erfi")
    if np.any(np.abs(x) > ERFI_MAX_ARG):
        raise RangeError("erfi overflows; use erfi_scaled")
    return _out(sc.erfi(x))


def dawson(x):
    """Dawson integral F(x) = (sqrt(pi)/2) e^{-x^2} erfi(x)."""
    return _out(sc.dawsn(_finite(x, "dawson")))


def erfi_scaled(x):
    """e^{-x^2} erfi(x), finite for all real x."""
    return _out(2.0 / np.sqrt(np.pi) * sc.dawsn(_finite(x, "erfi_scaled")))


def gamma_upper_zero(x):
    """Upper incomplete gamma Gamma(0, x) = E_1(x), x > 0."""
    return _out(sc.exp1(_positive(x, "gamma_upper_zero")))


def gamma_upper_zero_scaled(x):
    """e^x Gamma(0, x); tends to 1/x for large x."""
    x = _positive(x, "gamma_upper_zero_scaled")
    # exp1 underflows near x ~ 700, switch to the continued-fraction form
    big = x > 50.0
    out = np.empty_like(x)
    out[~big] = np.exp(x[~big]) * sc.exp1(x[~big])
    out[big] = _e1_scaled_cf(x[big])
    return _out(out)


def _e1_scaled_cf(x, terms=60):
    # modified Lentz evaluation of e^x E_1(x) = 1/(x+1-1/(x+3-4/(x+5-...)))
    b = x + 1.0
    c = np.full_like(x, 1e300)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, terms):
        a = -float(i * i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = h * delta
    return h


def digamma(x):
    """psi(x) = Gamma'(x)/Gamma(x) for x > 0."""
    return _out(sc.digamma(_positive(x, "digamma")))


def whittaker_m_half_one(x):
    """Whittaker function M_{1/2,1}(x) for x > 0.

    With 1F1(1; 3; x) = 2 (e^x - 1 - x)/x^2 this is
    2 e^{-x/2} (e^x - 1 - x) / sqrt(x).  The bracket is expm1(x) - x,
    replaced by its series at small x where M ~ x^{3/2}.
    """
    x = _positive(x, "whittaker_m_half_one")
    small = x < 1e-2
    bracket = np.empty_like(x)
    xs = x[small]
    bracket[small] = xs**2 * (0.5 + xs * (1 / 6 + xs * (1 / 24 + xs * (1 / 120 + xs / 720))))
    xl = x[~small]
    bracket[~small] = np.expm1(xl) - xl
    return _out(2.0 * np.exp(-0.5 * x) * bracket / np.sqrt(x))
