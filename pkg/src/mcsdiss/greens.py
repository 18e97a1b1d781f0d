"""Retarded Green's function, stationarity and Breit-Wigner reduction.

All 2n x 2n matrices are ordered (particle, component): row 2i + a.
Pair blocks of the self-energy are computed in the pair frame and
rotated to the lab frame like the static potentials.

    G~_R^{-1}(w) = -m w^2 I + V - Sigma~(w)
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import quad
from .errors import AccuracyError, RegimeError
from .kernel import imag_self_energy, self_energy_freq_grid
from .noise import coth_half
from .kernel import _spectrum_fn
from .statics import _frame, positivity_matrix, quadratic_potential

__all__ = [
    "PoleWarning",
    "BWCoefficients",
    "StationarityResult",
    "potential_matrix",
    "self_energy_matrix",
    "dissipative_matrix",
    "retarded_green_freq",
    "retarded_green_grid",
    "stationarity_check",
    "stationary_correlators",
    "kms_time_check",
    "breit_wigner_reduce",
]


class PoleWarning(UserWarning):
    """G~_R^{-1} is numerically singular at the requested frequency."""


def potential_matrix(p):
    n = p.n
    V = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            V[2 * i:2 * i + 2, 2 * j:2 * j + 2] = quadratic_potential(p, i, j)
    return V


def _assemble(p, block_fn):
    """Fill a (N, 2n, 2n) array from pair-frame blocks, sharing equal distances."""
    n = p.n
    cache = {}
    out = None
    for i in range(n):
        for j in range(n):
            R, a = _frame(p, i, j)
            key = round(a, 14)
            if key not in cache:
                cache[key] = block_fn(i, j)
            blk = np.einsum("ab,nbc,dc->nad", R, cache[key], R)
            if out is None:
                out = np.zeros((blk.shape[0], 2 * n, 2 * n), dtype=complex)
            out[:, 2 * i:2 * i + 2, 2 * j:2 * j + 2] = blk
    return out


def self_energy_matrix(p, omegas, spectrum="exact", spec=quad.DEFAULT_SPEC):
    """Sigma~(w) for all pairs, shape (len(omegas), 2n, 2n)."""
    w = np.atleast_1d(np.asarray(omegas, float))
    return _assemble(p, lambda i, j: self_energy_freq_grid(p, i, j, w, spectrum, spec))


def dissipative_matrix(p, omegas, spectrum="exact"):
    w = np.atleast_1d(np.asarray(omegas, float))
    return _assemble(p, lambda i, j: imag_self_energy(p, i, j, w, spectrum))


def retarded_green_grid(p, omegas, spectrum="exact", spec=quad.DEFAULT_SPEC, check=False):
    """G~_R on a frequency grid, shape (N, 2n, 2n).

    Singular points are reported with a PoleWarning and returned as inf.
    """
    w = np.atleast_1d(np.asarray(omegas, float))
    if check and np.linalg.eigvalsh(positivity_matrix(p))[0] <= 0:
        warnings.warn("positivity condition fails for these parameters", PoleWarning)
    Minv = (-p.m * w[:, None, None] ** 2 * np.eye(2 * p.n) + potential_matrix(p)
            - self_energy_matrix(p, w, spectrum, spec))
    out = np.empty_like(Minv)
    for k, M in enumerate(Minv):
        if np.linalg.cond(M) > 1e14:
            warnings.warn(f"G_R has a pole at omega = {w[k]:.6g}", PoleWarning)
            out[k] = np.inf
        else:
            out[k] = np.linalg.inv(M)
    return out


def retarded_green_freq(p, omega, spectrum="exact", spec=quad.DEFAULT_SPEC, check=True):
    """G~_R(omega) as a 2n x 2n complex matrix (i0+ via Sigma~ = R + iI)."""
    return retarded_green_grid(p, [omega], spectrum, spec, check)[0]


# stationarity -----------------------------------------------------------

@dataclass
class StationarityResult:
    passes: bool
    status: str                  # "stationary", "bound_mode" or "inconclusive"
    roots: list
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passes

    def to_text(self):
        rows = [f"passes = {self.passes}", f"status = {self.status}",
                "roots = " + ", ".join(f"{r:.12g}" for r in self.roots)]
        rows += [f"{k} = {v}" for k, v in self.witness.items()]
        return "\n".join(rows)


def _re_inverse(p, lam, spectrum, spec):
    """Entrywise real part of V - Sigma~(lam), symmetrized; shape (N, 2n, 2n)."""
    M = np.real(potential_matrix(p)[None] - self_energy_matrix(p, lam, spectrum, spec))
    return 0.5 * (M + np.swapaxes(M, 1, 2))


def stationarity_check(p, n_grid=400, spectrum="exact", spec=quad.DEFAULT_SPEC, cutoff=None):
    """Search for real roots of Re G~_R^{-1}(l) = m l^2 and test them.

    Roots are the frequencies where an eigenvalue of
    Sym Re(V - Sigma~(l)) - m l^2 changes sign; they are bracketed on an
    linear plus geometric scan of (0, cutoff] and refined by bisection.  The
    check passes iff Sym Re(V - Sigma~(w_r)) - m kappa^2 is positive
    definite at every root.  Roots narrower than the grid spacing are
    missed (documented limitation).
    """
    k = abs(p.kappa)
    if cutoff is None:
        cutoff = max(1.5 * max(p.omegas), k + spec.upper_cutoff_multiplier * p.width)
    lo = 1e-3 * min(min(p.omegas), k or np.inf, p.width)
    lam = np.union1d(np.linspace(cutoff / n_grid, cutoff, n_grid), np.geomspace(lo, cutoff, n_grid))
    lam = np.where(np.isclose(lam, k, rtol=1e-9, atol=0), lam * (1 + 1e-6), lam)
    m = p.m
    eye = np.eye(2 * p.n)

    def n_neg(l):
        S = _re_inverse(p, np.atleast_1d(l), spectrum, spec) - m * np.atleast_1d(l)[:, None, None] ** 2 * eye
        return np.sum(np.linalg.eigvalsh(S) < 0, axis=-1)

    try:
        counts = n_neg(lam)
        roots = []
        for a, b, ca, cb in zip(lam[:-1], lam[1:], counts[:-1], counts[1:]):
            if ca == cb:
                continue
            lo, hi = a, b
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                if n_neg(mid)[0] == ca:
                    lo = mid
                else:
                    hi = mid
                if hi - lo < 1e-13 * hi:
                    break
            roots.append(0.5 * (lo + hi))
    except AccuracyError as exc:
        return StationarityResult(False, "inconclusive", [], {"error": str(exc)})

    witness = {}
    passes = True
    for r in roots:
        A = _re_inverse(p, [r], spectrum, spec)[0] - m * k * k * eye
        ev = float(np.linalg.eigvalsh(A)[0])
        witness[f"min_eig_at_{r:.6g}"] = ev
        passes &= ev > 0
    status = "stationary" if passes else "bound_mode"
    return StationarityResult(bool(passes), status, roots, witness)


# stationary correlators -------------------------------------------------

def stationary_correlators(p, omega, beta=None, spectrum="exact", spec=quad.DEFAULT_SPEC):
    """Spectral and statistical densities (delta(w - w') stripped).

    Lambda~ = 2i G I G^+,  Delta~ = -(i/2) coth(beta w/2) Lambda~.
    Vectorized: returns arrays of shape (N, 2n, 2n) for array input.
    """
    beta = p.beta if beta is None else beta
    w = np.atleast_1d(np.asarray(omega, float))
    G = retarded_green_grid(p, w, spectrum, spec)
    I = dissipative_matrix(p, w, spectrum)
    lam = 2j * G @ I @ np.conj(np.swapaxes(G, 1, 2))
    delta = -0.5j * coth_half(beta, w)[:, None, None] * lam
    if np.ndim(omega) == 0:
        return lam[0], delta[0]
    return lam, delta


def kms_time_check(p, taus, beta=None, spectrum="exact", n_omega=4001, omega_max=None,
                   spec=quad.DEFAULT_SPEC):
    """Max relative violation of C>(tau - i beta) = C<(tau).

    C> = <Q(tau) Q(0)> and C< = <Q(0) Q(tau)> are inverse transforms of
    the stationary densities.  The statistical part entering C< is
    built from the mode-occupation noise spectrum (1 + 2n) J / 2pi
    sandwiched by G, not from coth times Lambda~, so the check ties
    the two routes together.  Integrals use Simpson's rule.
    """
    from scipy.integrate import simpson

    beta = p.beta if beta is None else beta
    if np.isinf(beta):
        raise ValueError("KMS check needs finite beta")
    if omega_max is None:
        omega_max = abs(p.kappa) + spec.upper_cutoff_multiplier * p.width
    w = np.linspace(-omega_max, omega_max, n_omega)
    w = w[w != 0]
    G = retarded_green_grid(p, w, spectrum, spec)
    Gh = np.conj(np.swapaxes(G, 1, 2))
    lam = 2j * G @ dissipative_matrix(p, w, spectrum) @ Gh
    # symmetrized force spectrum from mode occupation
    aw = np.abs(w)
    nocc = 1.0 / np.expm1(beta * aw)

    def noise_block(i, j):
        Jw = _spectrum_fn(p, i, j, spectrum)(aw)
        pos = (w > 0)[:, None, None]
        return (1 + 2 * nocc)[:, None, None] * np.where(pos, np.conj(Jw), Jw) / (2 * np.pi)

    N = _assemble(p, noise_block)
    delta = G @ N @ Gh
    c_gt = (delta - 0.5j * lam) * np.exp(-beta * w)[:, None, None]
    c_lt = delta + 0.5j * lam
    taus = np.atleast_1d(np.asarray(taus, float))
    ph = np.exp(-1j * np.outer(taus, w))[:, :, None, None]
    lhs = simpson(ph * c_gt[None], x=w, axis=1)
    rhs = simpson(ph * c_lt[None], x=w, axis=1)
    return float(np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))


# Breit-Wigner reduction -------------------------------------------------

@dataclass
class BWCoefficients:
    """Markovian reduction; 2n x 2n matrices in (particle, component) order.

    ``Omega`` is the signed Hadamard square root of ``Omega_sq``: positive
    on the diagonal, sign(Omega_sq) * sqrt|Omega_sq| elsewhere.
    """

    Omega_sq: np.ndarray
    Gamma: np.ndarray
    Z: np.ndarray
    markov_valid: bool
    m: float = 1.0
    eval_freq: np.ndarray = None
    iterations: int = 0
    notes: list = field(default_factory=list)

    @property
    def Omega(self):
        return np.sign(self.Omega_sq) * np.sqrt(np.abs(self.Omega_sq))

    @property
    def n(self):
        return self.Omega_sq.shape[0] // 2

    def rotational_strength(self, i, j):
        """Omega_ij^2 with (Omega o2)^{12} = Z^{12} Omega_ij^2."""
        return self.Omega_sq[2 * i, 2 * j + 1] / self.Z[2 * i, 2 * j + 1]

    def inverse_green(self, omega):
        """Breit-Wigner G~^{-1}(w) = (2 pi m / Z) o (-w^2 I - 2 i w Gamma + Omega o2)."""
        w = complex(omega)
        eye = np.eye(2 * self.n)
        return 2 * np.pi * self.m / self.Z * (-w * w * eye - 2j * w * self.Gamma + self.Omega_sq)

    def to_csv(self, path):
        from .cli import write_csv

        rows = []
        for r in range(2 * self.n):
            for c in range(2 * self.n):
                rows.append([r // 2, r % 2 + 1, c // 2, c % 2 + 1, self.Omega_sq[r, c],
                             self.Gamma[r, c], self.Z[r, c]])
        write_csv(path, ["i", "alpha", "j", "beta", "omega_sq", "gamma", "z"], rows,
                  [f"markov_valid={self.markov_valid}", f"m={self.m}"])


def breit_wigner_reduce(p, spectrum="exact", relax=0.5, max_iter=100, tol=1e-12,
                        spec=quad.DEFAULT_SPEC, markov_threshold=0.1):
    """Self-consistent Markovian (Breit-Wigner) coefficients.

    Diagonal pole frequencies solve m Omega^2 = Re(V - Sigma~(Omega)) by
    damped iteration from the bare frequencies.  Every entry is then
    evaluated at the mean of its row and column pole frequencies:
        m Omega_sq = Re(V - Sigma~),  Gamma = Z Im Sigma~ / (4 pi m w),
        Z = 2 pi / (1 + m^{-1} d Re Sigma~ / d w^2).
    """
    n2 = 2 * p.n
    m = p.m
    V = potential_matrix(p)
    idx = np.arange(n2)
    Om = np.repeat(np.asarray(p.omegas, float), 2)
    it = 0
    for it in range(1, max_iter + 1):
        S = self_energy_matrix(p, Om, spectrum, spec)
        target = np.real(V[idx, idx] - S[np.arange(n2), idx, idx]) / m
        if np.any(target <= 0):
            raise RegimeError("no real pole frequency: renormalized Omega^2 <= 0")
        new = (1 - relax) * Om + relax * np.sqrt(target)
        done = np.max(np.abs(new - Om) / Om) < tol
        Om = new
        if done:
            break
    else:
        raise RegimeError(f"Breit-Wigner fixed point did not converge in {max_iter} iterations")

    wstar = 0.5 * (Om[:, None] + Om[None, :])
    freqs = np.unique(wstar)
    h = 1e-4 * freqs
    S0 = self_energy_matrix(p, freqs, spectrum, spec)
    Sp = self_energy_matrix(p, freqs + h, spectrum, spec)
    Sm = self_energy_matrix(p, freqs - h, spectrum, spec)
    pos = np.searchsorted(freqs, wstar)
    r, c = np.meshgrid(idx, idx, indexing="ij")
    sig = S0[pos, r, c]
    dre = np.real(Sp[pos, r, c] - Sm[pos, r, c]) / (2 * h[pos]) / (2 * wstar)
    Omega_sq = np.real(V - sig) / m
    Z = 2 * np.pi / (1 + dre / m)
    Gamma = Z * np.imag(sig) / (4 * np.pi * m * wstar)

    notes = [f"pole frequencies {np.array2string(Om, precision=10)}"]
    valid = True
    for i in range(p.n):
        for a in range(2):
            d = 2 * i + a
            g_ratio = Gamma[d, d] / np.sqrt(Omega_sq[d, d])
            valid &= Gamma[d, d] > 0 and Omega_sq[d, d] > 0 and g_ratio < markov_threshold
            o = 2 * i + 1 - a
            valid &= np.sqrt(abs(Omega_sq[d, o])) < Gamma[d, d]
    if not valid:
        notes.append("Markovian validity condition violated")
    return BWCoefficients(Omega_sq, Gamma, Z, bool(valid), m, wstar, it, notes)
