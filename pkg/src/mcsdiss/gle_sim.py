"""Time-domain Langevin integration and classical ensembles.

Deterministic runs integrate

    m q'' + V q + F q' - int_0^t Sigma(t - s) q(s) ds = f(t)

with velocity Verlet and a trapezoidal memory sum.  Stochastic runs use
the Markovian (Breit-Wigner) equation

    M q'' + F q' + K q = xi(t),

propagated exactly over each step for piecewise-constant forcing.  The
classical noise has the spectral matrix fixed by the fluctuation-
dissipation relation in the 2/(beta w) limit,

    S(w) = (F + F^T)/beta + i (K - K^T)/(beta w),

whose antisymmetric part is the sgn(t - t') (1/f) cross noise.  It is
synthesized in the frequency domain with an IR cutoff.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh, expm

from .errors import DomainError, RegimeError
from .greens import BWCoefficients, potential_matrix
from .single_osc import SOParams
from .statics import _frame

__all__ = [
    "StepSizeError",
    "EquilibrationWarning",
    "TrajectoryGrid",
    "solve_deterministic",
    "markov_system",
    "psd_cutoff",
    "sample_noise_classical",
    "ensemble_msd",
]


class StepSizeError(RegimeError):
    """Trajectory blew up although the parameters are stationary."""


class EquilibrationWarning(RuntimeWarning):
    pass


@dataclass
class TrajectoryGrid:
    dt: float
    n_steps: int
    positions: np.ndarray      # (n_steps + 1, 2n)
    velocities: np.ndarray
    seed: int = None
    meta: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.dt * np.arange(self.n_steps + 1)

    def to_csv(self, path):
        from .cli import write_csv

        n2 = self.positions.shape[1]
        cols = ["t"] + [f"q{k // 2}_{k % 2 + 1}" for k in range(n2)] + \
               [f"v{k // 2}_{k % 2 + 1}" for k in range(n2)]
        rows = np.column_stack([self.times, self.positions, self.velocities])
        write_csv(path, cols, rows, [f"dt={self.dt}", f"seed={self.seed}"])


# deterministic solver ---------------------------------------------------

def _kernel_array(p, kernel, dt, n_steps):
    """Lab-frame Sigma(k dt), shape (L, 2n, 2n), truncated at 1e-12 of its peak."""
    n2 = 2 * p.n
    if kernel is None:
        return np.zeros((0, n2, n2))
    if isinstance(kernel, np.ndarray):
        K = np.asarray(kernel, float)
        if K.ndim != 3 or K.shape[1:] != (n2, n2):
            raise DomainError("kernel array must have shape (L, 2n, 2n)")
    else:
        grids = {(0, 0): kernel} if not isinstance(kernel, dict) else kernel
        t = dt * np.arange(n_steps + 1)
        K = np.zeros((n_steps + 1, n2, n2))
        for (i, j), g in grids.items():
            pts = np.asarray(g.points, float)
            if len(pts) > 1 and np.max(np.diff(pts)) > dt * (1 + 1e-9):
                raise DomainError("kernel must be sampled at least as finely as dt")
            R, _ = _frame(p, i, j)
            vals = np.stack([np.interp(t, pts, g.values[:, a, b].real, right=0.0)
                             for a in range(2) for b in range(2)], axis=-1).reshape(-1, 2, 2)
            # samples before the causality lag stay zero
            vals[t < g.causality_lag] = 0.0
            K[:, 2 * i:2 * i + 2, 2 * j:2 * j + 2] = R @ vals @ R.T
    env = np.max(np.abs(K), axis=(1, 2))
    if env.size and env.max() > 0:
        keep = np.nonzero(env >= 1e-12 * env.max())[0]
        K = K[:keep[-1] + 1]
    return K


def solve_deterministic(p, kernel=None, drive=None, q0=None, v0=None, dt=1e-3, n_steps=1000,
                        potential=None, friction=None):
    """Integrate the deterministic Langevin equation on a uniform grid.

    Parameters
    ----------
    p : ModelParams
    kernel : KernelGrid, dict {(i, j): KernelGrid} or array (L, 2n, 2n), optional
        Memory kernel; pair-frame grids are rotated to the lab frame.
    drive : callable t -> 2n-vector, optional
    q0, v0 : 2n-vectors
    potential : (2n, 2n) array, optional
        Replaces the renormalized potential V of ``p``.
    friction : (2n, 2n) array, optional
        Local velocity term F q' (Markovian damping).

    Returns
    -------
    TrajectoryGrid
    """
    if not dt > 0 or n_steps < 1:
        raise DomainError("need dt > 0 and n_steps >= 1")
    n2 = 2 * p.n
    m = p.m
    V = potential_matrix(p) if potential is None else np.asarray(potential, float)
    Fr = np.zeros((n2, n2)) if friction is None else np.asarray(friction, float)
    q = np.zeros((n_steps + 1, n2))
    v = np.zeros((n_steps + 1, n2))
    q[0] = 0.0 if q0 is None else q0
    v[0] = 0.0 if v0 is None else v0
    K = _kernel_array(p, kernel, dt, n_steps) * dt
    L = len(K)
    f = (lambda t: np.zeros(n2)) if drive is None else (lambda t: np.asarray(drive(t), float))

    def memory(k):
        # trapezoid over s in [0, t_k]: weights 1/2 at both ends
        if L == 0 or k == 0:
            return np.zeros(n2)
        lo = max(0, k - L + 1)
        lags = k - np.arange(lo, k + 1)
        acc = np.einsum("lab,lb->a", K[lags], q[lo:k + 1])
        acc -= 0.5 * K[0] @ q[k]
        if lo == 0:
            acc -= 0.5 * K[k] @ q[0]
        return acc

    implicit = np.eye(n2) + 0.5 * dt / m * Fr
    a = (f(0.0) - V @ q[0] + memory(0) - Fr @ v[0]) / m
    scale = max(np.max(np.abs(q[0])), np.max(np.abs(v[0])) * dt, 1e-300)
    for k in range(n_steps):
        q[k + 1] = q[k] + dt * v[k] + 0.5 * dt * dt * a
        t1 = (k + 1) * dt
        conservative = (f(t1) - V @ q[k + 1] + memory(k + 1)) / m
        v[k + 1] = np.linalg.solve(implicit, v[k] + 0.5 * dt * (a + conservative))
        a = conservative - Fr @ v[k + 1] / m
        if not np.all(np.isfinite(q[k + 1])) or np.max(np.abs(q[k + 1])) > 1e6 * max(scale, 1.0):
            raise StepSizeError(f"trajectory diverged at t = {t1:.6g}; reduce dt")
    return TrajectoryGrid(dt, n_steps, q, v)


# Markovian system and classical noise ------------------------------------

def markov_system(src):
    """(mass, friction, stiffness) matrices of M q'' + F q' + K q = xi."""
    if isinstance(src, SOParams):
        m = src.m
        return (m * np.eye(2), 2 * m * src.Gamma0 * np.eye(2),
                m * np.array([[src.Omega0 ** 2, src.c], [-src.c, src.Omega0 ** 2]]))
    if isinstance(src, BWCoefficients):
        w = 2 * np.pi * src.m / src.Z
        return np.diag(np.diag(w)), 2 * w * src.Gamma, w * src.Omega_sq
    raise DomainError("expected SOParams or BWCoefficients")


def _spectra(src, beta):
    M, F, K = markov_system(src)
    W = (F + F.T) / beta
    A = (K - K.T) / beta          # S(w) = W + i A / w
    return M, F, K, W, A


def psd_cutoff(src, beta):
    """Smallest frequency above which W + i A / w is positive semidefinite."""
    _, _, _, W, A = _spectra(src, beta)
    if not np.any(A):
        return 0.0
    mu = eigh(1j * A, W, eigvals_only=True)
    return float(np.max(np.abs(mu)))


def _default_omega0(src):
    M, _, K, _, _ = _spectra(src, 1.0)
    return float(np.sqrt(np.min(np.diag(K) / np.diag(M))))


def _check_psd(W, A, freqs, cutoff):
    for w in np.unique(np.abs(freqs[np.abs(freqs) > cutoff])):
        S = W + 1j * A / w
        lam = np.linalg.eigvalsh(S)[0]
        if lam < -1e-12 * np.max(np.abs(W)):
            raise RegimeError(f"noise spectral matrix not positive semidefinite at omega = {w:.6g} "
                              f"(smallest eigenvalue {lam:.3g}); raise ir_cutoff")


def _synthesize(W, A, dt, n_steps, rng, n_samples, cutoff, n_fft):
    n2 = W.shape[0]
    freqs = 2 * np.pi * np.fft.fftfreq(n_fft, dt)
    with np.errstate(divide="ignore"):
        cross = np.where(np.abs(freqs) > cutoff, 1.0 / freqs, 0.0)
    S = W[None] + 1j * A[None] * cross[:, None, None]
    # Hermitian square root per frequency, S A A^+ = S dw / 2pi
    lam, U = np.linalg.eigh(S)
    lam = np.clip(lam, 0.0, None)
    dw = 2 * np.pi / (n_fft * dt)
    root = U * np.sqrt(lam * dw / (2 * np.pi))[:, None, :]
    z = rng.standard_normal((n_samples, n_fft, n2)) + 1j * rng.standard_normal((n_samples, n_fft, n2))
    B = np.einsum("fab,sfb->sfa", root, z)
    return np.fft.fft(B, axis=1).real[:, :n_steps]


def sample_noise_classical(src, beta, dt, n_steps, seed=0, ir_cutoff=None, n_samples=1):
    """Stationary classical noise sequence, shape (n_samples, n_steps, 2n).

    The diagonal white level (F + F^T)/beta appears as variance
    level/dt per step.  The 1/w cross spectrum is kept for |w| above
    ``ir_cutoff`` (default Omega0/1000) and must be positive
    semidefinite there, else a RegimeError names the frequency.
    """
    if not (dt > 0 and n_steps >= 1 and beta > 0 and np.isfinite(beta)):
        raise DomainError("need dt > 0, n_steps >= 1 and finite beta > 0")
    cutoff = _default_omega0(src) / 1000 if ir_cutoff is None else float(ir_cutoff)
    if not cutoff > 0:
        raise DomainError("ir_cutoff must be > 0")
    _, _, _, W, A = _spectra(src, beta)
    n_fft = 2 * n_steps
    _check_psd(W, A, 2 * np.pi * np.fft.fftfreq(n_fft, dt), cutoff)
    rng = np.random.default_rng(seed)
    return _synthesize(W, A, dt, n_steps, rng, n_samples, cutoff, n_fft)


def _propagator(M, F, K, dt):
    """Exact one-step map X -> Phi X + Psi xi for piecewise-constant xi."""
    n2 = M.shape[0]
    Minv = np.linalg.inv(M)
    G = np.zeros((2 * n2, 2 * n2))
    G[:n2, n2:] = np.eye(n2)
    G[n2:, :n2] = -Minv @ K
    G[n2:, n2:] = -Minv @ F
    B = np.zeros((2 * n2, n2))
    B[n2:] = Minv
    aug = np.zeros((3 * n2, 3 * n2))
    aug[:2 * n2, :2 * n2] = G * dt
    aug[:2 * n2, 2 * n2:] = B * dt
    E = expm(aug)
    return E[:2 * n2, :2 * n2], E[:2 * n2, 2 * n2:]


def ensemble_msd(src, beta, n_traj=10_000, dt=None, t_total=None, seed=0, ir_cutoff=None,
                 batch=500, component=0, return_info=False):
    """Equilibrium position variance from a classical Markovian ensemble.

    Each trajectory starts at rest, runs for ``t_total`` (default
    30/Gamma) and contributes the time average of q^2 over its last 20%.
    Both components of the chosen particle are averaged.  The standard
    error comes from batch means over 20 trajectory groups.

    Returns
    -------
    msd, stderr : float
    info : dict, only with ``return_info``
    """
    M, F, K, W, A = _spectra(src, beta)
    n2 = M.shape[0]
    if np.any(np.real(np.linalg.eigvals(np.linalg.solve(M, K))) <= 0):
        raise RegimeError("stiffness has no stable equilibrium")
    gamma = float(np.min(np.diag(F) / (2 * np.diag(M))))
    om0 = _default_omega0(src)
    if isinstance(src, SOParams) and not src.decays:
        raise RegimeError("Omega_CS^4 >= 4 Gamma0^2 Omega0^2: no decay")
    dt = 0.05 / om0 if dt is None else dt
    t_total = 30 / gamma if t_total is None else t_total
    n_steps = int(np.ceil(t_total / dt))
    cutoff = max(om0 / 1000, psd_cutoff(src, beta) * (1 + 1e-9)) if ir_cutoff is None else ir_cutoff
    n_fft = 2 * n_steps
    _check_psd(W, A, 2 * np.pi * np.fft.fftfreq(n_fft, dt), cutoff)
    Phi, Psi = _propagator(M, F, K, dt)
    tail0 = int(0.8 * n_steps)
    comps = [2 * component, 2 * component + 1]
    per_traj = []
    halves = []
    n_batches = int(np.ceil(n_traj / batch))
    seeds = np.random.SeedSequence(seed).spawn(n_batches)
    for b, ss in enumerate(seeds):
        nb = min(batch, n_traj - b * batch)
        rng = np.random.default_rng(ss)
        xi = _synthesize(W, A, dt, n_steps, rng, nb, cutoff, n_fft)
        X = np.zeros((nb, 2 * n2))
        acc = np.zeros(nb)
        acc_h = np.zeros((nb, 2))
        for k in range(n_steps):
            X = X @ Phi.T + xi[:, k] @ Psi.T
            if k + 1 > tail0:
                sq = np.mean(X[:, comps] ** 2, axis=1)
                acc += sq
                acc_h[:, 0 if k + 1 <= (tail0 + n_steps) // 2 else 1] += sq
        if not np.all(np.isfinite(X)):
            raise StepSizeError("ensemble trajectories diverged; reduce dt")
        n_tail = n_steps - tail0
        per_traj.append(acc / n_tail)
        halves.append(acc_h)
    per_traj = np.concatenate(per_traj)
    groups = np.array_split(per_traj, 20)
    means = np.array([g.mean() for g in groups])
    msd = float(per_traj.mean())
    stderr = float(means.std(ddof=1) / np.sqrt(len(means)))
    h = np.concatenate(halves)
    drift = float(np.mean(h[:, 1] - h[:, 0]) / max(1, (n_steps - tail0) // 2))
    if abs(drift) > 3 * stderr:
        warnings.warn(f"batch means drift by {drift:.3g}; a longer run is needed",
                      EquilibrationWarning)
    info = {"dt": dt, "n_steps": n_steps, "t_total": n_steps * dt, "ir_cutoff": cutoff,
            "drift": drift, "n_traj": n_traj, "seed": seed}
    return (msd, stderr, info) if return_info else (msd, stderr)
