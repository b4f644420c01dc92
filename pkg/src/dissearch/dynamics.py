"""Population dynamics under the master equation ``dp/dt = A p``."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import bisect

from . import kernels
from .exceptions import ModelError
from .spectral import SpectralDecomposition, decompose

NEG_TOL = 1e-12


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    populations: np.ndarray  # (len(times), N)
    min_raw: float = 0.0  # most negative entry before clamping
    hit: tuple = None  # (threshold, time)

    @property
    def p1(self):
        return self.populations[:, 0]


@dataclass(frozen=True)
class Hit:
    threshold: float
    time: float
    reached: bool
    p1_eq: float


@dataclass(frozen=True)
class GillespieResult:
    times: np.ndarray
    populations: np.ndarray
    stderr: np.ndarray
    n_traj: int
    seed: int


def uniform_start(N):
    return np.full(N, 1.0 / N)


def _as_decomposition(generator, decomp):
    if decomp is not None:
        return decomp
    if isinstance(generator, SpectralDecomposition):
        return generator
    return decompose(generator)


def _check_p0(p0, N):
    p0 = np.asarray(p0, dtype=np.float64)
    if p0.shape != (N,):
        raise ModelError(f"initial populations must have shape ({N},), got {p0.shape}")
    if (p0 < 0).any() or abs(p0.sum() - 1.0) > 1e-10:
        raise ModelError("initial populations must be nonnegative and sum to 1")
    return p0


def propagate(generator, p0, times, decomp=None):
    """Exact spectral propagation ``p(t) = Σ_k e^{α_k t} R_k <L_k|p0>``.

    ``generator`` may also be a precomputed
    :class:`~dissearch.spectral.SpectralDecomposition`.
    """
    d = _as_decomposition(generator, decomp)
    p0 = _check_p0(p0, d.N)
    times = np.asarray(times, dtype=np.float64)
    if times.ndim != 1 or (times < 0).any() or (np.diff(times) < 0).any():
        raise ModelError("times must be a nondecreasing sequence of nonnegative values")
    c = d.modal_coefficients(p0)
    modes = np.exp(np.outer(d.alphas, times)) * c[:, None]
    P = (d.sqrt_w[:, None] * (d.U @ modes)).T
    min_raw = float(P.min()) if P.size else 0.0
    np.clip(P, 0.0, None, out=P)
    P /= P.sum(axis=1, keepdims=True)
    P[times == 0.0] = p0
    return Trajectory(times=times, populations=P, min_raw=min_raw)


def _p1_function(d, p0):
    c = d.modal_coefficients(p0)
    row0 = d.sqrt_w[0] * d.U[0, :]
    total = d.sqrt_w @ d.U

    def p1(t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        m = np.exp(np.outer(t, d.alphas)) * c[None, :]
        return (m @ row0) / (m @ total)

    return p1


def hitting_time(generator, p0, threshold, t_max=None, decomp=None, grid_per_tau=64):
    """First time the ground-state population reaches ``threshold``.

    A coarse grid of step ``τ_rlx / grid_per_tau`` brackets the first
    crossing, which is then refined by bisection to ``1e-6`` relative.
    """
    if not 0.0 < threshold < 1.0:
        raise ModelError(f"threshold must lie in (0, 1), got {threshold}")
    d = _as_decomposition(generator, decomp)
    p0 = _check_p0(p0, d.N)
    p1_eq = float(d.gibbs[0])
    if p0[0] >= threshold:
        return Hit(threshold, 0.0, True, p1_eq)
    if p1_eq < threshold:
        return Hit(threshold, math.nan, False, p1_eq)

    tau = 1.0 / abs(d.alphas[1])
    if t_max is None:
        t_max = tau * (10.0 + math.log(max(1.0, 1.0 / (p1_eq - threshold + 1e-300))))
    p1 = _p1_function(d, p0)
    h = tau / grid_per_tau
    t_lo = 0.0
    chunk = 4096
    while t_lo < t_max:
        ts = t_lo + h * np.arange(1, chunk + 1)
        if ts[-1] >= t_max:
            ts = np.append(ts[ts < t_max], t_max)
        above = np.flatnonzero(p1(ts) >= threshold)
        if above.size:
            i = above[0]
            lo = ts[i - 1] if i > 0 else t_lo
            t_hit = bisect(lambda t: p1(t)[0] - threshold, lo, ts[i], xtol=1e-12, rtol=1e-10)
            return Hit(threshold, float(t_hit), True, p1_eq)
        t_lo = ts[-1]
    return Hit(threshold, math.nan, False, p1_eq)


def gillespie_sample(rates, start=None, t_grid=(0.0,), n_traj=1000, seed=0):
    """Empirical level occupations from ``n_traj`` independent trajectories.

    ``start`` is a 1-based level rank, a probability vector, or ``None`` for
    the uniform distribution. Each trajectory draws from its own counter-based
    stream keyed by ``(seed, trajectory index)``.
    """
    N = rates.N
    if n_traj < 1:
        raise ModelError("n_traj must be >= 1")
    if start is None:
        p_start = uniform_start(N)
    elif np.ndim(start) == 0:
        k = int(start)
        if not 1 <= k <= N:
            raise ModelError(f"start level must lie in [1, {N}], got {k}")
        p_start = np.zeros(N)
        p_start[k - 1] = 1.0
    else:
        p_start = _check_p0(start, N)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if (t_grid < 0).any() or (np.diff(t_grid) < 0).any():
        raise ModelError("t_grid must be nondecreasing and nonnegative")

    out_cdf = np.cumsum(rates.rates.T, axis=1)
    start_cdf = np.cumsum(p_start)
    states = kernels.gillespie_states(out_cdf, start_cdf, t_grid, n_traj, seed)
    counts = np.stack([np.bincount(states[:, g], minlength=N) for g in range(t_grid.size)])
    p = counts / float(n_traj)
    stderr = np.sqrt(p * (1.0 - p) / n_traj)
    return GillespieResult(times=t_grid, populations=p, stderr=stderr, n_traj=int(n_traj),
                           seed=int(seed))


def integrate_rk45(generator, p0, times, rtol=1e-11, atol=1e-14):
    """Adaptive Runge-Kutta 4(5) solution; a cross-check for :func:`propagate`."""
    A = generator.A
    times = np.asarray(times, dtype=np.float64)
    sol = solve_ivp(lambda t, p: A @ p, (0.0, float(times[-1])), np.asarray(p0, float),
                    method="RK45", t_eval=times, rtol=rtol, atol=atol)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y.T


# -- degenerate model (no auxiliary splitting) ------------------------------


def degenerate_rate(N, beta_eps, v=1.0):
    """``1/τ_rlx = (v/N)(1 + (N-1)e^{βε}) / (1 + e^{βε})``."""
    x = math.exp(beta_eps)
    return v / N * (1.0 + (N - 1) * x) / (1.0 + x)


def degenerate_p1_eq(N, beta_eps):
    return 1.0 / (1.0 + (N - 1) * math.exp(beta_eps))


def degenerate_p1(t, N, beta_eps, v=1.0, p1_0=None):
    """Closed-form ground population; starts from ``1/N`` by default."""
    if p1_0 is None:
        p1_0 = 1.0 / N
    p_eq = degenerate_p1_eq(N, beta_eps)
    return p_eq + (p1_0 - p_eq) * np.exp(-degenerate_rate(N, beta_eps, v) * np.asarray(t))


def degenerate_hitting_time(N, beta_eps, threshold, v=1.0, p1_0=None):
    if p1_0 is None:
        p1_0 = 1.0 / N
    p_eq = degenerate_p1_eq(N, beta_eps)
    if p1_0 >= threshold:
        return 0.0
    if p_eq <= threshold:
        return math.nan
    return math.log((p1_0 - p_eq) / (threshold - p_eq)) / degenerate_rate(N, beta_eps, v)
