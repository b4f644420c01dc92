"""Hot inner loops: Glauber rate fill and continuous-time Markov chain sampling.

Every kernel has a numba version and a numpy version with the same
arithmetic; :mod:`dissearch._accel` decides which one the public wrappers
call. Random numbers come from a counter-based splitmix64 stream keyed by
``(seed, trajectory)``, so both backends see identical uniforms and a
trajectory's path does not depend on scheduling.
"""
import numpy as np

from . import _accel
from ._accel import njit, prange

# exponent beyond which an uphill Glauber factor is flushed to exactly zero
UNDERFLOW_EXPONENT = 700.0

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_ONE = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53


# --------------------------------------------------------------------------
# counter-based uniforms
# --------------------------------------------------------------------------


@njit(cache=True)
def _mix_scalar(z):
    z = np.uint64(z)
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@njit(cache=True)
def _stream_key_scalar(seed, j):
    return _mix_scalar(_mix_scalar(np.uint64(seed)) + (np.uint64(j) + _ONE) * _GOLDEN)


@njit(cache=True)
def _uniform_scalar(key, i):
    z = _mix_scalar(np.uint64(key) + (np.uint64(i) + _ONE) * _GOLDEN)
    return float(z >> _S11) * _INV53


def _mix_array(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> _S30)) * _MIX1
        z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


def stream_keys(seed, traj):
    """Per-trajectory stream keys (numpy, vectorised over ``traj``)."""
    traj = np.asarray(traj, dtype=np.uint64)
    base = _mix_array(np.array([seed], dtype=np.uint64))[0]
    with np.errstate(over="ignore"):
        return _mix_array(base + (traj + _ONE) * _GOLDEN)


def uniforms(keys, counters):
    """Uniform doubles in [0, 1) for draw ``counters`` of the given streams."""
    keys = np.asarray(keys, dtype=np.uint64)
    counters = np.asarray(counters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = _mix_array(keys + (counters + _ONE) * _GOLDEN)
    return (z >> _S11).astype(np.float64) * _INV53


# --------------------------------------------------------------------------
# Glauber rates
# --------------------------------------------------------------------------


@njit(cache=True)
def _glauber_numba(energies, ranks, beta, v):
    n = energies.shape[0]
    out = np.zeros((n, n))
    flushed = 0
    for k in range(n):
        for l in range(n):
            if k == l:
                continue
            x = beta * (energies[k] - energies[l])
            if x > UNDERFLOW_EXPONENT:
                flushed += 1
                continue
            if x > 0.0:
                e = np.exp(-x)
                f = e / (1.0 + e)
            else:
                f = 1.0 / (1.0 + np.exp(x))
            out[k, l] = v / max(ranks[k], ranks[l]) * f
    return out, flushed


def _glauber_numpy(energies, ranks, beta, v):
    x = beta * (energies[:, None] - energies[None, :])
    e = np.exp(-np.abs(x))
    f = np.where(x > 0.0, e / (1.0 + e), 1.0 / (1.0 + e))
    flushed_mask = x > UNDERFLOW_EXPONENT
    np.fill_diagonal(flushed_mask, False)
    f[flushed_mask] = 0.0
    out = v / np.maximum(ranks[:, None], ranks[None, :]) * f
    np.fill_diagonal(out, 0.0)
    return out, int(flushed_mask.sum())


def glauber_fill(energies, ranks, beta, v):
    """Dense Glauber rate matrix ``out[k, l]`` (rate l -> k) and flush count."""
    energies = np.ascontiguousarray(energies, dtype=np.float64)
    ranks = np.ascontiguousarray(ranks, dtype=np.float64)
    if _accel.USE_NUMBA:
        return _glauber_numba(energies, ranks, float(beta), float(v))
    return _glauber_numpy(energies, ranks, float(beta), float(v))


# --------------------------------------------------------------------------
# Gillespie sampling
# --------------------------------------------------------------------------


@njit(cache=True, parallel=True)
def _gillespie_numba(out_cdf, start_cdf, t_grid, n_traj, seed):
    n = out_cdf.shape[0]
    n_grid = t_grid.shape[0]
    states = np.empty((n_traj, n_grid), dtype=np.int32)
    for j in prange(n_traj):
        key = _stream_key_scalar(seed, j)
        i = 0
        u = _uniform_scalar(key, i)
        i += 1
        s = np.searchsorted(start_cdf, u * start_cdf[-1], side="right")
        if s > n - 1:
            s = n - 1
        t = 0.0
        g = 0
        while g < n_grid:
            gamma = out_cdf[s, n - 1]
            if gamma <= 0.0:
                while g < n_grid:
                    states[j, g] = s
                    g += 1
                break
            u = _uniform_scalar(key, i)
            i += 1
            t_next = t + (-np.log1p(-u)) / gamma
            while g < n_grid and t_grid[g] < t_next:
                states[j, g] = s
                g += 1
            if g >= n_grid:
                break
            u = _uniform_scalar(key, i)
            i += 1
            s_new = np.searchsorted(out_cdf[s], u * gamma, side="right")
            if s_new > n - 1:
                s_new = n - 1
            s = s_new
            t = t_next
    return states


def _gillespie_numpy(out_cdf, start_cdf, t_grid, n_traj, seed):
    n = out_cdf.shape[0]
    n_grid = t_grid.shape[0]
    states = np.empty((n_traj, n_grid), dtype=np.int32)
    keys = stream_keys(seed, np.arange(n_traj))
    counters = np.zeros(n_traj, dtype=np.uint64)

    u = uniforms(keys, counters)
    counters += _ONE
    s = np.minimum(np.searchsorted(start_cdf, u * start_cdf[-1], side="right"), n - 1)
    t = np.zeros(n_traj)
    g = np.zeros(n_traj, dtype=np.int64)
    live = np.arange(n_traj)

    while live.size:
        gamma = out_cdf[s[live], n - 1]
        stuck = gamma <= 0.0
        for j in live[stuck]:
            states[j, g[j]:] = s[j]
        live = live[~stuck]
        gamma = gamma[~stuck]
        if not live.size:
            break

        u = uniforms(keys[live], counters[live])
        counters[live] += _ONE
        t_next = t[live] + (-np.log1p(-u)) / gamma

        # fill grid points covered by the current holding interval
        g_new = np.searchsorted(t_grid, t_next, side="left")
        g_new = np.maximum(g_new, g[live])
        counts = g_new - g[live]
        total = int(counts.sum())
        if total:
            rows = np.repeat(live, counts)
            offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
            cols = np.repeat(g[live], counts) + offsets
            states[rows, cols] = s[rows]
        g[live] = g_new

        still = g_new < n_grid
        live = live[still]
        gamma = gamma[still]
        t_next = t_next[still]
        if not live.size:
            break

        u = uniforms(keys[live], counters[live])
        counters[live] += _ONE
        target = u * gamma
        current = s[live]
        nxt = np.empty_like(current)
        order = np.argsort(current, kind="stable")
        bounds = np.flatnonzero(np.diff(current[order])) + 1
        for block in np.split(order, bounds):
            k = current[block[0]]
            nxt[block] = np.searchsorted(out_cdf[k], target[block], side="right")
        s[live] = np.minimum(nxt, n - 1)
        t[live] = t_next
    return states


def gillespie_states(out_cdf, start_cdf, t_grid, n_traj, seed):
    """Sampled level index (0-based) of every trajectory at every grid time.

    ``out_cdf[k]`` is the running sum over destinations of the rates out of
    level ``k``; its last entry is the total escape rate.
    """
    out_cdf = np.ascontiguousarray(out_cdf, dtype=np.float64)
    start_cdf = np.ascontiguousarray(start_cdf, dtype=np.float64)
    t_grid = np.ascontiguousarray(t_grid, dtype=np.float64)
    if _accel.USE_NUMBA:
        return _gillespie_numba(out_cdf, start_cdf, t_grid, int(n_traj), np.uint64(seed))
    return _gillespie_numpy(out_cdf, start_cdf, t_grid, int(n_traj), int(seed))
