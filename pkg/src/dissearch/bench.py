"""Timing of the numba kernels against their numpy fallbacks.

    python -m dissearch.bench --n 500 --n-traj 20000
"""
import argparse
import json
import time

import numpy as np

from . import _accel, kernels
from .generator import glauber_rates
from .spectrum import ModelParams, build_spectrum


def _best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def run_benchmarks(N=500, n_traj=20000, repeat=3, seed=0):
    spectrum = build_spectrum(ModelParams.from_products(N, 1.2, 2.0))
    e, ranks = spectrum.energies, spectrum.ranks()
    rates = glauber_rates(spectrum)
    out_cdf = np.cumsum(rates.rates.T, axis=1)
    start_cdf = np.cumsum(np.full(N, 1.0 / N))
    t_grid = np.array([2.0, 5.0, 10.0])

    results = []
    if not _accel.HAVE_NUMBA:
        return results
    # compile outside the timed region
    kernels._glauber_numba(e[:4].copy(), ranks[:4].copy(), 1.0, 1.0)
    kernels._gillespie_numba(out_cdf, start_cdf, t_grid, 2, np.uint64(seed))

    t_np, (r_np, _) = _best_of(lambda: kernels._glauber_numpy(e, ranks, 1.0, 1.0), repeat)
    t_nb, (r_nb, _) = _best_of(lambda: kernels._glauber_numba(e, ranks, 1.0, 1.0), repeat)
    results.append({
        "kernel": "glauber_fill", "N": N, "numpy_s": t_np, "numba_s": t_nb,
        "speedup": t_np / t_nb,
        "max_rel_diff": float(np.max(np.abs(r_np - r_nb) / np.maximum(r_np, 1e-300))),
    })

    t_np, s_np = _best_of(
        lambda: kernels._gillespie_numpy(out_cdf, start_cdf, t_grid, n_traj, seed), repeat)
    t_nb, s_nb = _best_of(
        lambda: kernels._gillespie_numba(out_cdf, start_cdf, t_grid, n_traj, np.uint64(seed)),
        repeat)
    results.append({
        "kernel": "gillespie_states", "N": N, "n_traj": n_traj, "numpy_s": t_np,
        "numba_s": t_nb, "speedup": t_np / t_nb,
        "identical_fraction": float(np.mean(s_np == s_nb)),
    })
    return results


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--n-traj", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    for row in run_benchmarks(args.n, args.n_traj, args.repeat):
        print(json.dumps(row))


if __name__ == "__main__":
    main()
