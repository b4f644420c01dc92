"""Command-line interface.

Rates and times are reported in units of ``v`` and ``1/v``; energies as the
dimensionless products ``βε``.
"""
import argparse
from dataclasses import dataclass, field
import json
import math
import os
import sys

import numpy as np

from . import __version__, _accel
from .dynamics import gillespie_sample, hitting_time, propagate, uniform_start
from .equilibrium import dominance_check, equilibrium_report
from .exceptions import DissearchError, ModelError
from .experiments import (
    FIG_N_GRID, POWER_N_GRID, THRESHOLD, ScanResult, fig1_data,
    fig2_log_scans, fig2_power_scans, fit_log, fit_powerlaw, tau_scan,
)
from .generator import build_generator, gamma_profile, glauber_rates
from .io import dumps_json, emit_plot, read_table, write_table
from .spectral import decompose, relaxation_time
from .spectrum import ModelParams, build_spectrum, degenerate_spectrum, spectral_gap


@dataclass
class RunConfig:
    command: str
    options: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args):
        # output locations are left out so identical runs write identical bytes
        skip = ("func", "command", "out", "out_dir", "plot")
        opts = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
        return cls(command=args.command, options=opts)

    def metadata(self, **extra):
        meta = {"command": self.command, "config": self.options, "version": __version__}
        meta.update(extra)
        return meta


# -- argument helpers --------------------------------------------------------


def _int_list(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _add_model(p, n_default=500):
    g = p.add_argument_group("model")
    g.add_argument("--n", type=int, default=n_default, help="number of levels N")
    g.add_argument("--a", type=float, default=1.2, help="auxiliary spectrum scale a")
    g.add_argument("--b", type=float, default=2.0, help="marker depth scale b")
    g.add_argument("--beta", type=float, default=1.0, help="inverse temperature")
    g.add_argument("--ell", type=int, default=None, help="sought index (default N)")
    g.add_argument("--v", type=float, default=1.0, help="bare relaxation rate")
    g.add_argument("--epsilon", type=float, default=None,
                   help="degenerate model: marked level at epsilon, others at 0 (ignores a, b, ell)")


def _add_output(p, fmt=True):
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    if fmt:
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def _model(args):
    """``(params or None, spectrum)`` from the model flags."""
    if args.epsilon is not None:
        if not args.beta > 0 or not args.v > 0:
            raise ModelError("beta and v must be positive")
        return None, degenerate_spectrum(args.n, args.epsilon)
    params = ModelParams(N=args.n, a=args.a, b=args.b, beta=args.beta, ell=args.ell, v=args.v)
    return params, build_spectrum(params, allow_ungapped=True)


def _generator(args):
    params, spectrum = _model(args)
    rates = glauber_rates(spectrum, beta=args.beta, v=args.v)
    return params, spectrum, rates, build_generator(rates)


def _emit(args, cfg, columns, rows, **meta):
    write_table(args.out, columns, rows, cfg.metadata(**meta), getattr(args, "format", "csv"))


def _emit_json(args, cfg, payload):
    doc = {"metadata": cfg.metadata(), **payload}
    text = dumps_json(doc)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)


# -- subcommands ---------------------------------------------------------------


def cmd_spectrum(args, cfg):
    params, spectrum = _model(args)
    e = spectrum.energies * args.beta
    rows = [(k + 1, int(spectrum.permutation[k]), float(e[k])) for k in range(spectrum.N)]
    gap = spectral_gap(spectrum) * args.beta if spectrum.N > 1 else math.nan
    meta = {"beta_gap": gap,
            "gapped": params.gapped if params else True,
            "dominant": dominance_check(params) if params else None}
    _emit(args, cfg, ["rank", "level", "beta_energy"], rows, **meta)


def cmd_equilibrium(args, cfg):
    params, spectrum = _model(args)
    if params is not None:
        rep = equilibrium_report(params)
    else:
        rep = equilibrium_report(spectrum=spectrum, beta=args.beta)
    payload = rep.as_dict()
    payload["N"] = spectrum.N
    _emit_json(args, cfg, {"equilibrium": payload})


def cmd_relax(args, cfg):
    _, spectrum, rates, gen = _generator(args)
    d = decompose(gen)
    p0 = uniform_start(spectrum.N)
    tau_v = relaxation_time(d) * args.v
    horizon_v = args.t_max if args.t_max else 5.0 * tau_v
    hit = hitting_time(d, p0, args.threshold, t_max=horizon_v / args.v if args.t_max else None)
    times = np.linspace(0.0, horizon_v, args.n_times) / args.v
    traj = propagate(d, p0, times)
    cols = ["t_v", "p1"]
    if args.full:
        cols += [f"p{k + 1}" for k in range(spectrum.N)]
        rows = [(float(t * args.v), *map(float, p)) for t, p in zip(times, traj.populations)]
    else:
        rows = [(float(t * args.v), float(p)) for t, p in zip(times, traj.p1)]
    _emit(args, cfg, cols, rows, hit_time_v=hit.time * args.v, reached=hit.reached,
          p1_eq=hit.p1_eq, tau_v=tau_v)
    if args.plot:
        emit_plot({spectrum.N: (times * args.v, traj.p1)}, "p1", args.plot)


def cmd_gillespie(args, cfg):
    _, spectrum, rates, gen = _generator(args)
    t_grid = np.asarray(args.times) / args.v
    res = gillespie_sample(rates, start=args.start, t_grid=t_grid, n_traj=args.n_traj,
                           seed=args.seed)
    exact = propagate(gen, _start_vec(args, spectrum.N), t_grid)
    tv = 0.5 * np.abs(res.populations - exact.populations).sum(axis=1)
    rows = []
    for g, t in enumerate(args.times):
        for k in range(spectrum.N):
            rows.append((float(t), k + 1, float(res.populations[g, k]), float(res.stderr[g, k]),
                         float(exact.populations[g, k])))
    _emit(args, cfg, ["t_v", "rank", "p_sampled", "stderr", "p_spectral"], rows,
          tv_distance=[float(x) for x in tv], backend=_accel.backend_name())


def _start_vec(args, N):
    if args.start is None:
        return uniform_start(N)
    p = np.zeros(N)
    p[args.start - 1] = 1.0
    return p


def _scan_grid(args):
    ells = args.ell_mode
    grid = []
    for N in args.n_grid:
        ell = N if ells == "N" else (1 if ells == "1" else int(ells))
        grid.append(ModelParams(N=N, a=args.a, b=args.b, beta=args.beta, ell=ell, v=args.v))
    return grid


def cmd_tau_scan(args, cfg):
    res = tau_scan(_scan_grid(args), threshold=args.threshold, workers=_workers())
    cols, rows = res.table()
    _emit(args, cfg, cols, rows, grid=res.metadata["grid"])
    if args.plot:
        emit_plot({"scan": (res.column("N"), res.column("tau_v"))}, "tau", args.plot)


def cmd_fit(args, cfg):
    columns, rows, meta = read_table(args.input)
    res = ScanResult.from_table(columns, rows, meta)
    fitter = fit_log if args.regime == "log" else fit_powerlaw
    rep = fitter(res, y=args.column)
    _emit_json(args, cfg, {"fit": rep.as_dict(), "input": args.input})


def cmd_gamma(args, cfg):
    rows = []
    Ns = args.n_grid or [args.n]
    curves = {}
    for N in Ns:
        args_n = argparse.Namespace(**{**vars(args), "n": N})
        _, spectrum, rates, _ = _generator(args_n)
        prof = gamma_profile(rates)
        curves[N] = ([k for k, _ in prof], [g for _, g in prof])
        rows.extend((N, k, g) for k, g in prof)
    _emit(args, cfg, ["N", "rank", "gamma_over_v"], rows,
          gamma_max={str(N): max(curves[N][1]) for N in Ns})
    if args.plot:
        emit_plot(curves, "gamma", args.plot)


def cmd_reproduce_fig1(args, cfg):
    os.makedirs(args.out_dir, exist_ok=True)
    data = fig1_data(Ns=args.n_grid, a_beta=args.a_beta, b_beta=args.b_beta,
                     threshold=args.threshold, n_points=args.n_points)
    meta = cfg.metadata(seed=args.seed)
    p_rows = [(N, float(t), float(p)) for N, (ts, ps) in data["curves"].items()
              for t, p in zip(ts, ps)]
    g_rows = [(N, k, g) for N, prof in data["gammas"].items() for k, g in prof]
    files = {
        "fig1_p1.csv": (["N", "t_v", "p1"], p_rows),
        "fig1_gamma.csv": (["N", "rank", "gamma_over_v"], g_rows),
        "fig1_hitting.csv": (["N", "hit_time_v", "gamma_max", "tau_v", "status"], data["hits"]),
    }
    for name, (cols, rows) in files.items():
        write_table(os.path.join(args.out_dir, name), cols, rows, meta)
    hits = [h for h in data["hits"] if h[4] == "ok"]
    summary = {"files": sorted(files)}
    if len(hits) >= 4:
        summary["hitting_log_fit"] = fit_log(
            (np.array([h[0] for h in hits]), np.array([h[1] for h in hits]))).as_dict()
    if args.plot:
        emit_plot({N: c for N, c in data["curves"].items()}, "p1",
                  os.path.join(args.out_dir, "fig1_p1.svg"))
        emit_plot({N: ([k for k, _ in p], [g for _, g in p]) for N, p in data["gammas"].items()},
                  "gamma", os.path.join(args.out_dir, "fig1_gamma.svg"))
    sys.stdout.write(dumps_json(summary))


def cmd_reproduce_fig2(args, cfg):
    os.makedirs(args.out_dir, exist_ok=True)
    meta = cfg.metadata(seed=args.seed)
    scans = {}
    if args.regime in ("log", "all"):
        scans.update({("log",) + k: v for k, v in fig2_log_scans(args.n_grid or FIG_N_GRID).items()})
    if args.regime in ("power", "all"):
        scans.update({("power",) + k: v for k, v in
                      fig2_power_scans(args.power_grid or POWER_N_GRID).items()})
    rows, fits, curves, curve_fits = [], [], {}, {}
    for (regime, ell, ab, bb), res in scans.items():
        for r in res.rows:
            rows.append((regime, *r.as_tuple()))
        rep = (fit_log if regime == "log" else fit_powerlaw)(res)
        label = f"{regime} ell={ell} a_beta={ab:g} b_beta={bb:g}"
        fits.append({"regime": regime, "ell": ell, "a_beta": ab, "b_beta": bb, **rep.as_dict()})
        curves[label] = (res.column("N"), res.column("tau_v"))
        curve_fits[label] = rep
    cols = ["regime", "N", "ell", "a_beta", "b_beta", "tau_v", "gamma_max", "p1_eq",
            "hit_time_v", "status"]
    name = f"fig2_{args.regime}"
    write_table(os.path.join(args.out_dir, name + "_scan.csv"), cols, rows, meta)
    report = {"metadata": meta, "fits": fits}
    with open(os.path.join(args.out_dir, name + "_fits.json"), "w", encoding="utf-8") as fh:
        fh.write(dumps_json(report))
    if args.plot:
        emit_plot(curves, "tau", os.path.join(args.out_dir, name + "_tau.svg"), fit=curve_fits)
    sys.stdout.write(dumps_json({"fits": fits}))


def cmd_bench(args, cfg):
    from .bench import run_benchmarks

    results = run_benchmarks(N=args.n, n_traj=args.n_traj, repeat=args.repeat)
    sys.stdout.write(dumps_json({"benchmarks": results}))


def _workers():
    raw = os.environ.get("DISSEARCH_NUM_THREADS")
    return max(1, int(raw)) if raw else 1


# -- parser -----------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="dissearch", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"dissearch {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="print levels, gap and dominance check")
    _add_model(p, n_default=10)
    _add_output(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("equilibrium", help="Gibbs success/error probabilities (JSON)")
    _add_model(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("relax", help="spectral propagation and hitting time")
    _add_model(p)
    p.add_argument("--threshold", type=float, default=THRESHOLD)
    p.add_argument("--t-max", type=float, default=None, help="time horizon in units of 1/v")
    p.add_argument("--n-times", type=int, default=101)
    p.add_argument("--full", action="store_true", help="write every population, not just p1")
    p.add_argument("--plot", default=None, help="SVG path for the p1(t) chart")
    _add_output(p)
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("gillespie", help="stochastic trajectories vs spectral propagation")
    _add_model(p)
    p.add_argument("--n-traj", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--times", type=_float_list, default=[2.0, 5.0, 10.0],
                   help="comma-separated times in units of 1/v")
    p.add_argument("--start", type=int, default=None, help="start rank (default uniform)")
    _add_output(p)
    p.set_defaults(func=cmd_gillespie)

    p = sub.add_parser("tau-scan", help="relaxation time over an N grid")
    _add_model(p)
    p.add_argument("--n-grid", type=_int_list, default=list(FIG_N_GRID))
    p.add_argument("--ell-mode", default="N", help="'N', '1', or a fixed integer index")
    p.add_argument("--threshold", type=float, default=THRESHOLD)
    p.add_argument("--plot", default=None)
    _add_output(p)
    p.set_defaults(func=cmd_tau_scan)

    p = sub.add_parser("fit", help="log or power-law fit of a tau-scan table")
    p.add_argument("--input", required=True, help="table written by tau-scan")
    p.add_argument("--regime", choices=("log", "power"), default="log")
    p.add_argument("--column", default="tau_v", choices=("tau_v", "hit_time_v"))
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("gamma", help="total escape rates γ_k / v")
    _add_model(p)
    p.add_argument("--n-grid", type=_int_list, default=None)
    p.add_argument("--plot", default=None)
    _add_output(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("reproduce-fig1", help="p1(t) curves, γ profiles, hitting times")
    p.add_argument("--n-grid", type=_int_list, default=list(FIG_N_GRID))
    p.add_argument("--a-beta", type=float, default=1.2)
    p.add_argument("--b-beta", type=float, default=2.0)
    p.add_argument("--threshold", type=float, default=THRESHOLD)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="fig1")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_reproduce_fig1)

    p = sub.add_parser("reproduce-fig2", help="relaxation-time scans and fits")
    p.add_argument("--regime", choices=("log", "power", "all"), default="all")
    p.add_argument("--n-grid", type=_int_list, default=None)
    p.add_argument("--power-grid", type=_int_list, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default="fig2")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_reproduce_fig2)

    p = sub.add_parser("bench", help="numba vs numpy kernel timings")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--n-traj", type=int, default=20000)
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return parser


def _validate(args):
    threshold = getattr(args, "threshold", 0.5)
    if not 0.0 < threshold < 1.0:
        raise ModelError(f"threshold must lie in (0, 1), got {args.threshold}")
    for name in ("n_traj", "n_times", "n_points", "repeat"):
        if getattr(args, name, 1) < 1:
            raise ModelError(f"--{name.replace('_', '-')} must be >= 1")
    if getattr(args, "ell_mode", "N") not in ("N", "1") and not str(args.ell_mode).isdigit():
        raise ModelError(f"--ell-mode must be 'N', '1' or an integer, got {args.ell_mode!r}")
    for name in ("a_beta", "b_beta"):
        if hasattr(args, name):
            ModelParams.from_products(2, max(getattr(args, name), 0.0), 1.0)
    if hasattr(args, "n") and hasattr(args, "a"):
        _model(args)  # full model validation before any heavy work


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = RunConfig.from_args(args)
    _accel.configure_threads()
    try:
        _validate(args)
    except ValueError as exc:
        parser.error(f"{args.command}: {exc}")
    try:
        args.func(args, cfg)
    except (DissearchError, ValueError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
