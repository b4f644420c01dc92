"""Scaling sweeps over N and the least-squares fits applied to them."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
import math

import numpy as np

from .dynamics import hitting_time, propagate, uniform_start
from .exceptions import DissearchError, ModelError
from .generator import build_generator, gamma_profile, glauber_rates
from .spectral import decompose, relaxation_time
from .spectrum import ModelParams, build_spectrum

FIG_N_GRID = (500, 1000, 1500, 2000, 2500, 3000, 3500)
POWER_N_GRID = (100, 200, 350, 500, 1000, 1500, 2000, 2500, 3000, 3500)
THRESHOLD = 0.95

LOG_REGIME = (1.2, 2.0)
INSENSITIVE_PAIRS = ((3.0, 4.0), (1.2, 4.0), (1.2, 5.0))
POWER_A_BETAS = (0.3, 0.6, 0.9)

SCAN_COLUMNS = ("N", "ell", "a_beta", "b_beta", "tau_v", "gamma_max", "p1_eq",
                "hit_time_v", "status")


@dataclass(frozen=True)
class ModelAnalysis:
    params: ModelParams
    spectrum: object
    rates: object
    generator: object
    decomp: object

    @property
    def tau_v(self):
        return relaxation_time(self.decomp) * self.params.v


def analyze(params):
    """Spectrum, rates, generator and eigendecomposition for one model."""
    spectrum = build_spectrum(params, allow_ungapped=True)
    rates = glauber_rates(spectrum)
    gen = build_generator(rates)
    return ModelAnalysis(params, spectrum, rates, gen, decompose(gen))


@dataclass(frozen=True)
class ScanRow:
    N: int
    ell: int
    a_beta: float
    b_beta: float
    tau_v: float
    gamma_max: float
    p1_eq: float
    hit_time_v: float
    status: str = "ok"

    def as_tuple(self):
        return tuple(getattr(self, c) for c in SCAN_COLUMNS)


@dataclass
class ScanResult:
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name, ok_only=True):
        rows = [r for r in self.rows if r.status != "error"] if ok_only else self.rows
        return np.array([getattr(r, name) for r in rows], dtype=float)

    def table(self):
        return list(SCAN_COLUMNS), [r.as_tuple() for r in self.rows]

    @classmethod
    def from_table(cls, columns, rows, metadata=None):
        idx = {c: i for i, c in enumerate(columns)}
        out = []
        for r in rows:
            kw = {c: r[idx[c]] for c in SCAN_COLUMNS if c in idx}
            kw["N"] = int(kw["N"])
            kw["ell"] = int(kw["ell"])
            for c in ("a_beta", "b_beta", "tau_v", "gamma_max", "p1_eq", "hit_time_v"):
                kw[c] = float(kw.get(c, math.nan))
            kw["status"] = str(kw.get("status", "ok"))
            out.append(ScanRow(**kw))
        return cls(rows=out, metadata=dict(metadata or {}))


@dataclass(frozen=True)
class FitReport:
    """``model='log'``: ``y = slope ln N + intercept``;
    ``model='power'``: ``ln y = slope ln(N/100) + intercept`` (slope is κ)."""

    model: str
    slope: float
    intercept: float
    r2: float
    max_rel_residual: float
    n_points: int

    @property
    def kappa(self):
        return self.slope if self.model == "power" else math.nan

    def as_dict(self):
        return asdict(self)


def _scan_row(params, threshold):
    try:
        m = analyze(params)
        hit = hitting_time(m.decomp, uniform_start(params.N), threshold)
        status = "ok" if hit.reached else "not_reached"
        return ScanRow(
            N=params.N, ell=params.ell, a_beta=params.a_beta, b_beta=params.b_beta,
            tau_v=m.tau_v, gamma_max=float(m.rates.gammas.max() / params.v),
            p1_eq=float(m.decomp.gibbs[0]), hit_time_v=hit.time * params.v, status=status,
        )
    except DissearchError as exc:
        return ScanRow(N=params.N, ell=params.ell, a_beta=params.a_beta,
                       b_beta=params.b_beta, tau_v=math.nan, gamma_max=math.nan,
                       p1_eq=math.nan, hit_time_v=math.nan,
                       status=f"error: {type(exc).__name__}: {exc}")


def tau_scan(grid, threshold=THRESHOLD, workers=1):
    """One row per model: ``τ_rlx v``, ``max γ/v``, ``p1_eq`` and hitting time.

    Rows keep grid order regardless of ``workers``; failures are recorded in
    the ``status`` column and the scan continues.
    """
    grid = list(grid)
    for p in grid:
        if not isinstance(p, ModelParams):
            raise ModelError("grid entries must be ModelParams")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _scan_row(p, threshold), grid))
    else:
        rows = [_scan_row(p, threshold) for p in grid]
    rows.sort(key=lambda r: r.N)
    meta = {
        "grid": [asdict(p) for p in grid],
        "threshold": threshold,
    }
    return ScanResult(rows=rows, metadata=meta)


hitting_scan = tau_scan


def n_grid(params, Ns):
    """Copies of ``params`` at each size, with ``ell`` tracking N when ``ell == N``."""
    return [params.with_N(N) for N in Ns]


def _xy(result, y):
    if isinstance(result, ScanResult):
        ok = [r for r in result.rows if r.status == "ok" or
              (y == "tau_v" and r.status == "not_reached")]
        N = np.array([r.N for r in ok], dtype=float)
        Y = np.array([getattr(r, y) for r in ok], dtype=float)
    else:
        N, Y = (np.asarray(a, dtype=float) for a in result)
    good = np.isfinite(Y)
    return N[good], Y[good]


def _ols(x, y):
    if x.size < 4:
        raise ModelError(f"fit needs at least 4 points, got {x.size}")
    if np.ptp(x) == 0:
        raise ModelError("degenerate design: all N are equal")
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), min(max(r2, 0.0), 1.0), resid


def fit_log(result, y="tau_v"):
    """OLS of ``y`` against ``ln N``. ``result`` is a scan or an ``(N, y)`` pair."""
    N, Y = _xy(result, y)
    slope, intercept, r2, resid = _ols(np.log(N), Y)
    return FitReport("log", slope, intercept, r2,
                     float(np.max(np.abs(resid / Y))), int(N.size))


def fit_powerlaw(result, y="tau_v"):
    """OLS of ``ln y`` against ``ln(N/100)``."""
    N, Y = _xy(result, y)
    lx, ly = np.log(N / 100.0), np.log(Y)
    slope, intercept, r2, resid = _ols(lx, ly)
    return FitReport("power", slope, intercept, r2,
                     float(np.max(np.abs(np.expm1(-resid)))), int(N.size))


# -- figure reproductions ---------------------------------------------------


def fig1_data(Ns=FIG_N_GRID, a_beta=LOG_REGIME[0], b_beta=LOG_REGIME[1],
              threshold=THRESHOLD, n_points=200):
    """Ground-population curves up to the hitting time, γ profiles, hitting times."""
    curves, gammas, hits = {}, {}, []
    for N in Ns:
        m = analyze(ModelParams.from_products(N, a_beta, b_beta))
        p0 = uniform_start(N)
        hit = hitting_time(m.decomp, p0, threshold)
        t_end = hit.time if hit.reached else 10.0 * m.tau_v
        ts = np.linspace(0.0, t_end, n_points)
        traj = propagate(m.decomp, p0, ts)
        curves[N] = (ts, traj.p1)
        gammas[N] = gamma_profile(m.rates)
        hits.append((N, hit.time, float(m.rates.gammas.max()), m.tau_v,
                     "ok" if hit.reached else "not_reached"))
    return {"curves": curves, "gammas": gammas, "hits": hits}


def fig2_log_scans(Ns=FIG_N_GRID):
    """Scans for ℓ=N and ℓ=1 at the log-regime parameters, plus the insensitivity pairs."""
    ab, bb = LOG_REGIME
    out = {
        ("N", ab, bb): tau_scan([ModelParams.from_products(N, ab, bb) for N in Ns]),
        ("1", ab, bb): tau_scan([ModelParams.from_products(N, ab, bb, ell=1) for N in Ns]),
    }
    for ab2, bb2 in INSENSITIVE_PAIRS:
        out[("N", ab2, bb2)] = tau_scan(
            [ModelParams.from_products(N, ab2, bb2) for N in Ns])
    return out


def fig2_power_scans(Ns=POWER_N_GRID, a_betas=POWER_A_BETAS, b_beta=2.0):
    return {("N", ab, b_beta): tau_scan([ModelParams.from_products(N, ab, b_beta) for N in Ns])
            for ab in a_betas}
