import math

import numpy as np
import pytest

from dissearch import ModelError, ModelParams, fit_log, fit_powerlaw, hitting_scan, tau_scan
from dissearch.dynamics import degenerate_hitting_time, degenerate_rate
from dissearch.experiments import ScanResult, fig1_data, n_grid


def test_fit_log_exact_line():
    N = np.array([100, 300, 1000, 3000, 10000])
    rep = fit_log((N, 2 * np.log(N)))
    assert rep.slope == pytest.approx(2.0, abs=1e-12)
    assert rep.intercept == pytest.approx(0.0, abs=1e-11)
    assert rep.r2 == pytest.approx(1.0, abs=1e-14)


def test_fit_power_exact():
    N = np.array([100, 200, 400, 800, 1600])
    rep = fit_powerlaw((N, (N / 100) ** 0.5))
    assert rep.kappa == pytest.approx(0.5, abs=1e-12)
    assert rep.intercept == pytest.approx(0.0, abs=1e-12)


def test_fit_rejects_small_or_degenerate_design():
    with pytest.raises(ModelError, match="at least 4"):
        fit_log((np.array([1, 2, 3]), np.array([1.0, 2, 3])))
    with pytest.raises(ModelError, match="degenerate design"):
        fit_log((np.full(5, 100), np.arange(5.0)))


def test_degenerate_grid_matches_closed_form():
    bb = 2.0
    grid = [ModelParams.from_products(N, 0.0, bb) for N in (20, 50, 120)]
    res = tau_scan(grid)
    for row in res.rows:
        beta_eps = -bb * math.log(row.N)
        assert row.tau_v == pytest.approx(1 / degenerate_rate(row.N, beta_eps), rel=1e-10)
        assert row.hit_time_v == pytest.approx(
            degenerate_hitting_time(row.N, beta_eps, 0.95), rel=1e-6)


def test_not_reached_rows_are_marked():
    res = hitting_scan([ModelParams.from_products(N, 0.3, 0.9) for N in (50, 100)], 0.95)
    assert [r.status for r in res.rows] == ["not_reached", "not_reached"]
    assert all(math.isnan(r.hit_time_v) for r in res.rows)
    assert all(math.isfinite(r.tau_v) for r in res.rows)


def test_row_failures_do_not_stop_scan():
    res = tau_scan([ModelParams.from_products(1, 1.2, 2.0),
                    ModelParams.from_products(400, 1.2, 2.0)])
    assert res.rows[0].status.startswith("error: GapClosedError")
    assert res.rows[1].status == "ok"


def test_scan_is_deterministic_and_sorted():
    grid = [ModelParams.from_products(N, 1.2, 2.0) for N in (300, 100, 200)]
    a, b = tau_scan(grid), tau_scan(grid, workers=3)
    assert [r.N for r in a.rows] == [100, 200, 300]
    assert repr(a.table()) == repr(b.table())


def test_scan_roundtrips_through_table():
    res = tau_scan(n_grid(ModelParams.from_products(100, 1.2, 2.0), (50, 100)))
    cols, rows = res.table()
    again = ScanResult.from_table(cols, rows)
    assert repr(again.table()) == repr((cols, rows))


def test_kappa_falls_as_a_beta_rises():
    Ns = (100, 200, 400, 800)
    kappas = [fit_powerlaw(tau_scan([ModelParams.from_products(N, ab, 2.0) for N in Ns])).kappa
              for ab in (0.3, 0.6, 0.9, 1.2)]
    assert np.all(np.diff(kappas) < 0)


def test_log_regime_residuals_small():
    Ns = (500, 1000, 2000, 3000)
    res = tau_scan([ModelParams.from_products(N, 1.2, 2.0) for N in Ns])
    assert fit_log(res).max_rel_residual <= 0.05


def test_fig1_data_shape():
    data = fig1_data(Ns=(100, 400), n_points=20)
    assert set(data["curves"]) == {100, 400}
    ts, p1 = data["curves"][400]
    assert ts.size == 20 and p1[-1] == pytest.approx(0.95, abs=1e-6)
    assert [h[-1] for h in data["hits"]] == ["not_reached", "ok"]
    assert len(data["gammas"][400]) == 400
