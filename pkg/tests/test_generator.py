import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dissearch import (
    DetailedBalanceError, ModelParams, build_generator, build_spectrum, degenerate_spectrum,
    gamma_profile, glauber_rates, symmetrize,
)
from dissearch import _accel, kernels
from dissearch.generator import (
    RateMatrix, column_sum_residual, detailed_balance_residual,
)
from dissearch.spectrum import _sorted_spectrum

from conftest import closed_form_rates, make_generator, random_spectrum


def test_tied_pair_rate():
    r = glauber_rates(degenerate_spectrum(3, -1.0), beta=1.0, v=1.0)
    assert r.rates[1, 2] == pytest.approx(1 / 6, rel=1e-15)
    assert r.rates[2, 1] == pytest.approx(1 / 6, rel=1e-15)


@pytest.mark.parametrize("N", [5, 30])
def test_ratio_ell_1(N):
    ab, bb = 1.2, 2.0
    V = make_generator(N, ab, bb, ell=1).rates.rates
    for l in range(2, N + 1):
        assert V[0, l - 1] / V[l - 1, 0] == pytest.approx(l ** ab * N ** bb, rel=1e-12)


@pytest.mark.parametrize("N", [5, 30])
def test_ratio_ell_N(N):
    ab, bb = 0.7, 2.0
    V = make_generator(N, ab, bb).rates.rates
    for l in range(3, N + 1):
        for k in range(2, l):
            assert V[k - 1, l - 1] / V[l - 1, k - 1] == pytest.approx(
                ((k - 1) / (l - 1)) ** (-ab), rel=1e-12)


@pytest.mark.parametrize("ell", ["1", "N"])
@pytest.mark.parametrize("ab,bb", [(1.2, 2.0), (0.3, 2.0), (3.0, 4.0)])
def test_matches_closed_form_rates(ell, ab, bb):
    N = 40
    ell = 1 if ell == "1" else N
    V = make_generator(N, ab, bb, ell=ell).rates.rates
    ref = closed_form_rates(N, ab, bb, ell)
    off = ~np.eye(N, dtype=bool)
    np.testing.assert_allclose(V[off], ref[off], rtol=1e-12, atol=0)


def test_generator_single_level():
    g = make_generator(1)
    assert g.A.tolist() == [[0.0]]


def test_columns_sum_to_zero(rng):
    for N in (2, 17, 300):
        g = build_generator(glauber_rates(random_spectrum(rng, N), beta=1.3, v=2.0))
        assert column_sum_residual(g) <= 1e-12
        np.testing.assert_array_equal(np.diag(g.A), -g.rates.gammas)


def test_symmetrize_degenerate_is_identity():
    g = build_generator(glauber_rates(degenerate_spectrum(5, -1.0), beta=1.0))
    # only the excited block is degenerate; there the matrix is already symmetric
    S = symmetrize(g)
    np.testing.assert_array_equal(S[1:, 1:], g.A[1:, 1:])
    flat = build_generator(glauber_rates(
        build_spectrum(ModelParams(6, 0.0, 0.0), allow_ungapped=True)))
    np.testing.assert_array_equal(symmetrize(flat), flat.A)


def test_two_level_symmetric_offdiagonal():
    g = build_generator(glauber_rates(_sorted_spectrum([-0.3, 0.9]), beta=1.7, v=1.0))
    V = g.rates.rates
    S = symmetrize(g)
    assert S[0, 1] == pytest.approx(math.sqrt(V[0, 1] * V[1, 0]), rel=1e-14)
    assert S[1, 0] == pytest.approx(S[0, 1], rel=1e-15)


@pytest.mark.parametrize("N", [2, 7, 23, 50])
def test_symmetrized_eigenvalues_match_nonsymmetric_solver(rng, N):
    g = build_generator(glauber_rates(random_spectrum(rng, N), beta=1.1))
    S = symmetrize(g)
    np.testing.assert_allclose(S, S.T, rtol=1e-10, atol=0)
    ev_sym = np.sort(np.linalg.eigvalsh(0.5 * (S + S.T)))
    ev_gen = np.linalg.eigvals(g.A)
    assert np.abs(ev_gen.imag).max() < 1e-9
    np.testing.assert_allclose(np.sort(ev_gen.real), ev_sym, atol=1e-9, rtol=0)


def test_symmetrize_rejects_broken_detailed_balance():
    g = make_generator(6)
    rates = g.rates.rates.copy()
    rates[3, 1] *= 1.5
    bad = RateMatrix(rates=rates, gammas=rates.sum(axis=0), spectrum=g.spectrum,
                     beta=g.beta, v=1.0)
    with pytest.raises(DetailedBalanceError, match="detailed balance violated upstream"):
        symmetrize(build_generator(bad))


def test_gamma_profile_single_level():
    assert gamma_profile(make_generator(1).rates) == [(1, 0.0)]


def test_gamma_1_for_ell_1():
    N, ab, bb = 60, 1.2, 2.0
    g1 = dict(gamma_profile(make_generator(N, ab, bb, ell=1).rates))[1]
    ref = sum(1.0 / (s * (1.0 + N ** bb * s ** ab)) for s in range(2, N + 1))
    assert g1 == pytest.approx(ref, rel=1e-12)


def _gamma_l_ell_N(N, ab, bb, l):
    """Escape rate of rank l > 1 for ell = N from the closed-form sum."""
    first = 1.0 / (l * (1.0 + N ** ((ab - bb)) * (l - 1) ** (-ab)))
    s = np.arange(2, l)
    mid = np.sum(1.0 / (1.0 + ((s - 1) / (l - 1)) ** ab)) / l
    s = np.arange(l + 1, N + 1)
    tail = np.sum(1.0 / (s * (1.0 + ((s - 1) / (l - 1)) ** ab)))
    return first + mid + tail


def test_gamma_matches_closed_form_sum_ell_N():
    N, ab, bb = 80, 1.2, 2.0
    gam = make_generator(N, ab, bb).rates.gammas
    for l in (2, 3, 10, 40, 80):
        assert gam[l - 1] == pytest.approx(_gamma_l_ell_N(N, ab, bb, l), rel=1e-12)


def test_gamma_bounded_independently_of_N():
    ab, bb = 1.2, 2.0
    maxima = [make_generator(N, ab, bb).rates.gammas.max() for N in (500, 1000, 2000)]
    # the closed-form sums at much larger N stay below the same bound
    far = max(_gamma_l_ell_N(200000, ab, bb, l) for l in (2, 50, 1000, 20000, 100000, 200000))
    assert max(maxima) < 1.3
    assert far < 1.3
    # growth between grid points shrinks
    assert maxima[2] - maxima[1] < maxima[1] - maxima[0]


def test_underflow_is_flushed_not_raised():
    s = _sorted_spectrum([0.0, 1.0])
    r = glauber_rates(s, beta=800.0, v=1.0)
    assert r.flushed == 1
    assert r.rates[1, 0] == 0.0
    assert r.rates[0, 1] == pytest.approx(0.5, rel=0)  # v / max(n) with n = (1, 2)
    assert np.isfinite(symmetrize(build_generator(r))).all()


@settings(max_examples=30, deadline=None)
@given(N=st.integers(2, 60), ab=st.floats(0.05, 4.0), extra=st.floats(0.05, 4.0),
       data=st.data())
def test_detailed_balance_residual(N, ab, extra, data):
    ell = data.draw(st.integers(1, N))
    g = make_generator(N, ab, ab + extra, ell=ell)
    assert detailed_balance_residual(g.rates) <= 1e-12
    assert column_sum_residual(g) <= 1e-12
    off = ~np.eye(N, dtype=bool)
    assert (g.A[off] > 0).all()


def test_backends_agree():
    p = ModelParams.from_products(300, 0.9, 2.0, ell=77)
    s = build_spectrum(p)
    a, fa = kernels._glauber_numpy(s.energies, s.ranks(), 1.0, 1.0)
    b, fb = kernels._glauber_numba(s.energies, s.ranks(), 1.0, 1.0)
    assert fa == fb == 0
    np.testing.assert_allclose(a, b, rtol=1e-15, atol=0)
    prev = _accel.use_numba(False)
    try:
        c = glauber_rates(s).rates
    finally:
        _accel.use_numba(prev)
    np.testing.assert_allclose(c, b, rtol=1e-15, atol=0)
