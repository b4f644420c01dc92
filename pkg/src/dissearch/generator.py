"""Glauber rates, the Markov generator and its symmetrised form."""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .exceptions import DetailedBalanceError, ModelError

SYMMETRY_RTOL = 1e-10


@dataclass(frozen=True)
class RateMatrix:
    """Pairwise rates ``rates[k, l]`` for the jump ``l -> k``.

    ``gammas[k]`` is the total escape rate out of level ``k`` (column sum).
    ``flushed`` counts uphill rates set to exactly zero because their
    Boltzmann factor is below ``exp(-700)``.
    """

    rates: np.ndarray
    gammas: np.ndarray
    spectrum: object
    beta: float
    v: float
    flushed: int = 0

    @property
    def N(self):
        return self.rates.shape[0]


@dataclass(frozen=True)
class Generator:
    """``A[k, l] = rates[k, l] - δ_kl γ_k``; columns sum to zero."""

    A: np.ndarray
    rates: RateMatrix

    @property
    def spectrum(self):
        return self.rates.spectrum

    @property
    def beta(self):
        return self.rates.beta

    @property
    def N(self):
        return self.A.shape[0]


def glauber_rates(spectrum, beta=None, v=None):
    """Glauber rates normalised by ``max(n_k, n_l)``.

    ``beta`` and ``v`` default to the values in ``spectrum.params`` when the
    spectrum was built from a :class:`~dissearch.spectrum.ModelParams`.
    """
    params = spectrum.params
    if beta is None:
        if params is None:
            raise ModelError("beta is required for a spectrum without ModelParams")
        beta = params.beta
    if v is None:
        v = params.v if params is not None else 1.0
    if not beta > 0 or not v > 0:
        raise ModelError(f"beta and v must be positive, got beta={beta}, v={v}")
    rates, flushed = kernels.glauber_fill(spectrum.energies, spectrum.ranks(), beta, v)
    gammas = rates.sum(axis=0)
    return RateMatrix(rates=rates, gammas=gammas, spectrum=spectrum, beta=float(beta),
                      v=float(v), flushed=int(flushed))


def build_generator(rates):
    A = rates.rates.copy()
    A[np.diag_indices_from(A)] = -rates.gammas
    return Generator(A=A, rates=rates)


def symmetrize(generator, beta=None):
    """``Ã[k, l] = A[k, l] exp(-β(ε_l - ε_k)/2)``.

    Raises :class:`DetailedBalanceError` if the result is not symmetric to
    ``1e-10`` relative, entry by entry.
    """
    if beta is None:
        beta = generator.beta
    e = generator.spectrum.energies
    half = 0.5 * beta * (e[:, None] - e[None, :])
    with np.errstate(over="ignore", invalid="ignore"):
        S = generator.A * np.exp(half)
    S[generator.A == 0.0] = 0.0
    np.fill_diagonal(S, np.diag(generator.A))
    # a flushed uphill rate takes the value implied by its downhill partner
    flushed = (generator.A == 0.0) & (generator.A.T != 0.0)
    S[flushed] = S.T[flushed]
    diff = np.abs(S - S.T)
    scale = np.maximum(np.abs(S), np.abs(S.T))
    tiny = np.finfo(float).tiny
    bad = diff > SYMMETRY_RTOL * scale + tiny
    if not np.all(np.isfinite(S)) or bad.any():
        k, l = np.unravel_index(np.argmax(np.where(bad, diff / (scale + tiny), 0.0)), S.shape)
        raise DetailedBalanceError(
            f"detailed balance violated upstream: |Ã[{k},{l}] - Ã[{l},{k}]| = {diff[k, l]:.3e}"
        )
    return S


def gamma_profile(rates):
    """``(k, γ_k / v)`` pairs with 1-based rank ``k``."""
    k = np.arange(1, rates.N + 1)
    return list(zip(k.tolist(), (rates.gammas / rates.v).tolist()))


def detailed_balance_residual(rates):
    """Largest ``|v_kl e^{-βε_l} - v_lk e^{-βε_k}| / (v_kl e^{-βε_l})``.

    Computed in log space so wide spectra cannot overflow. Pairs where either
    rate was flushed to zero are skipped.
    """
    V = rates.rates
    e = rates.spectrum.energies
    mask = (V > 0) & (V.T > 0)
    if not mask.any():
        return 0.0
    with np.errstate(divide="ignore"):
        logV = np.log(V)
    lhs = logV - rates.beta * e[None, :]
    rhs = logV.T - rates.beta * e[:, None]
    r = np.abs(np.expm1(rhs[mask] - lhs[mask]))
    return float(r.max())


def column_sum_residual(generator):
    """``max_l |Σ_k A_kl| / γ_l`` over levels with nonzero escape rate."""
    col = np.abs(generator.A.sum(axis=0))
    g = generator.rates.gammas
    nz = g > 0
    if not nz.any():
        return float(col.max()) if col.size else 0.0
    return float((col[nz] / g[nz]).max())
