"""Gibbs state, success and error probabilities of the relaxed search."""
from dataclasses import dataclass
import math

import numpy as np
from scipy.special import logsumexp

from .spectrum import build_spectrum


@dataclass(frozen=True)
class EquilibriumReport:
    gibbs: np.ndarray
    p1_eq: float
    p_err: float
    p_err_asymptotic: float
    dominant: bool
    log_Z: float

    @property
    def Z(self):
        return math.exp(self.log_Z)

    def as_dict(self):
        return {
            "p1_eq": self.p1_eq,
            "p_err": self.p_err,
            "p_err_asymptotic": self.p_err_asymptotic,
            "dominant": self.dominant,
            "log_Z": self.log_Z,
        }


def gibbs_state(spectrum, beta):
    """Normalised Boltzmann weights, max-shifted before exponentiation."""
    logw = -beta * spectrum.energies
    logw = logw - logsumexp(logw)
    p = np.exp(logw)
    return p / p.sum()


def log_partition(spectrum, beta):
    return float(logsumexp(-beta * spectrum.energies))


def _log_excited_weight(params):
    """``log[ e^{βε} (e^{βη_ℓ} Σ_k e^{-βη_k} - 1) ]`` with ``η_k = a ln k``.

    Written as a sum over ``k != ℓ`` so no cancellation occurs.
    """
    N, ell = params.N, params.ell
    if N == 1:
        return -math.inf
    k = np.arange(1, N + 1, dtype=np.float64)
    k = k[k != ell]
    ab = params.a_beta
    terms = -params.b_beta * math.log(N) + ab * (math.log(ell) - np.log(k))
    return float(logsumexp(terms))


def ground_state_probability(params):
    """Equilibrium population of the marked level from the closed form.

    ``p1 = 1 / (1 + e^{βε}(e^{βη_ℓ} Σ_k e^{-βη_k} - 1))``.
    """
    x = _log_excited_weight(params)
    if x == -math.inf:
        return 1.0
    # 1 / (1 + e^x), stable both ways
    return float(math.exp(-np.logaddexp(0.0, x)))


def error_probability(params):
    """``(exact, asymptotic)`` probability that the relaxed state is wrong.

    ``exact`` is ``1 - p1`` evaluated without cancellation; ``asymptotic`` is
    ``N^{-(b-a)β} Σ_{k=1}^N k^{-aβ}``.
    """
    x = _log_excited_weight(params)
    exact = 0.0 if x == -math.inf else float(math.exp(x - np.logaddexp(0.0, x)))
    k = np.arange(1, params.N + 1, dtype=np.float64)
    log_asym = -(params.b_beta - params.a_beta) * math.log(params.N) + logsumexp(
        -params.a_beta * np.log(k)
    )
    return exact, float(math.exp(log_asym))


def dominance_check(params):
    """Ground-state dominance for large N: ``bβ > max(1, aβ)``."""
    return params.b_beta > max(1.0, params.a_beta)


def equilibrium_report(params=None, spectrum=None, beta=None):
    """Full report for a model, or for a bare spectrum (e.g. the degenerate one)."""
    if spectrum is None:
        spectrum = build_spectrum(params)
    if beta is None:
        beta = params.beta if params is not None else spectrum.params.beta
    p = gibbs_state(spectrum, beta)
    if params is not None:
        exact, asym = error_probability(params)
        dominant = dominance_check(params)
    else:
        exact = float(p[1:].sum())
        gap = spectrum.energies[1] - spectrum.energies[0] if spectrum.N > 1 else math.inf
        asym = float((spectrum.N - 1) * math.exp(-beta * gap)) if spectrum.N > 1 else 0.0
        dominant = bool(asym < 1.0)
    return EquilibriumReport(
        gibbs=p,
        p1_eq=float(p[0]),
        p_err=exact,
        p_err_asymptotic=asym,
        dominant=dominant,
        log_Z=log_partition(spectrum, beta),
    )
