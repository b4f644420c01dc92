"""Eigen-analysis of a detailed-balance generator.

The generator is similar to a symmetric matrix, ``Ã = D^{1/2} A D^{-1/2}``
with ``D = diag(e^{βε})``, so a dense symmetric eigensolve gives real
eigenvalues and an orthonormal basis ``U``; right eigenvectors are
``D^{-1/2} U`` and left eigenvectors ``D^{1/2} U``.

The stationary pair is known in closed form (Gibbs vector, all-ones left
vector). It is deflated out of ``Ã`` before the solve, which moves its
eigenvalue far below the rest of the spectrum; the largest remaining
eigenvalue is then ``α_2`` without any thresholding against roundoff.
"""
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .equilibrium import gibbs_state
from .exceptions import DissearchError, GapClosedError
from .generator import symmetrize

GAP_FLOOR = 1e-12


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order with matched eigenvectors.

    ``U[:, k]`` are orthonormal eigenvectors of the symmetrised generator;
    ``sqrt_w`` holds ``D^{-1/2}`` (scaled so it never overflows). The right
    and left eigenvector matrices are derived from those two arrays.
    """

    alphas: np.ndarray
    U: np.ndarray
    sqrt_w: np.ndarray
    gibbs: np.ndarray
    v: float

    @property
    def N(self):
        return self.alphas.shape[0]

    @property
    def right(self):
        R = self.sqrt_w[:, None] * self.U
        R[:, 0] = self.gibbs
        return R

    @property
    def left(self):
        """Rows are left eigenvectors; row 0 is all ones."""
        L = (self.U / self.sqrt_w[:, None]).T
        L[0] = 1.0
        return L

    @property
    def tau_rlx(self):
        return relaxation_time(self)

    def reconstruct(self):
        return (self.right * self.alphas[None, :]) @ self.left

    def modal_coefficients(self, p0):
        """Coefficients ``c`` with ``p(t) = D^{-1/2} U (e^{αt} c)``."""
        return self.U.T @ (np.asarray(p0, dtype=np.float64) / self.sqrt_w)


def decompose(generator, beta=None):
    """Full spectral decomposition of ``generator``."""
    if beta is None:
        beta = generator.beta
    spectrum = generator.spectrum
    N = generator.N
    p_eq = gibbs_state(spectrum, beta)
    # sqrt of Gibbs weights, scaled by its max: D^{-1/2} up to a constant
    logw = spectrum.log_weights(beta)
    sqrt_w = np.exp(0.5 * logw)
    v = generator.rates.v

    if N == 1:
        return SpectralDecomposition(
            alphas=np.zeros(1), U=np.ones((1, 1)), sqrt_w=sqrt_w, gibbs=p_eq, v=v
        )

    S = symmetrize(generator, beta)
    S = 0.5 * (S + S.T)
    u1 = np.sqrt(p_eq)
    u1 /= np.linalg.norm(u1)
    # Gershgorin: spec(Ã) ⊂ [-2 max γ, 0]
    shift = 4.0 * float(generator.rates.gammas.max()) + v
    B = S - shift * np.outer(u1, u1)
    try:
        w, V = scipy.linalg.eigh(B, driver="evd")
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise DissearchError(
            f"symmetric eigensolve failed for N={N}: {exc}; "
            f"max|Ã|={np.abs(S).max():.3e}, finite={np.isfinite(S).all()}"
        ) from exc
    # w[0] ≈ -shift belongs to the deflated stationary vector
    rest_w = w[1:]
    rest_V = V[:, 1:]
    order = np.argsort(-rest_w, kind="stable")
    alphas = np.concatenate(([0.0], rest_w[order]))
    U = np.column_stack((u1, rest_V[:, order]))
    return SpectralDecomposition(alphas=alphas, U=U, sqrt_w=sqrt_w, gibbs=p_eq, v=v)


def relaxation_time(decomp):
    """``1 / |α_2|``."""
    if decomp.N < 2:
        raise GapClosedError("relaxation time undefined for a single level")
    a2 = decomp.alphas[1]
    if not a2 < -GAP_FLOOR * decomp.v:
        raise GapClosedError(f"gap numerically closed: alpha_2 = {a2:.3e}")
    return float(1.0 / abs(a2))
