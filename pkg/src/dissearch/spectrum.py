"""Level energies of the search Hamiltonian.

The marked level sits at ``a ln(ell) - b ln(N)``; every other level ``k`` at
``a ln(k)``. Downstream code works in *rank* order: index 0 is the ground
state, ``n_k = k + 1`` for a non-degenerate spectrum.
"""
from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from .exceptions import ModelError, SpectrumWarning


@dataclass(frozen=True)
class ModelParams:
    """The model constants of one run.

    Energies ``a`` and ``b`` carry units of the temperature scale, ``beta``
    is the inverse temperature and ``v`` the bare relaxation rate that
    fixes the time unit.
    """

    N: int
    a: float
    b: float
    beta: float = 1.0
    ell: int = None
    v: float = 1.0

    def __post_init__(self):
        if self.ell is None:
            object.__setattr__(self, "ell", self.N)
        if isinstance(self.N, bool) or int(self.N) != self.N:
            raise ModelError(f"N must be an integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "ell", int(self.ell))
        for name in ("a", "b", "beta", "v"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ModelError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.N < 1:
            raise ModelError(f"N must be >= 1, got {self.N}")
        if not 1 <= self.ell <= self.N:
            raise ModelError(f"ell must lie in [1, {self.N}], got {self.ell}")
        if self.a < 0:
            raise ModelError(f"a must be >= 0, got {self.a}")
        if self.beta <= 0:
            raise ModelError(f"beta must be > 0, got {self.beta}")
        if self.v <= 0:
            raise ModelError(f"v must be > 0, got {self.v}")

    @classmethod
    def from_products(cls, N, a_beta, b_beta, ell=None, v=1.0):
        """Build with ``beta = 1`` so that ``a`` and ``b`` are the products aβ, bβ."""
        return cls(N=N, a=a_beta, b=b_beta, beta=1.0, ell=ell, v=v)

    @property
    def gapped(self):
        return self.b > self.a

    @property
    def a_beta(self):
        return self.a * self.beta

    @property
    def b_beta(self):
        return self.b * self.beta

    @property
    def epsilon(self):
        """Energy of the marked level before the auxiliary shift, ``-b ln N``."""
        return -self.b * math.log(self.N)

    def with_N(self, N, ell=None):
        """Copy at a different size; ``ell`` follows N when it was N."""
        if ell is None:
            ell = N if self.ell == self.N else self.ell
        return ModelParams(N=N, a=self.a, b=self.b, beta=self.beta, ell=ell, v=self.v)


@dataclass(frozen=True)
class EnergySpectrum:
    energies: np.ndarray
    permutation: np.ndarray  # sorted rank r (1-based) -> pre-sort level index (1-based)
    params: ModelParams = None
    unsorted: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=np.float64)
        e.setflags(write=False)
        object.__setattr__(self, "energies", e)

    @property
    def N(self):
        return self.energies.shape[0]

    def ranks(self):
        """``n_k``: number of levels with energy not larger than ``ε_k``.

        Tied levels share the larger count.
        """
        return np.searchsorted(self.energies, self.energies, side="right").astype(np.float64)

    def log_weights(self, beta):
        """``-β ε_k`` shifted so the largest entry is zero."""
        w = -beta * self.energies
        return w - w.max()


def _sorted_spectrum(levels, params=None):
    levels = np.asarray(levels, dtype=np.float64)
    order = np.argsort(levels, kind="stable")
    unsorted = levels.copy()
    unsorted.setflags(write=False)
    return EnergySpectrum(
        energies=levels[order],
        permutation=order + 1,
        params=params,
        unsorted=unsorted,
    )


def build_spectrum(params, allow_ungapped=False):
    """Sorted energies ``{a ln k}_{k != ell} ∪ {a ln ell - b ln N}``.

    Warns with :class:`SpectrumWarning` when ``b <= a`` unless
    ``allow_ungapped`` is set.
    """
    if not isinstance(params, ModelParams):
        raise ModelError("build_spectrum expects a ModelParams instance")
    if not params.gapped and not allow_ungapped:
        warnings.warn(
            f"b={params.b} <= a={params.a}: the marked level is not guaranteed "
            "to be the ground state",
            SpectrumWarning,
            stacklevel=2,
        )
    k = np.arange(1, params.N + 1, dtype=np.float64)
    levels = params.a * np.log(k)
    levels[params.ell - 1] += params.epsilon
    return _sorted_spectrum(levels, params)


def degenerate_spectrum(N, epsilon):
    """Marked level at ``epsilon < 0``, all others at zero (no auxiliary splitting)."""
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ModelError(f"N must be an integer >= 1, got {N!r}")
    epsilon = float(epsilon)
    if not math.isfinite(epsilon) or epsilon >= 0:
        raise ModelError(f"epsilon must be finite and negative, got {epsilon!r}")
    levels = np.zeros(int(N))
    levels[0] = epsilon
    return _sorted_spectrum(levels)


def spectral_gap(spectrum):
    """``ε_2 - ε_1`` of a sorted spectrum."""
    if spectrum.N < 2:
        raise ModelError("gap undefined for a single level")
    return float(spectrum.energies[1] - spectrum.energies[0])
