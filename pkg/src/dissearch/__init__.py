"""Thermal-relaxation search of an unstructured database as an N-level Markov chain."""

__version__ = "0.1.0"

from .exceptions import (  # noqa: E402
    DetailedBalanceError,
    DissearchError,
    GapClosedError,
    ModelError,
    SpectrumWarning,
)
from .spectrum import (  # noqa: E402
    EnergySpectrum,
    ModelParams,
    build_spectrum,
    degenerate_spectrum,
    spectral_gap,
)
from .generator import (  # noqa: E402
    Generator,
    RateMatrix,
    build_generator,
    gamma_profile,
    glauber_rates,
    symmetrize,
)
from .equilibrium import (  # noqa: E402
    EquilibriumReport,
    dominance_check,
    equilibrium_report,
    error_probability,
    gibbs_state,
    ground_state_probability,
)
from .spectral import (  # noqa: E402
    SpectralDecomposition,
    decompose,
    relaxation_time,
)
from .dynamics import (  # noqa: E402
    Trajectory,
    gillespie_sample,
    hitting_time,
    propagate,
)
from .experiments import (  # noqa: E402
    FitReport,
    ScanResult,
    analyze,
    fit_log,
    fit_powerlaw,
    hitting_scan,
    tau_scan,
)

__all__ = [
    "DetailedBalanceError",
    "DissearchError",
    "GapClosedError",
    "ModelError",
    "SpectrumWarning",
    "EnergySpectrum",
    "ModelParams",
    "build_spectrum",
    "degenerate_spectrum",
    "spectral_gap",
    "Generator",
    "RateMatrix",
    "build_generator",
    "gamma_profile",
    "glauber_rates",
    "symmetrize",
    "EquilibriumReport",
    "dominance_check",
    "equilibrium_report",
    "error_probability",
    "gibbs_state",
    "ground_state_probability",
    "SpectralDecomposition",
    "decompose",
    "relaxation_time",
    "Trajectory",
    "gillespie_sample",
    "hitting_time",
    "propagate",
    "FitReport",
    "ScanResult",
    "analyze",
    "fit_log",
    "fit_powerlaw",
    "hitting_scan",
    "tau_scan",
]
