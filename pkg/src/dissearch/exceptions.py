class DissearchError(Exception):
    """Base class for numerical failures raised by this package."""


class ModelError(DissearchError, ValueError):
    """Invalid model parameters or an ill-formed spectrum."""


class DetailedBalanceError(DissearchError):
    """Rates are not reversible with respect to the Gibbs weights."""


class GapClosedError(DissearchError):
    """The relaxation gap is numerically zero."""


class SpectrumWarning(UserWarning):
    """Ground state of the marked level is not guaranteed (b <= a)."""
