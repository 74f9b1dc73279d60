"""Exception hierarchy shared by every module of the package."""


class NQSError(Exception):
    """Base class for all package errors."""


class CapacityError(NQSError, ValueError):
    """Orbital count outside the supported enumeration range."""


class DomainError(NQSError, ValueError):
    """A function was evaluated outside its domain (NaN, log of non-positive, ...)."""


class SectorError(NQSError, ValueError):
    """Configuration has the wrong particle number for a fixed-N ansatz."""


class ContractError(NQSError, ValueError):
    """A builder was handed an activation or target that violates its preconditions."""


class SignChangeError(ContractError):
    """Activation cannot produce both positive and negative values."""


class LogPolynomialError(ContractError):
    """The log of the activation is a polynomial of degree smaller than K."""


class RangeError(NQSError, ValueError):
    """Amplitude cannot be reached by the activation's range."""


class UnsupportedActivationError(NQSError, ValueError):
    """A derivative (or other capability) is not available for an activation."""


class DegeneracyError(NQSError, RuntimeError):
    """No neuron with a usable Fourier coefficient could be found for a subset."""
