"""Exception types shared across the package."""


class AnalogTrajError(Exception):
    """Base class for all package errors."""


class DimensionError(AnalogTrajError, ValueError):
    """Operands act on incompatible numbers of qubits."""


class CapacityError(AnalogTrajError, ValueError):
    """Requested size exceeds a configured cap."""


class DomainError(AnalogTrajError, ValueError):
    """A parameter lies outside the domain where a formula is defined."""


class SingularChannelError(AnalogTrajError, ValueError):
    """A Pauli fidelity is non-positive, so the channel cannot be factorized."""


class ConfigurationError(AnalogTrajError, ValueError):
    """Sampler or run configuration is inconsistent."""


class NonPhysicalFactorizationError(ConfigurationError):
    """Factorized sampler requested for a channel with a negative factor."""


class ContractError(AnalogTrajError, RuntimeError):
    """An operation was called outside its precondition."""


class QuadratureError(AnalogTrajError, RuntimeError):
    """Numerical integration failed to converge."""
