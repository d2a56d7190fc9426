"""Exception hierarchy.

Two families matter for the CLI exit-code contract: ``ConfigError``
(configuration/usage problems, exit code 1) and ``SimulationError``
(numerical or validation failures, exit code 2).
"""


class ConfigError(Exception):
    """Bad configuration or usage (CLI exit code 1)."""


class SimulationError(Exception):
    """Numerical or validation failure (CLI exit code 2)."""


class InvalidDimensionError(ConfigError):
    """Subsystem dimension below the allowed minimum."""


class SpaceMismatchError(SimulationError):
    """Operands live on different or incompatible spaces."""


class TruncationError(SimulationError):
    """Truncated space is too small for the requested computation."""


class DegenerateMixingAngleError(ConfigError):
    """n_g = 1/2 makes cos(theta) = 0 and switches off the NMR coupling."""


class DetuningZeroError(SimulationError):
    """A detuning in a denominator is zero."""


class PropagationAccuracyError(SimulationError):
    """Propagator lost more norm than tolerated."""


class StepSizeError(ConfigError):
    """Stochastic integrator step violates the step-size guard."""


class DomainError(SimulationError):
    """Analytic formula evaluated outside its validity domain."""
