"""Exception hierarchy for the RQC simulator.

Every error derives from ``ValueError`` so that callers written against the
plain ``ValueError`` convention keep working.
"""


class SimulatorError(ValueError):
    """Base class for all simulator errors."""


class RegisterError(SimulatorError):
    """Unknown, duplicated or mismatched qubit labels."""


class ValidationError(SimulatorError):
    """A matrix or vector violates the invariants of its type."""


class DomainError(SimulatorError):
    """A scalar parameter is outside its admissible range."""


class GateError(SimulatorError):
    """Unknown gate name, arity mismatch or non-unitary matrix."""


class ImpossibleOutcomeError(SimulatorError):
    """Post-selection on an outcome with (numerically) zero probability."""


class ReconstructionError(SimulatorError):
    """Tomography input cannot be turned into a state."""
