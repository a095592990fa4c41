"""Exception types shared across the package."""


class TissueRetractError(Exception):
    """Base class for all domain errors raised by this package."""


class SimulationDiverged(TissueRetractError):
    """Physics produced non-finite positions."""


class IkFailed(TissueRetractError):
    """Inverse kinematics did not reach the target within tolerance.

    Carries the best joint configuration found and its residual so callers
    can degrade gracefully (a physical arm does its best, too).
    """

    def __init__(self, residual, q_best):
        super().__init__(f"ik did not converge, residual {residual:.6g} m")
        self.residual = float(residual)
        self.q_best = q_best


class EpisodeFinished(TissueRetractError):
    """step() called after the episode already terminated."""


class ConfigurationError(TissueRetractError):
    """Invalid or unsatisfiable run configuration."""


class DemoGenerationFailed(TissueRetractError):
    """Retry budget exhausted before enough successful demonstrations."""

    def __init__(self, requested, stored, attempts):
        frac = stored / max(attempts, 1)
        super().__init__(
            f"only {stored}/{requested} successful episodes after "
            f"{attempts} attempts (success fraction {frac:.3f})"
        )
        self.requested = requested
        self.stored = stored
        self.attempts = attempts
        self.success_fraction = frac


class InvalidState(TissueRetractError):
    """Operation called in a state that cannot serve it."""


class OptimizerDiverged(TissueRetractError):
    """Non-finite gradients reached the optimizer."""


class TrainingDiverged(TissueRetractError):
    """Non-finite loss during an agent update."""


class CheckpointIncompatible(TissueRetractError):
    """Checkpoint architecture does not match the requested use."""


class InsufficientData(TissueRetractError):
    """Not enough samples for the requested statistic."""
