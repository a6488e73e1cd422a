"""Exception types shared across the package."""


class PenningDDError(Exception):
    """Base class for all package errors."""


class NonConfining(PenningDDError):
    """Trap polarity does not confine the given charge axially."""


class Unstable(PenningDDError):
    """Radial stability condition omega_c^2 > 2 omega_z^2 violated."""


class NegativeFrequency(PenningDDError):
    """Spectrum evaluated at a negative angular frequency."""


class NyquistViolation(PenningDDError):
    """Spectrum has support above the Nyquist rate pi/dt."""


class SegmentTooLong(PenningDDError):
    """PSD segment length exceeds the trace length."""


class OrderingViolation(PenningDDError):
    """Pulse positions are not strictly increasing in (0, 1)."""


class OverlapViolation(PenningDDError):
    """Pulses overlap each other or the sequence boundaries at this duration."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class NonConvergent(PenningDDError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, value=None, achieved_error=None):
        super().__init__(message)
        self.value = value
        self.achieved_error = achieved_error


class DivergentIntegrand(PenningDDError):
    """Spectrum too singular at omega=0 for the given filter."""


class UnderResolvedPulse(PenningDDError):
    """Sample interval too coarse to resolve the pi-pulse width."""


class NoCrossing(PenningDDError):
    """Coherence curve never crosses the requested level."""


class FitFailure(PenningDDError):
    """Fit could not resolve the requested parameters."""


class PoorFit(PenningDDError):
    """Fit converged but residuals exceed the acceptance threshold."""


class Degenerate(PenningDDError):
    """Data carry no information about the parameter being fit."""


class NonConvergence(PenningDDError):
    """Iterative fit failed to converge."""


class InfeasibleStart(PenningDDError):
    """Optimization started from an infeasible pulse sequence."""


class ConfigError(PenningDDError):
    """Invalid or incomplete run configuration."""
