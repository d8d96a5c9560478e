"""Exception hierarchy and warning categories."""


class NvtrapError(Exception):
    """Base class for runtime failures raised by this package."""


class ConfigError(NvtrapError):
    """Invalid or inconsistent configuration input."""


class ZfsRangeError(NvtrapError):
    """Temperature outside the coefficient validity range plus extrapolation band."""


class NonInvertibleZfsError(NvtrapError):
    """Measured splitting outside the invertible range of the coefficient set."""

    def __init__(self, d_meas, d_lo, d_hi):
        self.d_meas = d_meas
        self.admissible = (d_lo, d_hi)
        super().__init__(
            f"splitting {d_meas:.6f} GHz is not invertible; admissible interval "
            f"is [{d_lo:.6f}, {d_hi:.6f}] GHz"
        )


class ThermometryError(NvtrapError):
    """Failure in the spectrum-to-temperature pipeline, tagged with its stage."""

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class SpectrumSynthesisError(NvtrapError):
    """Requested synthetic spectrum cannot produce fittable data."""


class NoDipError(NvtrapError):
    """Spectrum carries no detectable resonance dip."""


class ResolutionError(NvtrapError):
    """Integrator time step too coarse for the drive frequency."""


class UnstableTrapError(NvtrapError):
    """Operation requires a stable trapping configuration."""


class BracketError(NvtrapError):
    """Root bracketing failed (no sign change over the search interval)."""


class ThermalRunawayError(NvtrapError):
    """Absorbed power exceeds available cooling over the whole bracket."""


class NoSecularLineError(NvtrapError):
    """No sub-drive spectral peak above the noise floor."""


class OnsetNotBracketedError(NvtrapError):
    """Instability onset not contained in the scanned frequency grid."""


class ContinuumRegimeWarning(UserWarning):
    """Free-molecular formula evaluated at Knudsen number below unity."""


class ExtrapolationWarning(UserWarning):
    """Value obtained outside the calibrated range, inside the allowed band."""
