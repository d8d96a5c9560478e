"""Temperature inference from the fitted zero-field splitting.

Inverts the cubic D(T) on its monotone branch by bracketed bisection and
propagates the fit uncertainty to kelvin with the first-order delta method,
sigma_T = sigma_D / |dD/dT|.
"""

from dataclasses import dataclass

from .errors import NonInvertibleZfsError, ThermometryError
from .numerics import bisect_root
from .odmr import OdmrFit, Spectrum, fit_double_gaussian
from .spin import ZfsCoefficients, zfs_of_temperature, zfs_slope

INVERSION_TOL_K = 1e-3
INVERSION_SLACK_GHZ = 2e-3  # admissible-range slack before refusing to invert


@dataclass(frozen=True)
class ThermoEstimate:
    """Inferred internal temperature with 1-sigma uncertainty."""

    temperature: float  # K
    sigma_t: float  # K
    d_used: float  # GHz
    extrapolated: bool

    def to_flat_dict(self):
        return {
            "temperature_k": self.temperature,
            "sigma_t_k": self.sigma_t,
            "d_ghz": self.d_used,
            "extrapolated": self.extrapolated,
        }


def invert_zfs(coeffs: ZfsCoefficients, d_meas: float) -> float:
    """Temperature whose splitting equals ``d_meas``, to 1e-3 K.

    The admissible window is [D(T_max), D(T_min)] widened by 2 MHz on either
    side; measurements in the widened margin resolve on the extrapolation
    band of the coefficients. Outside it the error names the admissible
    interval.
    """
    t_min, t_max = coeffs.valid_range
    band = coeffs.extrapolation_band
    d_hi = zfs_of_temperature(coeffs, t_min)  # D decreases with T
    d_lo = zfs_of_temperature(coeffs, t_max)
    if not (d_lo - INVERSION_SLACK_GHZ) <= d_meas <= (d_hi + INVERSION_SLACK_GHZ):
        raise NonInvertibleZfsError(d_meas, d_lo - INVERSION_SLACK_GHZ,
                                    d_hi + INVERSION_SLACK_GHZ)

    lo, hi = t_min, t_max
    if d_meas > d_hi:
        lo, hi = t_min - band, t_min
    elif d_meas < d_lo:
        lo, hi = t_max, t_max + band
    d_at_lo = zfs_of_temperature(coeffs, lo)
    d_at_hi = zfs_of_temperature(coeffs, hi)
    if not d_at_hi <= d_meas <= d_at_lo:
        # slack extends past the monotone extrapolation band
        raise NonInvertibleZfsError(d_meas, d_at_hi, d_at_lo)

    return bisect_root(lambda t: zfs_of_temperature(coeffs, t) - d_meas,
                       lo, hi, xtol=INVERSION_TOL_K, max_iter=60)


def temperature_from_fit(fit: OdmrFit, coeffs: ZfsCoefficients,
                         d_offset_ghz: float = 0.0) -> ThermoEstimate:
    """Invert a converged fit; ``d_offset_ghz`` removes a per-particle bias
    of the room-temperature splitting (default 0)."""
    if not fit.converged:
        raise ThermometryError("fit", fit.failure_reason or "fit did not converge")
    d_used = fit.d_fit - d_offset_ghz
    try:
        t = invert_zfs(coeffs, d_used)
    except NonInvertibleZfsError as exc:
        raise ThermometryError("inversion", str(exc)) from exc
    sigma_d = fit.d_fit_sigma()
    slope = zfs_slope(coeffs, t)
    sigma_t = sigma_d / abs(slope) if slope != 0.0 else float("inf")
    return ThermoEstimate(temperature=t, sigma_t=sigma_t, d_used=d_used,
                          extrapolated=not coeffs.in_valid_range(t))


def temperature_from_spectrum(spectrum: Spectrum, coeffs: ZfsCoefficients,
                              d_offset_ghz: float = 0.0) -> ThermoEstimate:
    """Full pipeline: double-dip fit, then inversion with error propagation.

    Failures carry their stage ("fit" or "inversion") in the raised
    :class:`ThermometryError`.
    """
    fit = fit_double_gaussian(spectrum)
    return temperature_from_fit(fit, coeffs, d_offset_ghz=d_offset_ghz)
