"""Internal temperature of the levitated diamond.

Balances laser absorption against free-molecular gas cooling and thermal
radiation, and provides the empirical calibrations (linear in power with a
fixed 298 K origin, or T0 + alpha/p in pressure) used by the sweep protocols.

Conventions: the absorbed power uses the peak intensity of a Gaussian beam,
I = 2 P / (pi w^2); the particle is treated as a sphere of surface area
A = pi d^2 (the real diamonds are irregular, this is a documented
approximation); pressures are mbar at the API and pascal internally.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import ContinuumRegimeWarning, ThermalRunawayError
from .gas import GasEnvironment, knudsen, mean_thermal_speed
from .numerics import bisect_root

# Effective absorption cross-section shipped as a calibration, not ground
# truth: back-solved so that a 10 um, 3500 kg/m^3 sphere in air at 1 mbar and
# 298 K reaches 470 K under 700 uW focused to a 1 um waist (radiation off).
# Regenerate with calibrate_cross_section() if the defaults change.
DEFAULT_CROSS_SECTION_M2 = 2.8484e-14
DEFAULT_WAIST_M = 1.0e-6

_T_BRACKET_MAX = 5000.0  # K


@dataclass(frozen=True)
class LaserBeam:
    """Focused excitation beam."""

    power: float  # W
    waist: float = DEFAULT_WAIST_M  # m
    wavelength: float = 532e-9  # m

    def __post_init__(self):
        if self.power < 0:
            raise ValueError("power must be >= 0")
        if self.waist <= 0:
            raise ValueError("waist must be > 0")

    def peak_intensity(self):
        return 2.0 * self.power / (math.pi * self.waist**2)


@dataclass(frozen=True)
class AbsorptionModel:
    """Effective absorption cross-section and illumination overlap.

    ``intensity_overlap`` scales the peak intensity down to the average the
    particle actually sees; it is the hook for micromotion-reduced
    illumination and defaults to a constant 1.
    """

    effective_cross_section: float = DEFAULT_CROSS_SECTION_M2  # m^2
    intensity_overlap: float = 1.0

    def __post_init__(self):
        if self.effective_cross_section <= 0:
            raise ValueError("effective_cross_section must be > 0")
        if not 0 < self.intensity_overlap <= 1:
            raise ValueError("intensity_overlap must be in (0, 1]")


@dataclass(frozen=True)
class EmpiricalThermalModel:
    """Calibrated forward model: T(P) = t0 + c*P or T(p) = t0 + c/p."""

    mode: str  # "linear_power" | "inverse_pressure"
    t0: float  # K
    coefficient: float  # K/W or K*mbar

    def __post_init__(self):
        if self.mode not in ("linear_power", "inverse_pressure"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.t0 <= 0:
            raise ValueError("t0 must be > 0")
        if self.coefficient < 0:
            raise ValueError("coefficient must be >= 0")

    def predict(self, control):
        if self.mode == "linear_power":
            return self.t0 + self.coefficient * control
        if control <= 0:
            raise ValueError("inverse_pressure mode needs control > 0")
        return self.t0 + self.coefficient / control


def surface_area(particle) -> float:
    """Sphere surface area pi d^2."""
    return math.pi * particle.diameter**2


def absorbed_power(beam: LaserBeam, absorption: AbsorptionModel) -> float:
    """Heat load sigma_eff * overlap * 2P/(pi w^2), in watts."""
    return (absorption.effective_cross_section * absorption.intensity_overlap
            * beam.peak_intensity())


def gas_cooling_power(gas: GasEnvironment, particle, t_internal: float,
                      specific_heat_ratio: float = constants.AIR_SPECIFIC_HEAT_RATIO
                      ) -> float:
    """Free-molecular heat flux from particle to gas, in watts.

    P = acc * (p A / 4) * v_mean * (g+1)/(g-1) * (T_int/T_gas - 1), zero when
    the particle sits at the gas temperature and negative below it (the gas
    then heats the particle). Outside the free-molecular regime (Kn < 1) the
    value is still returned, with a warning.
    """
    if t_internal <= 0:
        raise ValueError("t_internal must be > 0")
    if gas.pressure_mbar > 0 and knudsen(gas, particle) < 1.0:
        warnings.warn(
            "Knudsen number below unity: free-molecular heat flux outside validity",
            ContinuumRegimeWarning,
            stacklevel=2,
        )
    g = specific_heat_ratio
    return (
        gas.accommodation
        * (gas.pressure_pa * surface_area(particle) / 4.0)
        * mean_thermal_speed(gas)
        * (g + 1.0) / (g - 1.0)
        * (t_internal / gas.temperature - 1.0)
    )


def radiative_power(particle, t_internal: float, t_env: float,
                    emissivity: float) -> float:
    """Net grey-body radiation eps * sigma * A * (T^4 - T_env^4), in watts."""
    return (emissivity * constants.STEFAN_BOLTZMANN * surface_area(particle)
            * (t_internal**4 - t_env**4))


def steady_state_temperature(beam: LaserBeam, absorption: AbsorptionModel,
                             gas: GasEnvironment, particle,
                             emissivity: float = 0.0,
                             specific_heat_ratio: float = constants.AIR_SPECIFIC_HEAT_RATIO
                             ) -> float:
    """Internal temperature where absorption balances gas cooling + radiation.

    Unique root of P_abs = P_gas(T) + P_rad(T) on [T_gas, 5000 K], found by
    bisection to 1e-3 K. Raises :class:`ThermalRunawayError` when absorption
    exceeds all cooling at the top of the bracket, and ``ValueError`` when no
    cooling channel exists at all.
    """
    p_abs = absorbed_power(beam, absorption)
    if p_abs == 0.0:
        return gas.temperature
    if gas.pressure_mbar == 0.0 and emissivity == 0.0:
        raise ValueError("no cooling channel: pressure and emissivity both zero")

    def balance(t):
        out = -p_abs
        if gas.pressure_mbar > 0.0:
            out += gas_cooling_power(gas, particle, t, specific_heat_ratio)
        if emissivity > 0.0:
            out += radiative_power(particle, t, gas.temperature, emissivity)
        return out

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumRegimeWarning)
        if balance(_T_BRACKET_MAX) < 0.0:
            raise ThermalRunawayError(
                f"absorbed power {p_abs:.3e} W exceeds cooling up to {_T_BRACKET_MAX} K"
            )
        return bisect_root(balance, gas.temperature, _T_BRACKET_MAX,
                           xtol=1e-3, max_iter=80)


def calibrate_cross_section(target_temperature: float, beam: LaserBeam,
                            gas: GasEnvironment, particle,
                            intensity_overlap: float = 1.0,
                            emissivity: float = 0.0) -> float:
    """Back-solve the effective cross-section hitting a target temperature.

    Closed form: the required absorbed power is the cooling power at the
    target, and the cross-section is that power over the overlap-scaled peak
    intensity.
    """
    if target_temperature <= gas.temperature:
        raise ValueError("target temperature must exceed the gas temperature")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ContinuumRegimeWarning)
        p_needed = gas_cooling_power(gas, particle, target_temperature)
    if emissivity > 0.0:
        p_needed += radiative_power(particle, target_temperature,
                                    gas.temperature, emissivity)
    return p_needed / (intensity_overlap * beam.peak_intensity())


def calibrate_empirical(points, mode: str, t0_fixed: float = 298.0
                        ) -> EmpiricalThermalModel:
    """Least-squares calibration of the empirical forward model.

    ``linear_power``: T = t0_fixed + c*P with the origin pinned (one point is
    enough). ``inverse_pressure``: T = t0 + c/p with t0 free (two points
    minimum). ``points`` is a sequence of (control, temperature) pairs.
    """
    controls = np.asarray([p[0] for p in points], dtype=float)
    temps = np.asarray([p[1] for p in points], dtype=float)
    if controls.size == 0:
        raise ValueError("at least one calibration point required")
    if np.all(controls == controls[0]) and controls.size > 1:
        raise ValueError("degenerate design: all control values equal")

    if mode == "linear_power":
        denom = float(np.dot(controls, controls))
        if denom == 0.0:
            raise ValueError("degenerate design: all control values zero")
        coeff = float(np.dot(controls, temps - t0_fixed)) / denom
        return EmpiricalThermalModel(mode=mode, t0=t0_fixed, coefficient=coeff)

    if mode == "inverse_pressure":
        if controls.size < 2:
            raise ValueError("inverse_pressure mode requires >= 2 points")
        if np.any(controls <= 0):
            raise ValueError("pressures must be > 0")
        slope, intercept = np.polyfit(1.0 / controls, temps, 1)
        return EmpiricalThermalModel(mode=mode, t0=float(intercept),
                                     coefficient=float(slope))

    raise ValueError(f"unknown mode {mode!r}")
