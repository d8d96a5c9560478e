"""Residual-gas kinetics in the free-molecular regime.

Holds the gas state plus the hard-sphere mean free path, Knudsen number and
Epstein drag. Pressures enter in millibar and are converted to pascal here.
"""

import math
import warnings
from dataclasses import dataclass

from . import constants
from .errors import ContinuumRegimeWarning


@dataclass(frozen=True)
class GasEnvironment:
    """Residual gas: pressure (mbar), temperature (K) and molecular properties."""

    pressure_mbar: float
    temperature: float = 298.0
    molecule_mass: float = constants.AIR_MOLECULE_MASS  # kg
    molecule_diameter: float = constants.AIR_MOLECULE_DIAMETER  # m
    accommodation: float = 1.0

    def __post_init__(self):
        if self.pressure_mbar < 0:
            raise ValueError("pressure must be >= 0")
        if self.temperature <= 0:
            raise ValueError("temperature must be > 0")
        if not 0 < self.accommodation <= 1:
            raise ValueError("accommodation must be in (0, 1]")

    @property
    def pressure_pa(self):
        return self.pressure_mbar * constants.MBAR_TO_PA

    @classmethod
    def air(cls, pressure_mbar, temperature=298.0, accommodation=1.0):
        return cls(pressure_mbar=pressure_mbar, temperature=temperature,
                   accommodation=accommodation)


def mean_thermal_speed(gas: GasEnvironment) -> float:
    """Mean molecular speed sqrt(8 kB T / (pi m)) in m/s."""
    return math.sqrt(8.0 * constants.BOLTZMANN * gas.temperature
                     / (math.pi * gas.molecule_mass))


def mean_free_path(gas: GasEnvironment) -> float:
    """Hard-sphere mean free path kB T / (sqrt(2) pi d^2 p) in meters.

    Returns ``inf`` at zero pressure.
    """
    if gas.pressure_mbar == 0.0:
        return math.inf
    return constants.BOLTZMANN * gas.temperature / (
        math.sqrt(2.0) * math.pi * gas.molecule_diameter**2 * gas.pressure_pa
    )


def knudsen(gas: GasEnvironment, particle) -> float:
    """Knudsen number: mean free path over particle diameter."""
    return mean_free_path(gas) / particle.diameter


def damping_rate(particle, gas: GasEnvironment, reflection="diffuse") -> float:
    """Epstein velocity damping rate gamma in 1/s (force = -m gamma v).

    gamma = c * p / (rho * r * v_mean), with c = 8/pi for specular reflection
    and (8/pi)(1 + pi/8) for diffuse (the default). Valid for Knudsen number
    above unity; evaluation in the continuum regime still returns the value
    but emits :class:`ContinuumRegimeWarning`.
    """
    if reflection == "diffuse":
        c_drag = constants.EPSTEIN_DIFFUSE
    elif reflection == "specular":
        c_drag = constants.EPSTEIN_SPECULAR
    else:
        raise ValueError(f"unknown reflection model {reflection!r}")
    if gas.pressure_mbar == 0.0:
        return 0.0
    if knudsen(gas, particle) < 1.0:
        warnings.warn(
            "Knudsen number below unity: Epstein drag outside its validity range",
            ContinuumRegimeWarning,
            stacklevel=2,
        )
    radius = 0.5 * particle.diameter
    return c_drag * gas.pressure_pa / (particle.density * radius * mean_thermal_speed(gas))
