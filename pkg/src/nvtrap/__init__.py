"""Ring Paul trap dynamics and NV-center spin thermometry for levitated microdiamonds."""

__version__ = "0.1.0"

from .backend import BACKEND
from .gas import GasEnvironment, damping_rate, knudsen, mean_free_path
from .spin import (
    MagneticField,
    SpinParams,
    ZERO_FIELD,
    ZfsCoefficients,
    build_hamiltonian,
    transition_frequencies,
    zfs_of_temperature,
    zfs_slope,
)
from .thermal import (
    AbsorptionModel,
    EmpiricalThermalModel,
    LaserBeam,
    absorbed_power,
    calibrate_cross_section,
    calibrate_empirical,
    gas_cooling_power,
    radiative_power,
    steady_state_temperature,
)
from .trap import (
    MathieuParams,
    ParticleState,
    Trajectory,
    TrapConfig,
    analytic_secular_frequency,
    charge_to_mass_from_instability,
    equilibrium_displacement,
    integrate_trajectory,
    iso_q_ramp,
    mathieu_q,
    micromotion_amplitude,
    secular_frequency,
    stability_boundary,
    stability_classify,
)

__all__ = [
    "BACKEND",
    "__version__",
    "GasEnvironment",
    "damping_rate",
    "knudsen",
    "mean_free_path",
    "MagneticField",
    "SpinParams",
    "ZERO_FIELD",
    "ZfsCoefficients",
    "build_hamiltonian",
    "transition_frequencies",
    "zfs_of_temperature",
    "zfs_slope",
    "AbsorptionModel",
    "EmpiricalThermalModel",
    "LaserBeam",
    "absorbed_power",
    "calibrate_cross_section",
    "calibrate_empirical",
    "gas_cooling_power",
    "radiative_power",
    "steady_state_temperature",
    "MathieuParams",
    "ParticleState",
    "Trajectory",
    "TrapConfig",
    "analytic_secular_frequency",
    "charge_to_mass_from_instability",
    "equilibrium_displacement",
    "integrate_trajectory",
    "iso_q_ramp",
    "mathieu_q",
    "micromotion_amplitude",
    "secular_frequency",
    "stability_boundary",
    "stability_classify",
]
