"""NV- ground-state spin model.

The spin-1 Hamiltonian is expressed in frequency units (GHz, hbar = 1) in the
basis {|+1>, |0>, |-1>} defined along the NV axis. The module also carries the
cubic temperature dependence of the zero-field splitting used for thermometry.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import constants
from .errors import ZfsRangeError

_SQ2 = 1.0 / math.sqrt(2.0)

# Spin-1 operators in the {|+1>, |0>, |-1>} basis.
SX = _SQ2 * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
SY = _SQ2 * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
SZ = np.array([[1, 0, 0], [0, 0, 0], [0, 0, -1]], dtype=complex)


@dataclass(frozen=True)
class SpinParams:
    """Ground-state constants: splitting D, strain E, effective gyromagnetic ratio.

    A single effective spin stands in for the NV ensemble; at the near-zero
    fields handled here all four crystallographic orientations produce the
    same pair of lines.
    """

    d_zfs: float  # GHz
    e_strain: float = 0.0  # GHz
    gyromagnetic_ratio: float = constants.NV_GYROMAGNETIC_GHZ_PER_T  # GHz/T

    def __post_init__(self):
        if not 2.5 < self.d_zfs < 3.2:
            raise ValueError(f"d_zfs={self.d_zfs} GHz outside (2.5, 3.2) GHz")
        if self.e_strain < 0:
            raise ValueError("e_strain must be >= 0")
        if self.e_strain >= 0.1 * self.d_zfs:
            raise ValueError("e_strain must be < 0.1 * d_zfs")
        if self.gyromagnetic_ratio <= 0:
            raise ValueError("gyromagnetic_ratio must be > 0")


@dataclass(frozen=True)
class MagneticField:
    """Static field in tesla, in the NV frame (z along the NV axis)."""

    bx: float = 0.0
    by: float = 0.0
    bz: float = 0.0

    def __post_init__(self):
        if self.magnitude() >= 0.1:
            raise ValueError("field magnitude must stay below 0.1 T (weak-field regime)")

    def magnitude(self):
        return math.sqrt(self.bx**2 + self.by**2 + self.bz**2)


ZERO_FIELD = MagneticField()


@dataclass(frozen=True)
class ZfsCoefficients:
    """Cubic polynomial D(T) = a0 + a1 T + a2 T^2 + a3 T^3 with validity range.

    Construction rejects coefficient sets that are not strictly monotone
    decreasing over ``valid_range`` (checked on a 1 K grid). Evaluation allows
    a +/-50 K extrapolation band beyond the range.
    """

    a0: float = constants.ZFS_A0_GHZ
    a1: float = constants.ZFS_A1_GHZ_PER_K
    a2: float = constants.ZFS_A2_GHZ_PER_K2
    a3: float = constants.ZFS_A3_GHZ_PER_K3
    valid_range: tuple = (constants.ZFS_T_MIN_K, constants.ZFS_T_MAX_K)

    extrapolation_band = 50.0  # K

    def __post_init__(self):
        t_min, t_max = self.valid_range
        if not t_min < t_max:
            raise ValueError("valid_range must be an increasing (t_min, t_max) pair")
        grid = np.arange(t_min, t_max + 1.0, 1.0)
        values = self.a0 + self.a1 * grid + self.a2 * grid**2 + self.a3 * grid**3
        if not np.all(np.diff(values) < 0):
            raise ValueError("D(T) is not strictly monotone decreasing on valid_range")

    def in_valid_range(self, t):
        return self.valid_range[0] <= t <= self.valid_range[1]

    def in_extended_range(self, t):
        return (
            self.valid_range[0] - self.extrapolation_band
            <= t
            <= self.valid_range[1] + self.extrapolation_band
        )


def build_hamiltonian(params: SpinParams, field: MagneticField = ZERO_FIELD) -> np.ndarray:
    """3x3 Hermitian spin Hamiltonian in GHz.

    H = D Sz^2 + E (Sx^2 - Sy^2) + gamma (Bx Sx + By Sy + Bz Sz).
    """
    zeeman = params.gyromagnetic_ratio * (field.bx * SX + field.by * SY + field.bz * SZ)
    return params.d_zfs * (SZ @ SZ) + params.e_strain * (SX @ SX - SY @ SY) + zeeman


def transition_frequencies(params: SpinParams, field: MagneticField = ZERO_FIELD):
    """Microwave transition frequencies (f_minus, f_plus) in GHz, ascending.

    The ground level is the eigenstate with the largest |0> weight; at exact
    degeneracies the tie breaks deterministically toward the lower eigenvalue.
    """
    h = build_hamiltonian(params, field)
    evals, evecs = np.linalg.eigh(h)
    ground = int(np.argmax(np.abs(evecs[1, :]) ** 2))
    upper = [i for i in range(3) if i != ground]
    f = sorted(float(evals[i] - evals[ground]) for i in upper)
    return f[0], f[1]


def zfs_of_temperature(coeffs: ZfsCoefficients, t: float) -> float:
    """Evaluate D(T) in GHz.

    Valid over ``coeffs.valid_range``; evaluation up to 50 K beyond either end
    is allowed (callers that care surface it as an extrapolation flag), and
    anything further raises :class:`ZfsRangeError`.
    """
    if not coeffs.in_extended_range(t):
        lo = coeffs.valid_range[0] - coeffs.extrapolation_band
        hi = coeffs.valid_range[1] + coeffs.extrapolation_band
        raise ZfsRangeError(f"T={t} K outside extended range [{lo}, {hi}] K")
    return coeffs.a0 + coeffs.a1 * t + coeffs.a2 * t**2 + coeffs.a3 * t**3


def zfs_slope(coeffs: ZfsCoefficients, t: float) -> float:
    """Analytic derivative dD/dT in GHz/K, same range policy as the polynomial."""
    if not coeffs.in_extended_range(t):
        lo = coeffs.valid_range[0] - coeffs.extrapolation_band
        hi = coeffs.valid_range[1] + coeffs.extrapolation_band
        raise ZfsRangeError(f"T={t} K outside extended range [{lo}, {hi}] K")
    return coeffs.a1 + 2.0 * coeffs.a2 * t + 3.0 * coeffs.a3 * t**2
