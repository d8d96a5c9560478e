"""Damped dynamics of a charged particle in a ring quadrupole trap.

Conventions, fixed once here:

* ``v_pp`` is the peak-to-peak drive voltage; every field expression uses the
  amplitude ``v_pp / 2``. This is stated explicitly to kill the classic
  factor-of-two bug.
* The ideal quadrupole potential is normalized so the axial (z) stability
  parameter is ``q = 2 kappa |Q| (v_pp/2) / (m Omega^2 r0^2)`` and the radial
  parameters are ``-q/2`` (quadrupole constraint q_axial = -2 q_radial).
* ``kappa`` is the geometric efficiency of the ring electrode; real traps
  have kappa < 1, the default is 1.0.
* Normalized damping for stability work is ``gamma_norm = 2 gamma / Omega``.
* Charges are used as |Q|; a positive charge is assumed throughout.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import backend, constants
from .errors import (
    BracketError,
    NoSecularLineError,
    ResolutionError,
    UnstableTrapError,
)
from .gas import GasEnvironment, damping_rate

TWO_SQRT2 = 2.0 * math.sqrt(2.0)
ESCAPE_RADIUS_FACTOR = 100.0  # trajectories stop beyond 100 * r0

# Jury test slack: undamped stable multipliers sit exactly on the unit circle.
_STABILITY_TOL = 1e-9


@dataclass(frozen=True)
class TrapConfig:
    """Drive and geometry of the ring trap."""

    v_pp: float  # volts, peak-to-peak
    omega_drive: float  # rad/s
    r0: float = 700e-6  # m, characteristic (inner) radius
    kappa: float = 1.0  # geometric efficiency
    v_dc: float = 0.0  # volts, static quadrupole offset
    dc_field: tuple = (0.0, 0.0, 0.0)  # V/m, uniform stray field

    def __post_init__(self):
        if not 0.0 <= self.v_pp <= 10e3:
            raise ValueError("v_pp must be in [0, 10 kV]")
        if self.omega_drive <= 0:
            raise ValueError("omega_drive must be > 0")
        if self.r0 <= 0:
            raise ValueError("r0 must be > 0")
        if not 0.0 < self.kappa <= 1.0:
            raise ValueError("kappa must be in (0, 1]")

    @property
    def drive_period(self):
        return 2.0 * math.pi / self.omega_drive


@dataclass(frozen=True)
class ParticleState:
    """Charged particle with initial kinematic state.

    ``mass`` must equal density * (pi/6) * diameter^3; use
    :meth:`from_diameter` to construct consistently.
    """

    mass: float  # kg
    charge: float  # C
    diameter: float  # m
    density: float  # kg/m^3
    position: tuple = (0.0, 0.0, 0.0)  # m
    velocity: tuple = (0.0, 0.0, 0.0)  # m/s

    def __post_init__(self):
        if self.charge == 0.0:
            raise ValueError("charge must be nonzero for trapping")
        if self.diameter <= 0 or self.density <= 0 or self.mass <= 0:
            raise ValueError("mass, diameter and density must be > 0")
        expected = self.density * math.pi / 6.0 * self.diameter**3
        if abs(self.mass - expected) > 1e-6 * expected:
            raise ValueError(
                f"mass {self.mass:.6e} kg inconsistent with density*(pi/6)*d^3 "
                f"= {expected:.6e} kg"
            )

    @classmethod
    def from_diameter(cls, diameter, density=constants.DIAMOND_DENSITY, charge=1e-15,
                      position=(0.0, 0.0, 0.0), velocity=(0.0, 0.0, 0.0)):
        mass = density * math.pi / 6.0 * diameter**3
        return cls(mass=mass, charge=charge, diameter=diameter, density=density,
                   position=position, velocity=velocity)

    @property
    def charge_to_mass(self):
        return self.charge / self.mass


@dataclass
class Trajectory:
    """Uniformly sampled record of an integration run."""

    times: np.ndarray  # s
    positions: np.ndarray  # (n, 3) m
    velocities: np.ndarray  # (n, 3) m/s
    omega_drive: float  # rad/s
    dt: float  # s
    gamma: float  # 1/s damping used
    status: str  # "ok" | "escaped"
    trap: TrapConfig = None
    particle: ParticleState = None

    @property
    def drive_phase(self):
        """Drive phase omega*t at each sample, wrapped to [0, 2pi)."""
        return np.mod(self.omega_drive * self.times, 2.0 * math.pi)

    @property
    def steps_per_period(self):
        return int(round(2.0 * math.pi / (self.omega_drive * self.dt)))


@dataclass(frozen=True)
class MathieuParams:
    """Per-axis dimensionless stability parameters (x, y share the radial value)."""

    q_axial: float
    q_radial: float
    a_axial: float
    a_radial: float

    def per_axis(self):
        """(q, a) pairs in axis order x, y, z."""
        return (
            (self.q_radial, self.a_radial),
            (self.q_radial, self.a_radial),
            (self.q_axial, self.a_axial),
        )


def _field_prefactors(trap: TrapConfig, particle: ParticleState):
    """(c_cos, c_dc): acceleration prefactors Q kappa V / (m r0^2) in 1/s^2."""
    scale = abs(particle.charge) * trap.kappa / (particle.mass * trap.r0**2)
    return scale * (trap.v_pp / 2.0), scale * trap.v_dc


def mathieu_q(trap: TrapConfig, particle: ParticleState) -> MathieuParams:
    """Dimensionless trap parameters for the given drive and particle.

    q_axial = 2 kappa |Q| (v_pp/2) / (m Omega^2 r0^2); the radial q is -q/2,
    and the static-offset parameters follow the same quadrupole constraint.
    """
    c_cos, c_dc = _field_prefactors(trap, particle)
    w2 = trap.omega_drive**2
    q_ax = 2.0 * c_cos / w2
    a_ax = -4.0 * c_dc / w2
    return MathieuParams(q_axial=q_ax, q_radial=-0.5 * q_ax,
                         a_axial=a_ax, a_radial=-0.5 * a_ax)


def analytic_secular_frequency(q: float, omega_drive: float) -> float:
    """Small-q secular frequency q*Omega/(2 sqrt(2)) / (2 pi), in Hz.

    Good to ~5% for |q| <= 0.3 and ~15% up to |q| = 0.5 (a = 0).
    """
    return abs(q) * omega_drive / TWO_SQRT2 / (2.0 * math.pi)


def damped_secular_frequency(q: float, omega_drive: float, gamma: float) -> float:
    """Damped small-q secular frequency sqrt(omega_sec^2 - gamma^2/4)/(2 pi).

    Zero when overdamped. Same small-q validity as the undamped estimate.
    """
    w0 = abs(q) * omega_drive / TWO_SQRT2
    w2 = w0 * w0 - 0.25 * gamma * gamma
    return math.sqrt(w2) / (2.0 * math.pi) if w2 > 0.0 else 0.0


def integrate_trajectory(trap: TrapConfig, particle: ParticleState,
                         gas: GasEnvironment = None, duration: float = None,
                         dt: float = None, steps_per_period: int = 100,
                         gravity: bool = False, static_force=None,
                         gamma: float = None) -> Trajectory:
    """Integrate m r'' = Q E(r, t) - m gamma r' + F_static + m g.

    E is the ideal oscillating quadrupole of ``trap`` plus its uniform stray
    field. Damping comes from ``gas`` (Epstein) unless ``gamma`` overrides it.
    Fixed-step velocity-Verlet with the oscillating field evaluated exactly at
    substep times; deterministic. Integration stops early with status
    "escaped" once |r| exceeds 100 r0.

    ``dt`` must resolve the drive: dt <= 2 pi / (50 Omega). When ``dt`` is not
    given it is derived from ``steps_per_period``.
    """
    if duration is None or duration <= 0:
        raise ValueError("duration must be a positive time in seconds")
    period = trap.drive_period
    if dt is None:
        if steps_per_period < 50:
            raise ResolutionError("steps_per_period must be >= 50")
        dt = period / steps_per_period
    if dt > period / 50.0:
        raise ResolutionError(
            f"dt={dt:.3e} s too coarse; need dt <= {period / 50.0:.3e} s "
            f"(50 steps per drive period)"
        )

    if gamma is None:
        gamma = damping_rate(particle, gas) if gas is not None else 0.0

    c_cos, c_dc = _field_prefactors(trap, particle)

    a_ext = np.zeros(3)
    a_ext += np.asarray(trap.dc_field, dtype=float) * (particle.charge / particle.mass)
    if static_force is not None:
        a_ext += np.asarray(static_force, dtype=float) / particle.mass
    if gravity:
        a_ext[2] -= constants.STANDARD_GRAVITY

    n_steps = int(math.ceil(duration / dt))
    escape_sq = (ESCAPE_RADIUS_FACTOR * trap.r0) ** 2

    pos, vel, n_done = backend.integrate_quadrupole(
        c_cos, c_dc, trap.omega_drive, gamma, a_ext,
        np.asarray(particle.position, dtype=float),
        np.asarray(particle.velocity, dtype=float),
        dt, n_steps, escape_sq,
    )

    status = "ok" if n_done == n_steps else "escaped"
    times = np.arange(n_done + 1) * dt
    return Trajectory(times=times, positions=pos, velocities=vel,
                      omega_drive=trap.omega_drive, dt=dt, gamma=gamma,
                      status=status, trap=trap, particle=particle)


def secular_frequency(traj: Trajectory, axis: int = None, pad_factor: int = 8,
                      peak_to_floor: float = 10.0) -> float:
    """Dominant sub-drive spectral line of the position record, in Hz.

    Hann-windowed, zero-padded periodogram restricted to frequencies below
    0.75 of the drive, with parabolic interpolation of the log-power peak.
    Raises :class:`NoSecularLineError` when no sub-drive peak clears the
    band's median power by ``peak_to_floor``.
    """
    x = traj.positions
    if axis is None:
        axis = int(np.argmax(np.var(x, axis=0)))
    sig = x[:, axis] - np.mean(x[:, axis])
    n = sig.size
    if n < 16:
        raise NoSecularLineError("record too short")

    w = np.hanning(n)
    n_fft = 1 << int(math.ceil(math.log2(n * pad_factor)))
    spec = np.fft.rfft(sig * w, n=n_fft)
    power = np.abs(spec) ** 2
    freqs = np.fft.rfftfreq(n_fft, d=traj.dt)

    f_drive = traj.omega_drive / (2.0 * math.pi)
    f_min = 2.0 / (n * traj.dt)  # skip the DC leakage bins
    band = (freqs > f_min) & (freqs < 0.75 * f_drive)
    if not np.any(band):
        raise NoSecularLineError("no sub-drive band in the spectrum")

    p_band = power[band]
    f_band = freqs[band]
    k = int(np.argmax(p_band))
    floor = np.median(p_band)
    if floor > 0 and p_band[k] < peak_to_floor * floor:
        raise NoSecularLineError("no sub-drive peak above the noise floor")

    if 0 < k < p_band.size - 1 and p_band[k - 1] > 0 and p_band[k + 1] > 0:
        lm, l0, lp = np.log(p_band[k - 1]), np.log(p_band[k]), np.log(p_band[k + 1])
        denom = lm - 2.0 * l0 + lp
        delta = 0.5 * (lm - lp) / denom if denom != 0.0 else 0.0
    else:
        delta = 0.0
    df = freqs[1] - freqs[0]
    return float(f_band[k] + delta * df)


def classify_axis(a: float, q: float, gamma_norm: float, n_steps: int = 400) -> bool:
    """Floquet stability of u'' + gamma_norm u' + (a - 2q cos 2tau) u = 0.

    Stable iff all multipliers of the one-period map lie inside (damped) or on
    (undamped) the unit circle, evaluated through the Jury condition
    |trace| <= 1 + det with the determinant known analytically,
    det = exp(-gamma_norm * pi).
    """
    m11, _, _, m22 = backend.monodromy(a, q, gamma_norm, n_steps)
    det = math.exp(-gamma_norm * math.pi)
    return abs(m11 + m22) <= 1.0 + det + _STABILITY_TOL


@dataclass(frozen=True)
class StabilityReport:
    stable: bool
    axial_stable: bool
    radial_stable: bool
    params: MathieuParams
    gamma_norm: float


def stability_classify(trap: TrapConfig, particle: ParticleState,
                       gas: GasEnvironment = None, gamma: float = None
                       ) -> StabilityReport:
    """Classify each axis by its Floquet multipliers and report the AND."""
    if gamma is None:
        gamma = damping_rate(particle, gas) if gas is not None else 0.0
    gamma_norm = 2.0 * gamma / trap.omega_drive
    params = mathieu_q(trap, particle)
    ax = classify_axis(params.a_axial, params.q_axial, gamma_norm)
    rad = classify_axis(params.a_radial, params.q_radial, gamma_norm)
    return StabilityReport(stable=ax and rad, axial_stable=ax, radial_stable=rad,
                           params=params, gamma_norm=gamma_norm)


def stability_boundary(a: float = 0.0, gamma_norm: float = 0.0,
                       q_tol: float = 1e-4) -> float:
    """Largest stable q of the first stability region at given a and damping.

    Bisection on :func:`classify_axis`; raises :class:`BracketError` when no
    stable q exists below the search ceiling.
    """
    q_lo = None
    for q in (0.05, 0.1, 0.2, 0.4, 0.7):
        if classify_axis(a, q, gamma_norm):
            q_lo = q
            break
    if q_lo is None:
        raise BracketError(f"no stable q found at a={a}, gamma_norm={gamma_norm}")
    q_hi = max(1.5, 2.0 * q_lo)
    while classify_axis(a, q_hi, gamma_norm):
        q_hi *= 1.5
        if q_hi > 10.0:
            raise BracketError("no instability found below q = 10")
    while q_hi - q_lo > q_tol:
        mid = 0.5 * (q_lo + q_hi)
        if classify_axis(a, mid, gamma_norm):
            q_lo = mid
        else:
            q_hi = mid
    return 0.5 * (q_lo + q_hi)


def charge_to_mass_from_instability(omega_c: float, trap: TrapConfig,
                                    gas: GasEnvironment = None,
                                    particle: ParticleState = None) -> float:
    """Charge-to-mass ratio from the measured instability-onset drive frequency.

    Q/m = q_max(gamma_norm) * omega_c^2 * r0^2 / (2 kappa (v_pp/2)). The
    damped boundary is used when ``gas`` and a reference ``particle`` (for the
    drag geometry) are both supplied, otherwise the undamped one. Assumes no
    static quadrupole offset (a = 0).
    """
    if gas is not None and particle is not None:
        gamma = damping_rate(particle, gas)
        gamma_norm = 2.0 * gamma / omega_c
    else:
        gamma_norm = 0.0
    q_max = stability_boundary(a=0.0, gamma_norm=gamma_norm)
    return q_max * omega_c**2 * trap.r0**2 / (2.0 * trap.kappa * (trap.v_pp / 2.0))


def _settle_and_window(trap, particle, gamma, settle_constants, window_periods,
                       steps_per_period):
    """Common bookkeeping: settle steps and an integer-period analysis window."""
    params = mathieu_q(trap, particle)
    q_slow = min(abs(params.q_radial), abs(params.q_axial))
    if q_slow == 0.0:
        raise UnstableTrapError("zero drive leaves the particle unconfined")
    t_sec = 1.0 / analytic_secular_frequency(q_slow, trap.omega_drive)
    period = trap.drive_period
    settle_time = 20.0 * t_sec
    if gamma > 0.0:
        settle_time = max(settle_time, settle_constants / gamma)
    settle_periods = int(math.ceil(settle_time / period))
    if window_periods is None:
        window_periods = max(int(math.ceil(5.0 * t_sec / period)), 256)
    n_steps_settle = settle_periods * steps_per_period
    n_steps_window = window_periods * steps_per_period
    return n_steps_settle, n_steps_window, period


@dataclass(frozen=True)
class EquilibriumResult:
    """Measured static displacement and the pseudo-potential prediction."""

    displacement: np.ndarray  # (3,) m, time-average of the converged orbit
    prediction: np.ndarray  # (3,) m, F / (m omega_sec^2) per axis

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.displacement))


@dataclass(frozen=True)
class SteadyStateResponse:
    """Converged-orbit observables under a constant force."""

    displacement: np.ndarray  # (3,) m, window average
    prediction: np.ndarray  # (3,) m, pseudo-potential F/(m omega_sec^2)
    micromotion_per_axis: np.ndarray  # (3,) m, lock-in at the drive
    micromotion_amplitude: float  # m, norm over axes


def steady_state_response(trap: TrapConfig, particle: ParticleState,
                          gamma: float, static_force=(0.0, 0.0, 0.0),
                          steps_per_period: int = 100,
                          settle_constants: float = 30.0,
                          window_periods: int = None) -> SteadyStateResponse:
    """Displacement and drive-synchronous amplitude of the converged orbit.

    Integrates through the transient (first 20 secular periods or
    ``settle_constants``/gamma, whichever is longer), then measures over an
    integer number of drive periods where the orbit is periodic, making the
    averages exact. Damping must be nonzero for the transient to decay.
    """
    if gamma <= 0.0:
        raise ValueError("steady-state averaging requires nonzero damping")
    report = stability_classify(trap, particle, gamma=gamma)
    if not report.stable:
        raise UnstableTrapError("configuration is Floquet-unstable")

    n_settle, n_window, period = _settle_and_window(
        trap, particle, gamma, settle_constants, window_periods, steps_per_period)
    duration = (n_settle + n_window) * period / steps_per_period

    traj = integrate_trajectory(trap, particle, duration=duration,
                                steps_per_period=steps_per_period,
                                static_force=static_force, gamma=gamma)
    if traj.status != "ok":
        raise UnstableTrapError("trajectory escaped during steady-state averaging")

    window = traj.positions[n_settle : n_settle + n_window]
    t_window = traj.times[n_settle : n_settle + n_window]
    displacement = window.mean(axis=0)

    phase = np.exp(-1j * trap.omega_drive * t_window)
    mm = 2.0 * np.abs(phase @ window) / n_window

    params = mathieu_q(trap, particle)
    force = np.asarray(static_force, dtype=float)
    pred = np.empty(3)
    for i, (q_u, _a_u) in enumerate(params.per_axis()):
        w_sec = abs(q_u) * trap.omega_drive / TWO_SQRT2
        pred[i] = force[i] / (particle.mass * w_sec**2) if w_sec > 0 else math.inf
    return SteadyStateResponse(displacement=displacement, prediction=pred,
                               micromotion_per_axis=mm,
                               micromotion_amplitude=float(np.linalg.norm(mm)))


def equilibrium_displacement(trap: TrapConfig, particle: ParticleState,
                             gas: GasEnvironment = None, static_force=(0.0, 0.0, 0.0),
                             gamma: float = None, steps_per_period: int = 100,
                             settle_constants: float = 30.0,
                             window_periods: int = None) -> EquilibriumResult:
    """Static displacement under a constant force, from the converged orbit.

    See :func:`steady_state_response` for the measurement procedure; the
    pseudo-potential prediction F/(m omega_sec^2) per axis is reported
    alongside the time average.
    """
    if gamma is None:
        gamma = damping_rate(particle, gas) if gas is not None else 0.0
    if gamma <= 0.0:
        raise ValueError("equilibrium averaging requires nonzero damping")
    resp = steady_state_response(trap, particle, gamma, static_force,
                                 steps_per_period, settle_constants,
                                 window_periods)
    return EquilibriumResult(displacement=resp.displacement,
                             prediction=resp.prediction)


@dataclass(frozen=True)
class MicromotionResult:
    """Drive-synchronous amplitude and its small-q analytic check."""

    amplitude: float  # m, norm over axes of the lock-in amplitudes
    per_axis: np.ndarray  # (3,) m
    analytic_estimate: float  # m, norm of |q_u/2| * <u>


def micromotion_amplitude(traj: Trajectory, settle_fraction: float = 0.5
                          ) -> MicromotionResult:
    """Lock-in amplitude of the motion at the drive frequency.

    Demodulates the post-transient record (the trailing part of the
    trajectory, truncated to an integer number of drive periods) at Omega.
    The analytic small-q estimate |q/2| * mean displacement per axis is
    reported for comparison.
    """
    if traj.status != "ok":
        raise UnstableTrapError("micromotion undefined on an escaped trajectory")
    spp = traj.steps_per_period
    n = traj.positions.shape[0]
    start = int(n * settle_fraction)
    n_window = ((n - start - 1) // spp) * spp
    if n_window < spp:
        raise NoSecularLineError("record too short for one full drive period")
    seg = traj.positions[start : start + n_window]
    t_seg = traj.times[start : start + n_window]

    phase = np.exp(-1j * traj.omega_drive * t_seg)
    amps = 2.0 * np.abs(phase @ seg) / n_window  # per-axis lock-in amplitude

    analytic = 0.0
    if traj.trap is not None and traj.particle is not None:
        params = mathieu_q(traj.trap, traj.particle)
        means = seg.mean(axis=0)
        comps = [abs(q_u) / 2.0 * abs(means[i])
                 for i, (q_u, _a) in enumerate(params.per_axis())]
        analytic = float(np.linalg.norm(comps))
    return MicromotionResult(amplitude=float(np.linalg.norm(amps)),
                             per_axis=amps, analytic_estimate=analytic)


def iso_q_ramp(start: TrapConfig, v_pp_end: float, steps: int):
    """Voltage/frequency schedule holding the stability parameter constant.

    Geometric interpolation of v_pp with Omega_i = Omega_start *
    sqrt(v_i / v_start), so q (proportional to V / Omega^2) is identical
    across the schedule. Returns ``steps`` configs ending exactly at
    ``v_pp_end``; the start config is not repeated.
    """
    if not v_pp_end < start.v_pp:
        raise ValueError("v_pp_end must be below the starting v_pp")
    if v_pp_end <= 0:
        raise ValueError("v_pp_end must be > 0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    ratio = v_pp_end / start.v_pp
    schedule = []
    for i in range(1, steps + 1):
        v_i = v_pp_end if i == steps else start.v_pp * ratio ** (i / steps)
        omega_i = start.omega_drive * math.sqrt(v_i / start.v_pp)
        schedule.append(replace(start, v_pp=v_i, omega_drive=omega_i))
    return schedule
