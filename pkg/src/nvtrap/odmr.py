"""ESR/ODMR spectra: forward synthesis and double-dip fitting.

The forward model is a flat photoluminescence baseline with two symmetric
absorption dips at the spin transition frequencies:

    pl(f) = s_max * [1 - (c/2) * (g((f - f_minus)/sigma) + g((f - f_plus)/sigma))]

with g a unit-peak line shape (Gaussian by default, Lorentzian behind a
flag). Fitting uses a damped iterative least-squares loop over the seven
parameters {s_max, c1, c2, sigma1, sigma2, d1, d2} (two centers, two widths,
two depths); widths and depths are optimized in log space so positivity needs
no explicit constraints.

"Contrast" everywhere means the normalized dip depth
(s_max - min pl) / s_max, evaluated on the model; note this differs from the
per-line depth parameter whenever the two lines overlap partially.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoDipError, SpectrumSynthesisError
from .spin import SpinParams, ZERO_FIELD, transition_frequencies

_DENSE_EVAL_POINTS = 4001


def _line_shape(x, shape):
    if shape == "gaussian":
        return np.exp(-0.5 * x * x)
    if shape == "lorentzian":
        return 1.0 / (1.0 + x * x)
    raise ValueError(f"unknown line shape {shape!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded noise for synthetic spectra.

    ``scale`` is the additive white-Gaussian sigma as a fraction of the
    baseline (kind "gaussian", the default); kind "poisson" draws counts
    around the model value instead and ignores ``scale``.
    """

    kind: str = "gaussian"
    seed: int = 0
    scale: float = 0.01

    def __post_init__(self):
        if self.kind not in ("gaussian", "poisson"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.scale < 0:
            raise ValueError("scale must be >= 0")


@dataclass
class Spectrum:
    """Sampled PL-vs-frequency data with acquisition metadata."""

    frequencies: np.ndarray  # GHz, strictly increasing
    pl: np.ndarray  # counts/s
    laser_power_w: float = None
    pressure_mbar: float = None
    description: str = ""

    def __post_init__(self):
        self.frequencies = np.asarray(self.frequencies, dtype=float)
        self.pl = np.asarray(self.pl, dtype=float)
        if self.frequencies.size < 8:
            raise ValueError("spectrum needs at least 8 points")
        if self.frequencies.size != self.pl.size:
            raise ValueError("frequencies and pl must have equal length")
        if not np.all(np.diff(self.frequencies) > 0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(self.pl < 0):
            raise ValueError("pl must be >= 0")


@dataclass(frozen=True)
class ContrastModel:
    """Empirical contrast-vs-temperature model: linear decay with a floor.

    Shipped default follows the measured power sweep: 2.5% at 310 K dropping
    to 1.0% at 470 K (slope 9.375e-5 /K), floored at 0.5%. The microscopic
    quenching mechanism is out of scope; all three numbers are overridable.
    """

    c_ref: float = 0.025
    t_ref: float = 310.0
    slope: float = 9.375e-5  # 1/K
    floor: float = 0.005

    def __post_init__(self):
        if not 0.0 < self.c_ref <= 0.2:
            raise ValueError("c_ref must be in (0, 0.2]")
        if self.floor < 0:
            raise ValueError("floor must be >= 0")
        if self.slope < 0:
            raise ValueError("slope must be >= 0")


def contrast_model_predict(model: ContrastModel, t: float) -> float:
    """Predicted contrast at temperature ``t`` >= the reference temperature."""
    if t < model.t_ref:
        raise ValueError(f"t={t} K below the model reference {model.t_ref} K")
    return float(np.clip(model.c_ref - model.slope * (t - model.t_ref),
                         model.floor, model.c_ref))


def dip_model(freqs, s_max, centers, sigmas, depths, shape="gaussian"):
    """Evaluate the two-dip model; ``depths`` are absolute counts/s."""
    f = np.asarray(freqs, dtype=float)
    out = np.full(f.shape, float(s_max))
    for c, s, d in zip(centers, sigmas, depths):
        out -= d * _line_shape((f - c) / s, shape)
    return out


def peak_overlap_factor(e_strain: float, sigma: float, shape: str = "gaussian") -> float:
    """Deepest point of the normalized two-line profile, in [1/2, 1].

    For two unit-amplitude half-depth lines split by 2E this is the factor
    kappa such that the spectrum minimum is s_max * (1 - c * kappa) when the
    synthesis contrast parameter is c. kappa -> 1 for fully merged lines and
    -> 1/2 for well-separated ones; evaluated densely, no closed form needed.
    """
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    half_span = abs(e_strain) + 8.0 * sigma
    f = np.linspace(-half_span, half_span, _DENSE_EVAL_POINTS)
    profile = 0.5 * (_line_shape((f + e_strain) / sigma, shape)
                     + _line_shape((f - e_strain) / sigma, shape))
    return float(profile.max())


def synthesize_spectrum(params: SpinParams, contrast: float, s_max: float,
                        sigma: float, f_start: float, f_stop: float,
                        n_points: int, noise: NoiseSpec = None,
                        shape: str = "gaussian", laser_power_w: float = None,
                        pressure_mbar: float = None,
                        description: str = "") -> Spectrum:
    """Forward-model a two-dip spectrum on a uniform frequency grid.

    ``contrast`` is the per-pair depth parameter of the model above (each line
    carries contrast/2 of the baseline). The grid must bracket both transition
    lines, otherwise the data would be unfittable and synthesis refuses.
    Deterministic for a fixed noise seed; negative noisy samples clamp to 0.
    """
    if not f_start < f_stop:
        raise ValueError("need f_start < f_stop")
    if n_points < 16:
        raise ValueError("n_points must be >= 16")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    if not 0.0 <= contrast <= 1.0:
        raise ValueError("contrast must be in [0, 1]")
    f_minus, f_plus = transition_frequencies(params, ZERO_FIELD)
    if not (f_start < f_minus and f_plus < f_stop):
        raise SpectrumSynthesisError(
            f"grid [{f_start}, {f_stop}] GHz does not bracket the lines at "
            f"{f_minus:.4f} and {f_plus:.4f} GHz"
        )

    freqs = np.linspace(f_start, f_stop, n_points)
    depth = 0.5 * contrast * s_max
    pl = dip_model(freqs, s_max, (f_minus, f_plus), (sigma, sigma),
                   (depth, depth), shape)

    if noise is not None:
        rng = np.random.default_rng(noise.seed)
        if noise.kind == "gaussian":
            pl = pl + rng.normal(0.0, noise.scale * s_max, size=pl.shape)
        else:  # poisson
            pl = rng.poisson(np.clip(pl, 0.0, None)).astype(float)
        pl = np.clip(pl, 0.0, None)

    return Spectrum(frequencies=freqs, pl=pl, laser_power_w=laser_power_w,
                    pressure_mbar=pressure_mbar, description=description)


@dataclass(frozen=True)
class DipGuess:
    """Starting point for the fit."""

    s_max: float
    center1: float
    center2: float
    sigma: float
    depth: float


def _noise_estimate(pl):
    """Robust per-point noise sigma from successive differences."""
    diffs = np.abs(np.diff(pl))
    return 1.4826 * float(np.median(diffs)) / math.sqrt(2.0)


def initial_guess(spectrum: Spectrum) -> DipGuess:
    """Heuristic starting parameters from the data.

    Baseline is the upper decile of the PL; dip centers are the two deepest
    separated local minima of the smoothed trace (moving-average window
    max(5, n/20) points). If only one minimum is found the two guesses
    straddle the global minimum by one smoothing window. A spectrum whose
    smoothed range stays under 3x the noise estimate has no detectable dip.
    """
    pl = spectrum.pl
    freqs = spectrum.frequencies
    n = pl.size
    window = max(5, n // 20)
    if window % 2 == 0:
        window += 1

    kernel = np.ones(window) / window
    smooth = np.convolve(pl, kernel, mode="same")
    # blunt the convolution edge roll-off
    half = window // 2
    smooth[:half] = smooth[half]
    smooth[-half:] = smooth[-half - 1]

    baseline = float(np.quantile(pl, 0.9))
    noise = _noise_estimate(pl)
    span = float(pl.max() - pl.min())
    if span < max(3.0 * noise, 1e-12 * max(1.0, abs(baseline))):
        raise NoDipError("no dip detected: spectrum is flat within noise")

    interior = slice(half, n - half)
    idx = np.arange(n)[interior]
    seg = smooth[interior]
    minima = [i for i in range(1, seg.size - 1)
              if seg[i] <= seg[i - 1] and seg[i] < seg[i + 1]]
    # deepest first, then keep only minima separated by at least one window
    minima.sort(key=lambda i: seg[i])
    chosen = []
    for i in minima:
        if all(abs(i - j) >= window for j in chosen):
            chosen.append(i)
        if len(chosen) == 2:
            break

    df = freqs[1] - freqs[0]
    if len(chosen) >= 2:
        c1, c2 = sorted(freqs[idx[i]] for i in chosen[:2])
        depth = baseline - float(min(seg[chosen[0]], seg[chosen[1]]))
    else:
        k = int(np.argmin(smooth))
        c0 = freqs[k]
        c1, c2 = c0 - window * df, c0 + window * df
        depth = baseline - float(smooth[k])

    sigma = max(window * df, 2.0 * df)
    depth = max(depth, 3.0 * noise, 1e-9 * max(1.0, baseline))
    return DipGuess(s_max=baseline, center1=c1, center2=c2,
                    sigma=sigma, depth=depth)


@dataclass
class OdmrFit:
    """Result of the double-dip fit.

    ``centers``/``sigmas``/``depths`` are ordered by ascending center;
    ``covariance`` is over the linear parameters (s_max, c1, c2, sigma1,
    sigma2, d1, d2); ``contrast`` is the normalized model dip depth over the
    fitted window.
    """

    s_max: float
    centers: tuple
    sigmas: tuple
    depths: tuple
    d_fit: float  # GHz, mean of the two centers
    e_fit: float  # GHz, half the center separation
    contrast: float
    covariance: np.ndarray
    converged: bool
    residual_rms: float
    n_iterations: int
    frequency_window: tuple
    shape: str = "gaussian"
    failure_reason: str = None
    cost_history: list = field(default_factory=list)

    def d_fit_sigma(self):
        """1-sigma uncertainty of d_fit from the center covariance block."""
        c = self.covariance
        var = 0.25 * (c[1, 1] + c[2, 2] + 2.0 * c[1, 2])
        return math.sqrt(max(var, 0.0))

    def to_flat_dict(self):
        return {
            "s_max_cps": self.s_max,
            "center1_ghz": self.centers[0],
            "center2_ghz": self.centers[1],
            "sigma1_ghz": self.sigmas[0],
            "sigma2_ghz": self.sigmas[1],
            "depth1_cps": self.depths[0],
            "depth2_cps": self.depths[1],
            "d_fit_ghz": self.d_fit,
            "e_fit_ghz": self.e_fit,
            "d_fit_sigma_ghz": self.d_fit_sigma(),
            "contrast": self.contrast,
            "converged": self.converged,
            "residual_rms_cps": self.residual_rms,
            "n_iterations": self.n_iterations,
            "f_window_start_ghz": self.frequency_window[0],
            "f_window_stop_ghz": self.frequency_window[1],
            "shape": self.shape,
            "failure_reason": self.failure_reason,
            "covariance": [list(map(float, row)) for row in self.covariance],
        }


def _model_and_jacobian(theta, freqs, shape):
    """Model values and Jacobian wrt (s_max, c1, c2, ln s1, ln s2, ln d1, ln d2)."""
    s_max, c1, c2 = theta[0], theta[1], theta[2]
    s1, s2 = math.exp(theta[3]), math.exp(theta[4])
    d1, d2 = math.exp(theta[5]), math.exp(theta[6])

    jac = np.empty((freqs.size, 7))
    jac[:, 0] = 1.0
    m = np.full(freqs.size, s_max)
    for k, (c, s, d) in enumerate(((c1, s1, d1), (c2, s2, d2))):
        x = (freqs - c) / s
        g = _line_shape(x, shape)
        if shape == "gaussian":
            dg_dx = -x * g
        else:  # lorentzian
            dg_dx = -2.0 * x * g * g
        m -= d * g
        jac[:, 1 + k] = d * dg_dx / s  # d m / d c_k  (minus chain twice)
        jac[:, 3 + k] = d * dg_dx * x  # d m / d ln sigma_k
        jac[:, 5 + k] = -d * g  # d m / d ln d_k
    return m, jac


def _theta_from_guess(init: DipGuess):
    scale = max(init.s_max, 1.0)
    return np.array([
        init.s_max,
        init.center1,
        init.center2,
        math.log(max(init.sigma, 1e-12)),
        math.log(max(init.sigma, 1e-12)),
        math.log(max(init.depth / 2.0, 1e-12 * scale)),
        math.log(max(init.depth / 2.0, 1e-12 * scale)),
    ])


def _run_damped_lsq(theta, freqs, pl, shape, max_iter, cost_rtol):
    """One damped least-squares descent; returns (theta, cost, history,
    n_iter, converged)."""
    m, jac = _model_and_jacobian(theta, freqs, shape)
    r = pl - m
    cost = float(r @ r)
    cost_floor = (1e-12 * max(abs(theta[0]), 1.0)) ** 2 * freqs.size
    history = [cost]

    lam = 1e-3
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        jtj = jac.T @ jac
        jtr = jac.T @ r
        accepted = False
        for _ in range(40):
            a = jtj + lam * np.diag(np.clip(np.diag(jtj), 1e-30, None))
            try:
                step = np.linalg.solve(a, jtr)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            theta_new = theta + step
            # keep log widths/depths in a representable range
            theta_new[3:] = np.clip(theta_new[3:], -60.0, 60.0)
            m_new, jac_new = _model_and_jacobian(theta_new, freqs, shape)
            r_new = pl - m_new
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            break
        improvement = cost - cost_new
        theta, m, jac, r = theta_new, m_new, jac_new, r_new
        cost = cost_new
        history.append(cost)
        lam = max(lam / 3.0, 1e-12)
        if cost <= cost_floor or (improvement <= cost_rtol * max(cost, 1e-300)):
            converged = True
            break
    return theta, cost, history, n_iter, converged


def _candidate_guesses(spectrum: Spectrum, primary: DipGuess):
    """Alternative deterministic starting points around the global minimum."""
    pl = spectrum.pl
    freqs = spectrum.frequencies
    n = pl.size
    window = max(5, n // 20)
    if window % 2 == 0:
        window += 1
    kernel = np.ones(window) / window
    smooth = np.convolve(pl, kernel, mode="same")
    half = window // 2
    smooth[:half] = smooth[half]
    smooth[-half:] = smooth[-half - 1]
    k = int(np.argmin(smooth))
    c0 = freqs[k]
    df = freqs[1] - freqs[0]
    depth = max(primary.s_max - float(smooth[k]), primary.depth)

    out = []
    for spread in (window * df, 0.25 * window * df):
        out.append(DipGuess(s_max=primary.s_max, center1=c0 - spread,
                            center2=c0 + spread, sigma=primary.sigma,
                            depth=depth))
    return out


def fit_double_gaussian(spectrum: Spectrum, init: DipGuess = None,
                        shape: str = "gaussian", max_iter: int = 200,
                        cost_rtol: float = 1e-10) -> OdmrFit:
    """Fit the two-dip model by damped least squares (Levenberg-Marquardt).

    Iterates until the relative cost change of an accepted step falls below
    ``cost_rtol`` (or the cost hits the numerical floor, or ``max_iter``).
    The cost over accepted iterations never increases. With ``init=None`` the
    fit deterministically tries the data-driven guess plus two symmetric
    straddle starts and keeps the lowest-cost solution (shallow dips near the
    noise floor otherwise strand the descent in a local minimum). A spectrum
    without a detectable dip yields a non-converged result carrying the
    reason instead of raising.
    """
    freqs = spectrum.frequencies
    pl = spectrum.pl
    window = (float(freqs[0]), float(freqs[-1]))

    if init is None:
        try:
            primary = initial_guess(spectrum)
        except NoDipError as exc:
            zero_cov = np.zeros((7, 7))
            return OdmrFit(s_max=float(np.mean(pl)), centers=(0.0, 0.0),
                           sigmas=(0.0, 0.0), depths=(0.0, 0.0), d_fit=0.0,
                           e_fit=0.0, contrast=0.0, covariance=zero_cov,
                           converged=False, residual_rms=float(np.std(pl)),
                           n_iterations=0, frequency_window=window, shape=shape,
                           failure_reason=str(exc))
        starts = [primary] + _candidate_guesses(spectrum, primary)
    else:
        starts = [init]

    best = None
    total_iter = 0
    for guess in starts:
        result = _run_damped_lsq(_theta_from_guess(guess), freqs, pl, shape,
                                 max_iter, cost_rtol)
        total_iter += result[3]
        if best is None or result[1] < best[1]:
            best = result
    theta, cost, history, _, converged = best
    n_iter = total_iter

    m, jac = _model_and_jacobian(theta, freqs, shape)
    r = pl - m

    s_max = float(theta[0])
    centers = (float(theta[1]), float(theta[2]))
    sigmas = (math.exp(theta[3]), math.exp(theta[4]))
    depths = (math.exp(theta[5]), math.exp(theta[6]))
    if centers[0] > centers[1]:  # canonical order: ascending centers
        centers = centers[::-1]
        sigmas = sigmas[::-1]
        depths = depths[::-1]
        theta = theta[[0, 2, 1, 4, 3, 6, 5]]
        m, jac = _model_and_jacobian(theta, freqs, shape)
        r = pl - m

    failure = None
    if not converged:
        failure = f"no convergence within {max_iter} iterations"
    if max(depths) > s_max * (1.0 + 1e-9):
        converged = False
        failure = "fitted dip depth exceeds the baseline"

    dof = max(freqs.size - 7, 1)
    s2 = cost / dof
    cov_log = s2 * np.linalg.pinv(jac.T @ jac, rcond=1e-12)
    # transform from log widths/depths to linear parameters
    scale_vec = np.array([1.0, 1.0, 1.0, sigmas[0], sigmas[1],
                          depths[0], depths[1]])
    cov = cov_log * np.outer(scale_vec, scale_vec)

    d_fit = 0.5 * (centers[0] + centers[1])
    e_fit = 0.5 * abs(centers[1] - centers[0])

    dense = np.linspace(window[0], window[1], _DENSE_EVAL_POINTS)
    model_min = float(dip_model(dense, s_max, centers, sigmas, depths, shape).min())
    contrast = (s_max - model_min) / s_max if s_max > 0 else 0.0

    return OdmrFit(s_max=s_max, centers=centers, sigmas=sigmas, depths=depths,
                   d_fit=d_fit, e_fit=e_fit, contrast=contrast, covariance=cov,
                   converged=converged,
                   residual_rms=math.sqrt(cost / freqs.size),
                   n_iterations=n_iter, frequency_window=window, shape=shape,
                   failure_reason=failure, cost_history=history)


def contrast_of_fit(fit: OdmrFit) -> float:
    """Normalized dip depth (s_max - model minimum) / s_max of a converged fit.

    The minimum comes from dense evaluation of the fitted model over its
    frequency window; invariant under uniform rescaling of the counts.
    """
    if not fit.converged:
        raise ValueError("contrast undefined for a non-converged fit")
    dense = np.linspace(fit.frequency_window[0], fit.frequency_window[1],
                        _DENSE_EVAL_POINTS)
    model_min = float(dip_model(dense, fit.s_max, fit.centers, fit.sigmas,
                                fit.depths, fit.shape).min())
    return (fit.s_max - model_min) / fit.s_max if fit.s_max > 0 else 0.0


def write_spectrum_csv(spectrum: Spectrum, path):
    """Write the `freq_ghz,pl_cps` CSV representation."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["freq_ghz", "pl_cps"])
        for f, v in zip(spectrum.frequencies, spectrum.pl):
            writer.writerow([repr(float(f)), repr(float(v))])


def read_spectrum_csv(path, laser_power_w=None, pressure_mbar=None,
                      description="") -> Spectrum:
    """Read a `freq_ghz,pl_cps` CSV file."""
    freqs = []
    pl = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [h.strip() for h in header] != ["freq_ghz", "pl_cps"]:
            raise ValueError(f"unexpected spectrum header {header!r}")
        for row in reader:
            if not row:
                continue
            freqs.append(float(row[0]))
            pl.append(float(row[1]))
    return Spectrum(frequencies=np.asarray(freqs), pl=np.asarray(pl),
                    laser_power_w=laser_power_w, pressure_mbar=pressure_mbar,
                    description=description)
