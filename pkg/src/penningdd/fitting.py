"""Data-reduction fits: Rabi lineshape, fringe-decay noise calibration,
exponential/Gaussian decay, fluorescence normalization."""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .coherence import chi as coherence_chi
from .errors import Degenerate, NonConvergence, PoorFit
from .noise import NoiseSpectrum
from .sequences import PulseSequence


@dataclass(frozen=True)
class RabiModel:
    """Driven-rotation lineshape parameters."""

    omega0: float        # rad/s resonance of the drive reference
    tau_pi: float        # s
    theta: float         # rad nominal rotation angle

    def __post_init__(self):
        if self.tau_pi <= 0:
            raise ValueError("tau_pi must be positive")
        if self.theta <= 0:
            raise ValueError("theta must be positive")


def rabi_lineshape(model: RabiModel, omega):
    """Upper-state population after a detuned rotation.

    P = 1 - (1 + x^2)^-1 sin^2[(theta/2) sqrt(1 + x^2)],
    x = (omega - omega0) / (2 pi / tau_pi).
    """
    x = (np.asarray(omega, dtype=float) - model.omega0) \
        / (2 * np.pi / model.tau_pi)
    g = 1.0 + x**2
    out = 1.0 - np.sin(model.theta / 2 * np.sqrt(g)) ** 2 / g
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ResonanceFit:
    omega0: float
    ci: float            # 68 % confidence half-width
    rms_residual: float


def fit_resonance(omega, p_up, tau_pi: float, theta: float,
                  sigma=None, poor_fit_threshold: float = 0.2
                  ) -> ResonanceFit:
    """Least-squares fit of the lineshape with omega0 as the only free
    parameter.

    Points may carry per-point standard deviations `sigma` (binomial
    weighting of averaged shots); unweighted otherwise.  Raises PoorFit
    when the rms residual exceeds the threshold.
    """
    omega = np.asarray(omega, dtype=float)
    p_up = np.asarray(p_up, dtype=float)
    if omega.size < 5:
        raise ValueError("need at least 5 points across the central lobe")
    if sigma is None:
        wts = np.ones_like(omega)
    else:
        wts = 1.0 / np.maximum(np.asarray(sigma, dtype=float), 1e-12) ** 2

    def cost(w0):
        m = rabi_lineshape(RabiModel(w0, tau_pi, theta), omega)
        return float(np.sum(wts * (p_up - m) ** 2))

    # coarse scan then local refinement; the lineshape has side lobes
    grid = np.linspace(omega.min(), omega.max(), 512)
    w0 = grid[np.argmin([cost(g) for g in grid])]
    span = grid[1] - grid[0]
    res = optimize.minimize_scalar(cost, bounds=(w0 - 2 * span, w0 + 2 * span),
                                   method="bounded",
                                   options={"xatol": span * 1e-10})
    w0 = float(res.x)
    rms = math.sqrt(cost(w0) / np.sum(wts))
    if rms > poor_fit_threshold:
        raise PoorFit(f"rms residual {rms:.3g} exceeds {poor_fit_threshold}")

    # 68 % CI from the local curvature of the weighted least squares
    h = max(abs(w0) * 1e-8, 2 * np.pi * 1e-4 / tau_pi * 1e-4)
    d2 = (cost(w0 + h) - 2 * cost(w0) + cost(w0 - h)) / h**2
    dof = max(omega.size - 1, 1)
    ci = math.sqrt(2 * cost(w0) / dof / d2) if d2 > 0 else math.inf
    return ResonanceFit(omega0=w0, ci=ci, rms_residual=rms)


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    ci: float
    rms_residual: float


def calibrate_alpha(taus, envelope, spectrum: NoiseSpectrum,
                    sequence: PulseSequence | None = None,
                    rel_tol: float = 1e-6) -> AlphaFit:
    """Fit the overall noise strength to fringe-decay envelope data.

    `envelope` holds the plotted decay quantity (1 - W)/2.  The shape of
    `spectrum` is kept fixed and only the multiplicative strength alpha
    is fit; chi is linear in alpha so a single set of unit-strength
    coherence integrals suffices.  Raises Degenerate when the data show
    no decay (all contrast above 0.9).
    """
    taus = np.asarray(taus, dtype=float)
    y = np.asarray(envelope, dtype=float)
    if taus.size != y.size or taus.size < 3:
        raise ValueError("need matching tau/envelope arrays, length >= 3")
    if np.max(y) < 0.05:
        raise Degenerate("no decay observed: contrast never falls below 0.9")

    unit = replace(spectrum, alpha=1.0)
    chi1 = np.array([coherence_chi(unit, t, sequence, rel_tol) for t in taus])

    # pointwise inversion of informative points gives the starting value
    mask = (y > 0.01) & (y < 0.49) & (chi1 > 0)
    if not np.any(mask):
        raise Degenerate("no informative points between 2 % and 98 % contrast")
    alpha0 = float(np.median(-np.log(1 - 2 * y[mask]) / chi1[mask]))

    def cost(log_a):
        model = (1 - np.exp(-math.exp(log_a) * chi1)) / 2
        return float(np.sum((y - model) ** 2))

    res = optimize.minimize_scalar(
        cost, bounds=(math.log(alpha0) - 6, math.log(alpha0) + 6),
        method="bounded", options={"xatol": 1e-12})
    alpha = math.exp(res.x)
    rms = math.sqrt(cost(res.x) / taus.size)

    h = 1e-5
    d2 = (cost(res.x + h) - 2 * cost(res.x) + cost(res.x - h)) / h**2
    dof = max(taus.size - 1, 1)
    ci_log = math.sqrt(2 * cost(res.x) / dof / d2) if d2 > 0 else math.inf
    return AlphaFit(alpha=alpha, ci=alpha * ci_log, rms_residual=rms)


@dataclass(frozen=True)
class DecayFit:
    """Amplitude/time-constant fit of a decaying signal."""

    model: str                 # "exponential" | "gaussian"
    amplitude: float
    time_constant: float
    residual_norm: float
    amplitude_ci: float
    time_constant_ci: float

    def __post_init__(self):
        if self.time_constant <= 0:
            raise ValueError("fitted time constant must be positive")

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if self.model == "exponential":
            return self.amplitude * np.exp(-t / self.time_constant)
        return self.amplitude * np.exp(-((t / self.time_constant) ** 2))


def _decay_model(model: str):
    if model == "exponential":
        return lambda t, a, tc: a * np.exp(-t / tc)
    if model == "gaussian":
        return lambda t, a, tc: a * np.exp(-((t / tc) ** 2))
    raise ValueError(f"unknown decay model {model!r}")


def fit_decay(t, y, model: str = "exponential") -> DecayFit:
    """Fit A exp(-t/T) or A exp(-(t/T)^2) to decay data.

    Raises NonConvergence when the optimizer fails.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 4:
        raise ValueError("need at least 4 points")
    f = _decay_model(model)
    a0 = float(np.max(np.abs(y)))
    below = np.nonzero(y < a0 / math.e)[0]
    tc0 = float(t[below[0]]) if below.size and t[below[0]] > 0 \
        else float(t[-1] / 2)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            popt, pcov = optimize.curve_fit(
                f, t, y, p0=(a0, tc0),
                bounds=((0, 1e-300), (np.inf, np.inf)), maxfev=20000)
    except (RuntimeError, ValueError) as exc:
        raise NonConvergence(f"{model} decay fit failed: {exc}") from exc
    resid = y - f(t, *popt)
    cis = np.sqrt(np.clip(np.diag(pcov), 0, np.inf))
    return DecayFit(model=model, amplitude=float(popt[0]),
                    time_constant=float(popt[1]),
                    residual_norm=float(np.linalg.norm(resid)),
                    amplitude_ci=float(cis[0]),
                    time_constant_ci=float(cis[1]))


class NegativeRateWarning(UserWarning):
    """Extrapolated fluorescence rate below zero; clamped."""


def normalize_fluorescence(bright_rate: float, post_bins) -> float:
    """Upper-state population from post-sequence fluorescence bins.

    The detection window is split into five equal bins; a linear fit of
    count rate against bin index, extrapolated to the start of the
    window, removes the repumping slope.  The intercept is normalized to
    the bright-state reference rate.  Negative intercepts are clamped to
    zero with a NegativeRateWarning.
    """
    bins = np.asarray(post_bins, dtype=float)
    if bins.size != 5:
        raise ValueError("expected exactly 5 post-measurement bins")
    if bright_rate <= 0:
        raise ValueError("bright reference rate must be positive")
    slope, intercept = np.polyfit(np.arange(5.0), bins, 1)
    if intercept < 0:
        warnings.warn("negative extrapolated rate clamped to 0",
                      NegativeRateWarning)
        intercept = 0.0
    return float(intercept / bright_rate)
