"""Dephasing-noise power spectra and time-domain trace synthesis.

Spectra S(omega) are one-sided densities for the dephasing variable
beta(t) (rad/s), in the convention fixed by the coherence integral

    chi(tau) = (2/pi) * int_0^inf S(omega)/omega^2 * F(omega tau) domega,

with W = exp(-chi).  Consistency between that integral and the phase
variance of beta accumulated through a filter requires the two-time
correlation <beta(t) beta(t+dt)> = (4/pi) int_0^inf S cos(omega dt) domega,
i.e. the conventional two-sided power spectral density of a synthesized
trace equals 4*S.  Every routine in this module (synthesis, periodogram
estimation, rms integration) shares this single convention.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NegativeFrequency, NyquistViolation, SegmentTooLong

# effective support of shapes without a hard cutoff: frequency where the
# density has fallen to this fraction of its peak
_SUPPORT_FLOOR = 1e-6

DEFAULT_LINE_FWHM = 2 * np.pi * 1.0    # rad/s


class NoiseSpectrum:
    """Base class; concrete shapes implement _shape(omega >= 0)."""

    alpha: float

    def evaluate(self, omega):
        """S(omega) = alpha * shape(omega).  Raises NegativeFrequency."""
        w = np.asarray(omega, dtype=float)
        if np.any(w < 0):
            raise NegativeFrequency("spectrum defined for omega >= 0 only")
        out = self.alpha * self._shape(w)
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, omega):
        return self.evaluate(omega)

    def two_sided_std_psd(self, omega):
        """Standard two-sided PSD of beta at |omega| (equals 4*S)."""
        return 4.0 * self.evaluate(np.abs(omega))

    # --- hooks used by quadrature, synthesis and the Monte Carlo oracle ---

    def support_cutoff(self) -> float | None:
        """Upper angular frequency above which S is (effectively) zero.

        None means the spectrum is flat to arbitrarily high frequency and
        is treated as band-limited to Nyquist wherever it is sampled.
        """
        raise NotImplementedError

    def breakpoints(self) -> list[float]:
        """Frequencies where S has kinks, cutoffs or narrow features."""
        return []

    def low_frequency_order(self) -> float:
        """Exponent q with S ~ omega^q as omega -> 0+ (0 when bounded)."""
        return 0.0


@dataclass(frozen=True)
class White(NoiseSpectrum):
    """Flat spectrum S = alpha."""

    alpha: float = 1.0

    def _shape(self, w):
        return np.ones_like(w)

    def support_cutoff(self):
        return None


@dataclass(frozen=True)
class OhmicSharpCutoff(NoiseSpectrum):
    """S = alpha * omega up to omega_hi, zero above."""

    omega_hi: float
    alpha: float = 1.0

    def __post_init__(self):
        if self.omega_hi <= 0:
            raise ValueError("omega_hi must be positive")

    def _shape(self, w):
        return np.where(w <= self.omega_hi, w, 0.0)

    def support_cutoff(self):
        return self.omega_hi

    def breakpoints(self):
        return [self.omega_hi]

    def low_frequency_order(self):
        return 1.0


@dataclass(frozen=True)
class AmbientPowerLaw(NoiseSpectrum):
    """Power law alpha * omega^-p, flattened to a plateau below omega_lo.

    Optional narrow spectral lines are Lorentzians of integrated weight
    weight_k (same units as S times rad/s) centered at omega_k, with a
    common full width at half maximum.
    """

    exponent: float
    omega_lo: float
    alpha: float = 1.0
    lines: tuple[tuple[float, float], ...] = field(default=())
    line_fwhm: float = DEFAULT_LINE_FWHM

    def __post_init__(self):
        if self.exponent <= 0:
            raise ValueError("exponent must be positive")
        if self.omega_lo < 0:
            raise ValueError("omega_lo must be nonnegative")
        if self.line_fwhm <= 0:
            raise ValueError("line_fwhm must be positive")
        lines = tuple((float(w), float(a)) for w, a in self.lines)
        if any(w <= 0 or a < 0 for w, a in lines):
            raise ValueError("lines need omega_k > 0 and weight_k >= 0")
        object.__setattr__(self, "lines", lines)

    def _shape(self, w):
        if self.omega_lo > 0:
            s = np.maximum(w, self.omega_lo) ** (-self.exponent)
        else:
            with np.errstate(divide="ignore"):
                s = np.where(w > 0, w, np.inf) ** (-self.exponent)
        gamma = self.line_fwhm / 2
        for w_k, weight in self.lines:
            s = s + weight * (gamma / np.pi) / ((w - w_k) ** 2 + gamma**2)
        return s

    def support_cutoff(self):
        w = self.omega_lo * _SUPPORT_FLOOR ** (-1.0 / self.exponent)
        for w_k, weight in self.lines:
            if weight > 0:
                w = max(w, w_k + 50 * self.line_fwhm)
        return w

    def breakpoints(self):
        pts = [self.omega_lo] if self.omega_lo > 0 else []
        gamma = self.line_fwhm / 2
        for w_k, weight in self.lines:
            if weight > 0:
                pts += [max(w_k - 10 * gamma, 0.0), w_k, w_k + 10 * gamma]
        return pts

    def low_frequency_order(self):
        return -self.exponent if self.omega_lo == 0 else 0.0


@dataclass(frozen=True)
class Tabulated(NoiseSpectrum):
    """Spectrum from sorted (omega, S) pairs; log-log interpolation inside
    the table, zero outside.  Point pairs that cannot be interpolated in
    log space (zero or nonpositive values) fall back to linear."""

    omegas: tuple[float, ...]
    values: tuple[float, ...]
    alpha: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if w.size < 2 or w.size != v.size:
            raise ValueError("need matching omega/value arrays, length >= 2")
        if np.any(np.diff(w) <= 0):
            raise ValueError("omegas must be strictly increasing")
        if np.any(w < 0) or np.any(v < 0):
            raise ValueError("omegas and values must be nonnegative")
        object.__setattr__(self, "omegas", tuple(w))
        object.__setattr__(self, "values", tuple(v))

    def _shape(self, w):
        xs = np.asarray(self.omegas)
        ys = np.asarray(self.values)
        shape = np.shape(w)
        w = np.atleast_1d(np.asarray(w, dtype=float))
        out = np.zeros_like(w)
        inside = (w >= xs[0]) & (w <= xs[-1])
        if np.any(inside):
            wi = w[inside]
            idx = np.clip(np.searchsorted(xs, wi, side="right") - 1,
                          0, xs.size - 2)
            x0, x1 = xs[idx], xs[idx + 1]
            y0, y1 = ys[idx], ys[idx + 1]
            res = y0 + (y1 - y0) * (wi - x0) / (x1 - x0)
            ok = (y0 > 0) & (y1 > 0) & (x0 > 0)
            if np.any(ok):
                frac = np.log(wi[ok] / x0[ok]) / np.log(x1[ok] / x0[ok])
                res[ok] = y0[ok] * (y1[ok] / y0[ok]) ** frac
            out[inside] = res
        return out.reshape(shape)

    def support_cutoff(self):
        return float(self.omegas[-1])

    def breakpoints(self):
        knots = [w for w in self.omegas]
        if len(knots) <= 40:
            return knots
        idx = np.unique(np.linspace(0, len(knots) - 1, 40).astype(int))
        return [knots[i] for i in idx]


@dataclass(frozen=True)
class NoiseTrace:
    """Uniformly sampled realization of beta(t)."""

    dt: float
    samples: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.size < 2:
            raise ValueError("trace needs at least two samples")
        if not np.all(np.isfinite(s)):
            raise ValueError("trace samples must be finite")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.n * self.dt

    def times(self) -> np.ndarray:
        return np.arange(self.n) * self.dt


def check_nyquist(spec: NoiseSpectrum, dt: float):
    """Raise NyquistViolation if S has support above pi/dt."""
    cutoff = spec.support_cutoff()
    if cutoff is not None and cutoff > np.pi / dt * (1 + 1e-12):
        raise NyquistViolation(
            f"spectrum support extends to {cutoff:.4e} rad/s, above "
            f"pi/dt = {np.pi / dt:.4e} rad/s")


def synthesize_from_rng(spec: NoiseSpectrum, dt: float, n: int,
                        rng: np.random.Generator) -> np.ndarray:
    """Draw one stationary Gaussian trace of n samples from an open rng.

    Independent complex Gaussian Fourier coefficients are drawn with
    variance proportional to the two-sided PSD 4*S(omega_k), Hermitian
    symmetry is enforced via an inverse real FFT, and the DC and Nyquist
    bins are real.  The resulting samples have covariance equal to the
    band-limited discretization of the target correlation function; the
    random DC component carries the spectral weight of the lowest
    resolution cell (shot-to-shot offsets).
    """
    half = n // 2
    omega = 2 * np.pi * np.fft.rfftfreq(n, dt)
    s2 = spec.two_sided_std_psd(omega)
    draws = rng.standard_normal((half + 1, 2))
    coef = np.sqrt(n * s2 / (2 * dt)) * (draws[:, 0] + 1j * draws[:, 1])
    coef[0] = math.sqrt(n * s2[0] / dt) * draws[0, 0]
    coef[-1] = math.sqrt(n * s2[-1] / dt) * draws[-1, 0]
    return np.fft.irfft(coef, n=n)


def synthesize_trace(spec: NoiseSpectrum, dt: float, n: int,
                     seed: int) -> NoiseTrace:
    """Synthesize a noise trace whose ensemble periodogram converges to S.

    n must be a power of two.  Deterministic for a fixed seed; distinct
    seeds yield independent traces.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if n < 2 or n & (n - 1):
        raise ValueError("n must be a power of two, >= 2")
    check_nyquist(spec, dt)
    if spec.alpha == 0:
        return NoiseTrace(dt=dt, samples=np.zeros(n), seed=seed)
    rng = np.random.default_rng(seed)
    return NoiseTrace(dt=dt, samples=synthesize_from_rng(spec, dt, n, rng),
                      seed=seed)


def estimate_psd(trace: NoiseTrace, segment_length: int) -> Tabulated:
    """Averaged-periodogram spectrum estimate, in evaluate() units.

    Hann-windowed segments with 50 % overlap; the window keeps spectral
    leakage decaying faster than any power law of interest here.  The DC
    bin is dropped (it holds the per-trace offset, not a density), so the
    returned table starts at the first resolved bin 2*pi/(L*dt).
    """
    n = trace.n
    seg = int(segment_length)
    if seg > n:
        raise SegmentTooLong(f"segment length {seg} exceeds trace length {n}")
    if seg < 4:
        raise ValueError("segment length must be >= 4")
    x = trace.samples
    window = np.hanning(seg)
    norm = np.sum(window**2)
    hop = max(seg // 2, 1)
    acc = None
    count = 0
    for start in range(0, n - seg + 1, hop):
        fx = np.fft.rfft(window * x[start:start + seg])
        p = np.abs(fx) ** 2 * trace.dt / norm
        acc = p if acc is None else acc + p
        count += 1
    avg = acc / count
    omega = 2 * np.pi * np.fft.rfftfreq(seg, trace.dt)
    # two-sided standard PSD -> module convention
    return Tabulated(omegas=tuple(omega[1:]), values=tuple(avg[1:] / 4.0))


def integrated_rms(spec: NoiseSpectrum, omega_a: float,
                   omega_b: float) -> float:
    """sqrt((1/pi) * int_a^b S domega) in rad/s, module rms convention."""
    if not 0 <= omega_a < omega_b:
        raise ValueError("need 0 <= omega_a < omega_b")
    if spec.alpha == 0:
        return 0.0
    if math.isinf(omega_b):
        cutoff = spec.support_cutoff()
        if cutoff is None:
            raise ValueError("band must be finite for a flat spectrum")
        omega_b = max(cutoff, omega_a * 2)
    from scipy.integrate import quad
    pts = [p for p in spec.breakpoints() if omega_a < p < omega_b]
    val, _ = quad(lambda w: spec.evaluate(w), omega_a, omega_b,
                  points=pts or None, limit=200)
    return math.sqrt(max(val, 0.0) / np.pi)


def phase_noise_stepup(factor: float) -> float:
    """Phase-noise increase 20*log10(N) in dB for frequency multiplication
    by N."""
    if factor <= 0:
        raise ValueError("multiplication factor must be positive")
    return 20.0 * math.log10(factor)


def read_spectrum_table(path) -> Tabulated:
    """Read a tabulated spectrum from two-column text (omega, S); '#'
    comments allowed."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("expected two columns: omega, S")
    return Tabulated(omegas=tuple(data[:, 0]), values=tuple(data[:, 1]))


def write_spectrum_table(path, spec: Tabulated, comment: str = ""):
    """Write a tabulated spectrum as two-column text."""
    header = comment or "omega_rad_per_s  S_module_units"
    data = np.column_stack([spec.omegas,
                            spec.alpha * np.asarray(spec.values)])
    np.savetxt(path, data, header=header)
