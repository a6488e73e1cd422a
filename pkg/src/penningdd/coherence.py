"""Analytic coherence engine: filter functions, the coherence integral and
coherence curves.

The frequency-domain filter of an n-pulse sequence with fractional pulse
centers delta_j and pulse width tau_pi is

    F(w tau) = |1 + (-1)^(n+1) e^{i w tau}
                + 2 sum_j (-1)^j e^{i delta_j w tau} cos(w tau_pi / 2)|^2,

equal to w^2 |y~(w)|^2 with y~ the Fourier transform of the time-domain
filter.  Coherence follows from chi(tau) = (2/pi) int_0^inf S(w)/w^2
F(w tau) dw and W = exp(-chi).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import DivergentIntegrand, NoCrossing, NonConvergent
from .noise import NoiseSpectrum, White
from .sequences import PulseSequence, ramsey, realize, time_domain_filter

DEFAULT_REL_TOL = 1e-6

# below omega*tau = this, F/omega^2 is replaced by its omega->0 limit
_OMEGA_FLOOR_PHASE = 2 * np.pi * 1e-6


def ramsey_filter(theta):
    """Free-induction filter F = 4 sin^2(theta/2) at dimensionless
    theta = omega*tau."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise ValueError("omega*tau must be nonnegative")
    out = 4.0 * np.sin(theta / 2) ** 2
    return float(out) if out.ndim == 0 else out


def _filter_amplitude(seq: PulseSequence, tau: float, omega):
    """The complex sum inside |...|^2 of the n-pulse filter."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    n = seq.n
    total = 1.0 + (-1.0) ** (n + 1) * np.exp(1j * w * tau)
    if n:
        deltas = np.asarray(seq.positions)
        signs = (-1.0) ** np.arange(1, n + 1)
        phases = np.exp(1j * np.outer(w * tau, deltas))
        total = total + 2.0 * np.cos(w * seq.tau_pi / 2) * (phases @ signs)
    return total


def dd_filter(seq: PulseSequence, tau: float, omega):
    """Filter function of an arbitrary sequence at angular frequency omega.

    Validates that the sequence fits at tau (same check as realize).
    """
    realize(seq, tau)
    out = np.abs(_filter_amplitude(seq, tau, omega)) ** 2
    return float(out[0]) if np.ndim(omega) == 0 else out


def filter_fourier_oracle(seq: PulseSequence, tau: float, omega):
    """F computed as w^2 |FT of the time-domain filter|^2.

    Independent route through the realized interval partition; used to
    cross-check the closed form.
    """
    y = time_domain_filter(seq, tau)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    out = np.abs(w * y.fourier(w)) ** 2
    return float(out[0]) if np.ndim(omega) == 0 else out


@dataclass(frozen=True)
class FilterFunction:
    """A sequence's filter, evaluable at omega (rad/s) or at omega*tau."""

    sequence: PulseSequence
    tau: float

    def __post_init__(self):
        realize(self.sequence, self.tau)

    def __call__(self, omega):
        return dd_filter(self.sequence, self.tau, omega)

    def at_phase(self, theta):
        """F at dimensionless theta = omega*tau."""
        return dd_filter(self.sequence, self.tau,
                         np.asarray(theta, dtype=float) / self.tau)


class _Integrand:
    """S(w) * F(w tau) / w^2 with the removable w=0 singularity handled."""

    def __init__(self, spec: NoiseSpectrum, seq: PulseSequence, tau: float):
        self.spec = spec
        self.seq = seq
        self.tau = tau
        y = time_domain_filter(seq, tau)
        self.m0_sq = y.integral() ** 2
        self.w_floor = _OMEGA_FLOOR_PHASE / tau
        self._moments = y

    def filter_over_omega2(self, w):
        w = np.atleast_1d(np.asarray(w, dtype=float))
        out = np.empty_like(w)
        small = w < self.w_floor
        if np.any(~small):
            ws = w[~small]
            out[~small] = np.abs(
                _filter_amplitude(self.seq, self.tau, ws)) ** 2 / ws**2
        if np.any(small):
            out[small] = self._low_freq_limit(w[small])
        return out

    def _low_freq_limit(self, w):
        if self.m0_sq > 0:
            return np.full_like(w, self.m0_sq)
        # balanced filter: leading term is w^2 |m1|^2 from y~ = i w m1 + ...
        m1 = self._moments.moment(1)
        return w**2 * m1**2

    def vanishing_order(self) -> int:
        """2k where m_k is the first nonvanishing moment of y."""
        scale = self.tau ** np.arange(1, 8)
        for k in range(7):
            if abs(self._moments.moment(k)) > 1e-12 * scale[k]:
                return 2 * k
        return 14

    def __call__(self, w):
        val = self.spec.evaluate(np.atleast_1d(w)) * self.filter_over_omega2(w)
        return val[0] if np.ndim(w) == 0 else val


def _check_integrable(spec: NoiseSpectrum, integrand: _Integrand):
    q = spec.low_frequency_order()
    if q >= 0:
        return
    if q + integrand.vanishing_order() <= -1:
        raise DivergentIntegrand(
            f"S ~ omega^{q:g} near zero is too singular for this filter")


def _flat_spectrum_chi(spec, seq: PulseSequence, tau: float) -> float:
    # Parseval: (2/pi) S0 int_0^inf |y~|^2 dw = 2 S0 int y^2 dt
    free_time = tau - seq.n * seq.tau_pi
    return 2.0 * spec.alpha * free_time


def chi(spec: NoiseSpectrum, tau: float, sequence: PulseSequence | None = None,
        rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Coherence integral chi(tau) for a sequence (None means Ramsey).

    Adaptive Gauss-Kronrod panels split at spectrum breakpoints and sized
    to the filter oscillation scale 2 pi / tau; the integration range is
    extended in octaves beyond the spectrum's support until the last
    chunk is negligible.  A flat (white) spectrum reduces exactly to
    2 * S0 * (total free-precession time) and skips quadrature.

    Raises NonConvergent (with the achieved error) or DivergentIntegrand.
    """
    seq = sequence if sequence is not None else ramsey()
    realize(seq, tau)
    if spec.alpha == 0:
        return 0.0
    if isinstance(spec, White):
        return _flat_spectrum_chi(spec, seq, tau)
    integrand = _Integrand(spec, seq, tau)
    _check_integrable(spec, integrand)

    osc = 2 * np.pi / tau
    cutoff = spec.support_cutoff()
    omega_hi = max(cutoff if cutoff is not None else 0.0, 16 * osc)
    edges = sorted({0.0, omega_hi}
                   | {b for b in spec.breakpoints() if 0 < b < omega_hi})

    total = 0.0
    err = 0.0
    for a, b in zip(edges, edges[1:]):
        v, e = _integrate_panel(integrand, a, b, osc, rel_tol)
        total += v
        err += e
    # octave extension for soft tails
    a = omega_hi
    while True:
        b = 2 * a
        v, e = _integrate_panel(integrand, a, b, osc, rel_tol)
        total += v
        err += e
        a = b
        if abs(v) <= rel_tol * abs(total) / 4 or a > 1e9 * osc:
            break
    chi_val = (2 / np.pi) * total
    if err > max(rel_tol * abs(total), 1e-300) * 4:
        raise NonConvergent(
            f"quadrature error {err:.2e} exceeds tolerance at chi = "
            f"{chi_val:.6e}", value=chi_val,
            achieved_error=(2 / np.pi) * err)
    return chi_val


def _integrate_panel(f, a: float, b: float, osc: float, rel_tol: float):
    """quad over [a, b], chunked so no chunk spans > 50 filter periods."""
    n_chunks = max(1, int(np.ceil((b - a) / (50 * osc))))
    bounds = np.linspace(a, b, n_chunks + 1)
    total = 0.0
    err = 0.0
    for lo, hi in zip(bounds, bounds[1:]):
        v, e = quad(f, lo, hi, epsabs=0.0, epsrel=max(rel_tol / 4, 1e-12),
                    limit=400)
        total += v
        err += e
    return total, err


@dataclass(frozen=True)
class CoherenceCurve:
    """W(tau) with its coherence integral on a grid of durations."""

    tau: np.ndarray
    chi: np.ndarray
    w: np.ndarray
    method: str                      # "analytic" | "montecarlo"
    uncertainty: np.ndarray | None = None

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float)
        chi_v = np.asarray(self.chi, dtype=float)
        w = np.asarray(self.w, dtype=float)
        if not (tau.shape == chi_v.shape == w.shape):
            raise ValueError("tau, chi, w must have matching shapes")
        if np.any(w < 0) or np.any(w > 1 + 1e-12):
            raise ValueError("W must lie in [0, 1]")
        if self.method == "analytic":
            if not np.allclose(w, np.exp(-chi_v), rtol=1e-12, atol=1e-15):
                raise ValueError("analytic curves require W = exp(-chi)")
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "chi", chi_v)
        object.__setattr__(self, "w", np.minimum(w, 1.0))
        if self.uncertainty is not None:
            u = np.asarray(self.uncertainty, dtype=float)
            if u.shape != tau.shape:
                raise ValueError("uncertainty shape mismatch")
            object.__setattr__(self, "uncertainty", u)

    @property
    def half_one_minus_w(self) -> np.ndarray:
        """The plotted quantity (1 - W)/2: 1/2 at complete dephasing."""
        return (1.0 - self.w) / 2.0


def coherence_curve(spec: NoiseSpectrum, taus,
                    sequence: PulseSequence | None = None,
                    rel_tol: float = DEFAULT_REL_TOL) -> CoherenceCurve:
    """Pointwise chi then W = exp(-chi) over an ascending tau grid."""
    taus = np.asarray(taus, dtype=float)
    if np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be ascending")
    chis = np.array([chi(spec, t, sequence, rel_tol) for t in taus])
    return CoherenceCurve(tau=taus, chi=chis, w=np.exp(-chis),
                          method="analytic")


def coherence_time(curve: CoherenceCurve, level: float = math.exp(-1)) -> float:
    """First crossing of W through `level`, linearly interpolated between
    bracketing grid points.  Raises NoCrossing."""
    w = curve.w
    tau = curve.tau
    for i in range(len(w) - 1):
        w0, w1 = w[i], w[i + 1]
        if (w0 - level) == 0:
            return float(tau[i])
        if (w0 - level) > 0 >= (w1 - level):
            frac = (w0 - level) / (w0 - w1)
            return float(tau[i] + frac * (tau[i + 1] - tau[i]))
    raise NoCrossing(f"W never crosses {level:.4g} on the given grid")
