"""Time-domain Monte Carlo dephasing oracle.

Each shot draws a fresh noise trace, accumulates the filtered random
phase phi = int y(t) beta(t) dt through the pulse sequence, and the
coherence is estimated as W = |<exp(i phi)>| over shots.  This route is
independent of the frequency-domain filter formalism and is used to
cross-check it.

Shots are seeded counter-style: shot k of a run with seed s draws from
Philox(key=(s, k)), so results are bit-identical however the shots are
batched or parallelized.
"""

import math
from dataclasses import dataclass

import numpy as np

from .coherence import CoherenceCurve
from .errors import UnderResolvedPulse
from .noise import NoiseSpectrum, check_nyquist, synthesize_from_rng
from .sequences import PulseSequence, ramsey, time_domain_filter

TRACE_MARGIN = 8          # trace duration as a multiple of the longest tau
_PHI_FLOOR = 1e-300


def shot_rng(seed: int, shot: int, purpose: int = 0) -> np.random.Generator:
    """Per-shot counter-based random stream."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, shot], dtype=np.uint64)
    counter = np.array([0, 0, 0, purpose], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


@dataclass(frozen=True)
class DephasingRun:
    """Configuration of a Monte Carlo dephasing simulation."""

    spectrum: NoiseSpectrum
    sequence: PulseSequence | None = None    # None = Ramsey
    shots: int = 10_000
    seed: int = 0
    dt: float | None = None                  # None = default rule
    batches: int = 20
    trace_margin: int = TRACE_MARGIN

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.batches < 2 or self.batches > self.shots:
            raise ValueError("need 2 <= batches <= shots")

    @property
    def seq(self) -> PulseSequence:
        return self.sequence if self.sequence is not None else ramsey()

    def resolve_dt(self) -> float:
        """Explicit dt, or min(tau_pi/10, 1/(10 f_max)) from the spectrum
        support.  Validates pulse resolution and the Nyquist condition."""
        tau_pi = self.seq.tau_pi
        if self.dt is not None:
            dt = self.dt
        else:
            cutoff = self.spectrum.support_cutoff()
            if cutoff is None:
                raise ValueError(
                    "dt must be given explicitly for spectra without an "
                    "upper support cutoff")
            dt = 1.0 / (10 * cutoff / (2 * np.pi))
            if tau_pi > 0:
                dt = min(dt, tau_pi / 10)
        if dt <= 0:
            raise ValueError("dt must be positive")
        if tau_pi > 0 and dt > tau_pi / 10 * (1 + 1e-12):
            raise UnderResolvedPulse(
                f"dt = {dt:.3e} s exceeds tau_pi/10 = {tau_pi / 10:.3e} s")
        check_nyquist(self.spectrum, dt)
        return dt


def _trace_length(duration: float, dt: float, margin: int) -> int:
    n = max(2, int(math.ceil(margin * duration / dt)))
    return 1 << (n - 1).bit_length()


def _cell_weights(seq: PulseSequence, tau: float, dt: float) -> np.ndarray:
    """Exact integral of y(t) over each sample cell [i dt, (i+1) dt).

    Pulse edges need not align with the grid; the windowed cumulative
    integral handles fractional cells exactly.
    """
    y = time_domain_filter(seq, tau)
    m = int(math.ceil(tau / dt))
    edges = np.arange(m + 1) * dt
    return np.diff(y.cumulative(edges))


def simulate_coherence(run: DephasingRun, taus) -> CoherenceCurve:
    """Monte Carlo W(tau) with batched standard errors.

    Per shot, phi = sum_i y_bar_i beta_i dt over [0, tau] for every grid
    point, where y_bar_i is the exact cell average of the time-domain
    filter; W = |mean over shots of exp(i phi)|.  Deterministic for a
    fixed run seed.
    """
    taus = np.asarray(taus, dtype=float)
    if taus.ndim != 1 or taus.size == 0 or np.any(np.diff(taus) <= 0):
        raise ValueError("tau grid must be ascending and nonempty")
    seq = run.seq
    dt = run.resolve_dt()
    weights = [_cell_weights(seq, t, dt) for t in taus]

    if run.spectrum.alpha == 0:
        w = np.ones_like(taus)
        return CoherenceCurve(tau=taus, chi=np.zeros_like(taus), w=w,
                              method="montecarlo",
                              uncertainty=np.zeros_like(taus))

    n_trace = _trace_length(taus[-1], dt, run.trace_margin)
    batch_sizes = _split_batches(run.shots, run.batches)
    batch_sums = np.zeros((run.batches, taus.size), dtype=complex)
    shot = 0
    for b, size in enumerate(batch_sizes):
        for _ in range(size):
            rng = shot_rng(run.seed, shot)
            beta = synthesize_from_rng(run.spectrum, dt, n_trace, rng)
            for j, cw in enumerate(weights):
                phi = float(beta[:cw.size] @ cw)
                batch_sums[b, j] += complex(math.cos(phi), math.sin(phi))
            shot += 1

    sizes = np.asarray(batch_sizes, dtype=float)[:, None]
    batch_w = np.abs(batch_sums / sizes)
    w = np.abs(batch_sums.sum(axis=0)) / run.shots
    se = np.std(batch_w, axis=0, ddof=1) / math.sqrt(run.batches)
    chi_v = -np.log(np.maximum(w, _PHI_FLOOR))
    return CoherenceCurve(tau=taus, chi=chi_v, w=w, method="montecarlo",
                          uncertainty=se)


def _split_batches(shots: int, batches: int) -> list[int]:
    base = shots // batches
    rem = shots % batches
    return [base + (1 if i < rem else 0) for i in range(batches)]


@dataclass(frozen=True)
class RamseyFringes:
    """Simulated Ramsey fringe record."""

    times: np.ndarray
    p_up: np.ndarray          # mean over simulated experiments
    p_std: np.ndarray         # std across experiments (not / sqrt(N))
    detuning_hz: float
    n_ions: int | None


def simulate_ramsey_fringes(run: DephasingRun, detuning_hz: float, times,
                            n_ions: int | None = None) -> RamseyFringes:
    """Ramsey fringes P_up(t) = (1 - cos(2 pi Delta t + phi)) / 2 per shot.

    The experiment ends in the dark state at zero accumulated phase.  With
    n_ions set, each shot additionally draws a binomial projection of
    n_ions spins, modeling the detected ion ensemble; the common noise
    phase is shared by all ions of one shot.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    dt = run.resolve_dt()
    t_max = float(times.max()) if times.size else 0.0

    noiseless = run.spectrum.alpha == 0
    if not noiseless:
        n_trace = _trace_length(max(t_max, dt), dt, run.trace_margin)
        edges = np.arange(n_trace + 1) * dt

    omega_d = 2 * np.pi * detuning_hz
    samples = np.empty((run.shots, times.size))
    for shot in range(run.shots):
        if noiseless:
            phi_t = np.zeros_like(times)
        else:
            rng = shot_rng(run.seed, shot)
            beta = synthesize_from_rng(run.spectrum, dt, n_trace, rng)
            cum = np.concatenate(([0.0], np.cumsum(beta) * dt))
            phi_t = np.interp(times, edges, cum)
        p = 0.5 * (1.0 - np.cos(omega_d * times + phi_t))
        if n_ions is not None:
            meas_rng = shot_rng(run.seed, shot, purpose=1)
            p = meas_rng.binomial(n_ions, np.clip(p, 0.0, 1.0)) / n_ions
        samples[shot] = p

    return RamseyFringes(
        times=times,
        p_up=samples.mean(axis=0),
        p_std=samples.std(axis=0, ddof=1) if run.shots > 1
        else np.zeros_like(times),
        detuning_hz=detuning_hz,
        n_ions=n_ions,
    )
