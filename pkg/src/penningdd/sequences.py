"""Dynamical-decoupling pulse sequences as fractional pulse-center positions.

A sequence holds n pi-pulse centers at fractions delta_j of the total
duration tau, together with a finite pulse width tau_pi.  Realizing a
sequence at a concrete tau produces a partition of [0, tau] into signed
free-precession intervals (+1/-1, alternating after each pulse) and
zero-valued pulse windows of width tau_pi centered on delta_j * tau.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import OrderingViolation, OverlapViolation

_SERIAL_DIGITS = 12


@dataclass(frozen=True)
class PulseSequence:
    """n pi pulses at fractional positions, with finite pulse width.

    positions are strictly increasing in (0, 1).  Whether the pulses fit
    without overlap depends on the realized duration and is checked by
    realize().  Axes are metadata only; pure dephasing is insensitive to
    the rotation axis.
    """

    positions: tuple[float, ...]
    tau_pi: float = 0.0
    axes: tuple[str, ...] = field(default=())

    def __post_init__(self):
        pos = tuple(float(p) for p in self.positions)
        object.__setattr__(self, "positions", pos)
        if any(not 0.0 < p < 1.0 for p in pos):
            raise OrderingViolation("positions must lie strictly in (0, 1)")
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise OrderingViolation("positions must be strictly increasing")
        if self.tau_pi < 0:
            raise ValueError("tau_pi must be nonnegative")
        axes = self.axes or ("X",) * len(pos)
        if len(axes) != len(pos) or any(a not in ("X", "Y") for a in axes):
            raise ValueError("axes must be 'X' or 'Y', one per pulse")
        object.__setattr__(self, "axes", tuple(axes))

    @property
    def n(self) -> int:
        return len(self.positions)

    def min_duration(self) -> float:
        """Smallest tau at which the pulses fit without overlap."""
        if self.n == 0 or self.tau_pi == 0:
            return 0.0
        gaps = [self.positions[0], 1.0 - self.positions[-1]]
        need = [self.tau_pi / 2, self.tau_pi / 2]
        for a, b in zip(self.positions, self.positions[1:]):
            gaps.append(b - a)
            need.append(self.tau_pi)
        return max(nd / g for g, nd in zip(gaps, need))

    def serialize(self) -> str:
        """Single-line text record: n, tau_pi, delta_1..delta_n."""
        fields = [str(self.n), _fmt(self.tau_pi)]
        fields += [_fmt(p) for p in self.positions]
        return " ".join(fields)

    @classmethod
    def deserialize(cls, line: str) -> "PulseSequence":
        parts = line.split()
        n = int(parts[0])
        tau_pi = float(parts[1])
        positions = tuple(float(x) for x in parts[2:2 + n])
        if len(positions) != n:
            raise ValueError("record truncated")
        return cls(positions=positions, tau_pi=tau_pi)


def _fmt(x: float) -> str:
    return f"{x:.{_SERIAL_DIGITS}g}"


def ramsey() -> PulseSequence:
    """The zero-pulse sequence (free induction)."""
    return PulseSequence(positions=(), tau_pi=0.0)


def cpmg(n: int, tau_pi: float = 0.0) -> PulseSequence:
    """Evenly spaced pulses, delta_j = (j - 1/2)/n; axes 90 deg from the
    initial pi/2 by convention."""
    if n < 1:
        raise ValueError("n must be >= 1")
    positions = tuple((j - 0.5) / n for j in range(1, n + 1))
    return PulseSequence(positions=positions, tau_pi=tau_pi,
                         axes=("Y",) * n)


def udd(n: int, tau_pi: float = 0.0) -> PulseSequence:
    """Sine-squared pulse placement, delta_j = sin^2(pi j / (2n + 2))."""
    if n < 1:
        raise ValueError("n must be >= 1")
    positions = tuple(math.sin(math.pi * j / (2 * n + 2)) ** 2
                      for j in range(1, n + 1))
    return PulseSequence(positions=positions, tau_pi=tau_pi)


def custom(positions, tau_pi: float = 0.0, axes=None) -> PulseSequence:
    """Sequence from explicit fractional positions."""
    return PulseSequence(positions=tuple(positions), tau_pi=tau_pi,
                         axes=tuple(axes) if axes else ())


@dataclass(frozen=True)
class Interval:
    start: float
    end: float
    value: int    # +1 / -1 free precession, 0 during a pulse

    @property
    def length(self) -> float:
        return self.end - self.start


@dataclass(frozen=True)
class TimedSequence:
    """Pulse and free-precession intervals partitioning [0, tau]."""

    tau: float
    intervals: tuple[Interval, ...]

    def free_intervals(self) -> list[Interval]:
        return [iv for iv in self.intervals if iv.value != 0]

    def pulse_intervals(self) -> list[Interval]:
        return [iv for iv in self.intervals if iv.value == 0]


def realize(seq: PulseSequence, tau: float) -> TimedSequence:
    """Lay the sequence out on [0, tau], checking pulse overlap.

    Pulse j occupies [delta_j tau - tau_pi/2, delta_j tau + tau_pi/2]; the
    surrounding free intervals carry alternating sign starting at +1.
    Raises OverlapViolation naming the first offending pair (0 and n+1
    denote the sequence boundaries).
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    half = seq.tau_pi / 2
    centers = [p * tau for p in seq.positions]
    prev_end = 0.0
    prev_idx = 0
    intervals = []
    sign = 1
    for j, c in enumerate(centers, start=1):
        start = c - half
        if start < prev_end - 1e-15 * tau:
            raise OverlapViolation(
                f"pulses {prev_idx} and {j} overlap at tau = {tau:.6e} s",
                pair=(prev_idx, j))
        intervals.append(Interval(prev_end, start, sign))
        intervals.append(Interval(start, c + half, 0))
        prev_end = c + half
        prev_idx = j
        sign = -sign
    if prev_end > tau + 1e-15 * tau:
        raise OverlapViolation(
            f"pulse {prev_idx} and sequence end overlap at tau = {tau:.6e} s",
            pair=(prev_idx, seq.n + 1))
    intervals.append(Interval(prev_end, tau, sign))
    return TimedSequence(tau=tau, intervals=tuple(intervals))


class TimeDomainFilter:
    """Piecewise-constant y(t): +1 before the first pulse, alternating sign
    after each pulse, 0 during pulse windows."""

    def __init__(self, timed: TimedSequence):
        self.timed = timed
        self.tau = timed.tau
        self._edges = np.array([iv.start for iv in timed.intervals]
                               + [timed.tau])
        self._values = np.array([iv.value for iv in timed.intervals],
                                dtype=float)
        # cumulative integral of y at each edge, for exact windowed sums
        lengths = np.diff(self._edges)
        self._cum = np.concatenate(([0.0], np.cumsum(self._values * lengths)))

    def __call__(self, t):
        """y(t); right-continuous at interval edges, 0 outside [0, tau]."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self._edges, t, side="right") - 1
        idx = np.clip(idx, 0, len(self._values) - 1)
        out = self._values[idx]
        return np.where((t < 0) | (t > self.tau), 0.0, out)

    def integral(self) -> float:
        """Integral of y over [0, tau]."""
        return float(self._cum[-1])

    def cumulative(self, t):
        """Integral of y over [0, t], exact for the piecewise-constant y."""
        t = np.clip(np.asarray(t, dtype=float), 0.0, self.tau)
        return np.interp(t, self._edges, self._cum)

    def moment(self, k: int) -> float:
        """Integral of y(t) t^k dt over [0, tau]."""
        a = self._edges[:-1]
        b = self._edges[1:]
        return float(np.sum(self._values * (b**(k + 1) - a**(k + 1))
                            / (k + 1)))

    def fourier(self, omega):
        """Exact segment-wise Fourier transform int_0^tau y(t) e^{i w t} dt.

        Evaluated interval by interval from the realized partition; at
        omega = 0 the value is the plain integral of y.
        """
        omega = np.asarray(omega, dtype=float)
        scalar = omega.ndim == 0
        omega = np.atleast_1d(omega)
        out = np.zeros(omega.shape, dtype=complex)
        nz = omega != 0
        w = omega[nz]
        for iv in self.timed.intervals:
            if iv.value == 0:
                continue
            out[nz] += iv.value * (np.exp(1j * w * iv.end)
                                   - np.exp(1j * w * iv.start)) / (1j * w)
        out[~nz] = self.integral()
        return out[0] if scalar else out


def time_domain_filter(seq: PulseSequence, tau: float) -> TimeDomainFilter:
    """Construct y(t) for the sequence realized at duration tau."""
    return TimeDomainFilter(realize(seq, tau))
