"""Derivative-free local search over pulse positions minimizing chi.

The search works in gap coordinates: the n+1 inter-pulse gaps (pulse
fractions of the total duration) are strictly positive and normalized to
sum to one, which makes the ordering constraint implicit.  Overlap
margins become simple per-gap lower bounds.  Each coordinate is refined
by a scan plus golden-section line search; accepted iterates never
increase the objective.

During the search chi is evaluated on a fixed Gauss-Legendre panel grid
built once from the spectrum and tau (fast, and smooth across iterates);
the reported optimum is re-evaluated with the full adaptive quadrature.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .coherence import chi as chi_full
from .errors import InfeasibleStart
from .noise import NoiseSpectrum, White
from .sequences import PulseSequence, custom, realize, udd

_GOLDEN = (math.sqrt(5) - 1) / 2
_MIN_GAP_FLOOR = 1e-6
_ACCEPT_REL = 1e-10


@dataclass(frozen=True)
class OptimizationProblem:
    """Pulse budget, duration, spectrum and search controls."""

    n: int
    tau: float
    tau_pi: float
    spectrum: NoiseSpectrum
    start: PulseSequence | None = None      # default UDD(n)
    chi_rel_tol: float = 1e-4
    max_sweeps: int = 60
    restarts: int = 0
    seed: int = 0
    min_gap: float | None = None            # extra margin, fraction units

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.tau <= 0 or self.tau_pi < 0:
            raise ValueError("tau must be positive, tau_pi nonnegative")
        if self.chi_rel_tol <= 0:
            raise ValueError("tolerance must be positive")

    def start_sequence(self) -> PulseSequence:
        return self.start if self.start is not None \
            else udd(self.n, self.tau_pi)

    def gap_bounds(self) -> np.ndarray:
        """Per-gap lower bounds: tau_pi/tau interior, tau_pi/(2 tau) at the
        edges, plus the configured margin."""
        base = self.tau_pi / self.tau
        extra = self.min_gap if self.min_gap is not None else 0.0
        mins = np.full(self.n + 1, base + extra)
        mins[0] = base / 2 + extra
        mins[-1] = base / 2 + extra
        return np.maximum(mins, _MIN_GAP_FLOOR)


@dataclass(frozen=True)
class OptimizationResult:
    sequence: PulseSequence
    chi_value: float               # full-tolerance evaluation
    chi_start: float
    chi_trace: tuple[float, ...]   # accepted objective values
    sweeps: int
    converged: bool
    stalled_at_constraint: bool
    problem: OptimizationProblem = field(repr=False, default=None)


def _gaps_from_positions(positions, n) -> np.ndarray:
    d = np.concatenate(([0.0], np.asarray(positions, dtype=float), [1.0]))
    return np.diff(d)


def _positions_from_gaps(gaps) -> np.ndarray:
    return np.cumsum(gaps)[:-1]


def _build_grid(spec: NoiseSpectrum, tau: float):
    """Fixed quadrature nodes/coefficients: chi ~= sum c_k F(w_k)."""
    osc = 2 * np.pi / tau
    cutoff = spec.support_cutoff()
    omega_hi = max(cutoff if cutoff is not None else 0.0, 16 * osc)
    edges = sorted({0.0, omega_hi}
                   | {b for b in spec.breakpoints() if 0 < b < omega_hi})
    nodes_16, weights_16 = np.polynomial.legendre.leggauss(16)
    all_nodes = []
    all_coefs = []
    for a, b in zip(edges, edges[1:]):
        chunks = max(1, min(2000, int(np.ceil((b - a) / (osc / 2)))))
        bounds = np.linspace(a, b, chunks + 1)
        for lo, hi in zip(bounds, bounds[1:]):
            mid, hw = (lo + hi) / 2, (hi - lo) / 2
            w = mid + hw * nodes_16
            all_nodes.append(w)
            all_coefs.append(hw * weights_16 * spec.evaluate(w) / w**2)
    nodes = np.concatenate(all_nodes)
    coefs = (2 / np.pi) * np.concatenate(all_coefs)
    keep = coefs > 0
    return nodes[keep], coefs[keep]


class _Objective:
    def __init__(self, problem: OptimizationProblem):
        self.problem = problem
        self.flat = isinstance(problem.spectrum, White)
        if self.flat:
            self.const = 2.0 * problem.spectrum.alpha * (
                problem.tau - problem.n * problem.tau_pi)
        else:
            self.nodes, self.coefs = _build_grid(problem.spectrum,
                                                 problem.tau)
            self.signs = (-1.0) ** np.arange(1, problem.n + 1)
            self.tail = 1.0 + (-1.0) ** (problem.n + 1) * np.exp(
                1j * self.nodes * problem.tau)
            self.cosw = 2.0 * np.cos(self.nodes * problem.tau_pi / 2)

    def __call__(self, gaps: np.ndarray) -> float:
        if self.flat:
            return self.const
        deltas = _positions_from_gaps(gaps)
        phases = np.exp(1j * np.outer(self.nodes * self.problem.tau, deltas))
        amp = self.tail + self.cosw * (phases @ self.signs)
        return float(self.coefs @ (amp.real**2 + amp.imag**2))


def _line_bounds(h, i, mins, cap=100.0):
    """Feasible interval for unnormalized gap h_i with the others fixed."""
    rest = np.delete(h, i)
    m_rest = np.delete(mins, i)
    s = rest.sum()
    lo = mins[i] * s / max(1 - mins[i], 1e-12)
    hi = cap * s
    pos = m_rest > 0
    if np.any(pos):
        hi = min(hi, float(np.min(rest[pos] / m_rest[pos]) - s))
    return lo, hi


def _golden_section(f, lo, hi, rel_tol=1e-9, max_iter=80):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rel_tol * (abs(a) + abs(b)) / 2:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _coordinate_descent(objective, gaps0, mins, problem):
    h = gaps0.copy()
    best = objective(h / h.sum())
    trace = [best]
    stalled = False
    sweeps = 0
    converged = False
    for sweep in range(problem.max_sweeps):
        sweeps = sweep + 1
        sweep_start = best
        for i in range(len(h)):
            lo, hi = _line_bounds(h, i, mins)
            if hi <= lo:
                continue

            def slice_chi(x):
                trial = h.copy()
                trial[i] = x
                return objective(trial / trial.sum())

            # coarse scan to pick a basin, then golden section inside it
            xs = np.linspace(lo, hi, 13)
            vals = [slice_chi(x) for x in xs]
            k = int(np.argmin(vals))
            a = xs[max(k - 1, 0)]
            b = xs[min(k + 1, len(xs) - 1)]
            x_new, f_new = _golden_section(slice_chi, a, b)
            if vals[k] < f_new:
                x_new, f_new = xs[k], vals[k]
            if f_new < best - _ACCEPT_REL * abs(best):
                h[i] = x_new
                h /= h.sum()
                best = f_new
                trace.append(best)
                if x_new <= lo * (1 + 1e-6) or x_new >= hi * (1 - 1e-6):
                    stalled = True
        if sweep_start - best <= problem.chi_rel_tol * max(abs(best), 1e-300):
            converged = True
            break
    # exploit the filter's time-reversal symmetry: the reversed gap vector
    # gives identical chi, so averaging can only help in a symmetric basin
    h_sym = (h + h[::-1]) / 2
    if np.all(h_sym >= mins - 1e-15):
        f_sym = objective(h_sym / h_sym.sum())
        if f_sym <= best * (1 + 1e-9):
            h = h_sym
            best = min(best, f_sym)
            trace.append(best)
    return h / h.sum(), best, trace, sweeps, converged, stalled


def optimize(problem: OptimizationProblem) -> OptimizationResult:
    """Local search over pulse positions; never returns a sequence worse
    than the start.

    Raises InfeasibleStart if the starting sequence violates the overlap
    margins at tau.  A search that keeps pushing a coordinate into its
    constraint bound is flagged stalled_at_constraint but still returns
    the best feasible sequence found.
    """
    start_seq = problem.start_sequence()
    if start_seq.n != problem.n:
        raise ValueError("start sequence pulse count does not match n")
    mins = problem.gap_bounds()
    gaps0 = _gaps_from_positions(start_seq.positions, problem.n)
    try:
        realize(start_seq, problem.tau)
    except Exception as exc:
        raise InfeasibleStart(str(exc)) from exc
    if np.any(gaps0 < mins - 1e-12):
        raise InfeasibleStart("start sequence violates the gap margins")

    objective = _Objective(problem)
    candidates = [_coordinate_descent(objective, gaps0, mins, problem)]
    rng = np.random.default_rng(problem.seed)
    for _ in range(problem.restarts):
        gaps_r = _perturb(gaps0, mins, rng)
        candidates.append(
            _coordinate_descent(objective, gaps_r, mins, problem))

    # deterministic selection: lowest objective, ties by lexicographic delta
    def sort_key(c):
        gaps, val = c[0], c[1]
        return (val, tuple(_positions_from_gaps(gaps)))

    gaps, grid_chi, trace, sweeps, converged, stalled = \
        min(candidates, key=sort_key)

    result_seq = custom(_positions_from_gaps(gaps), tau_pi=problem.tau_pi)
    chi_res = chi_full(problem.spectrum, problem.tau, result_seq)
    chi_st = chi_full(problem.spectrum, problem.tau, start_seq)
    if chi_res > chi_st:
        result_seq, chi_res = start_seq, chi_st
    return OptimizationResult(
        sequence=result_seq, chi_value=chi_res, chi_start=chi_st,
        chi_trace=tuple(trace), sweeps=sweeps, converged=converged,
        stalled_at_constraint=stalled, problem=problem)


def _perturb(gaps, mins, rng, scale=0.4, tries=100):
    for _ in range(tries):
        h = gaps * np.exp(rng.normal(0.0, scale, gaps.size))
        h /= h.sum()
        if np.all(h >= mins):
            return h
    return gaps.copy()
