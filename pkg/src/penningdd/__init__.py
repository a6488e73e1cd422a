"""Qubit dephasing under classical noise: trap physics, filter-function
coherence, noise engineering, Monte Carlo dephasing, randomized
benchmarking and pulse-sequence optimization."""

__version__ = "0.1.0"

from .benchmark import (
    GateSpec,
    RBExperiment,
    RBResult,
    generate_sequence,
    simulate,
    simulate_fidelities,
    timing_infidelity,
)
from .coherence import (
    CoherenceCurve,
    FilterFunction,
    chi,
    coherence_curve,
    coherence_time,
    dd_filter,
    filter_fourier_oracle,
    ramsey_filter,
)
from .fitting import (
    AlphaFit,
    DecayFit,
    RabiModel,
    ResonanceFit,
    calibrate_alpha,
    fit_decay,
    fit_resonance,
    normalize_fluorescence,
    rabi_lineshape,
)
from .montecarlo import (
    DephasingRun,
    RamseyFringes,
    simulate_coherence,
    simulate_ramsey_fringes,
)
from .noise import (
    AmbientPowerLaw,
    NoiseSpectrum,
    NoiseTrace,
    OhmicSharpCutoff,
    Tabulated,
    White,
    estimate_psd,
    integrated_rms,
    phase_noise_stepup,
    synthesize_trace,
)
from .optimizer import OptimizationProblem, OptimizationResult, optimize
from .sequences import (
    PulseSequence,
    TimedSequence,
    cpmg,
    custom,
    ramsey,
    realize,
    time_domain_filter,
    udd,
)
from .trap import (
    FieldGradientModel,
    ModeFrequencies,
    PlasmaState,
    TrapConfig,
    axial_frequency,
    coupling_constant,
    inhomogeneity_shift,
    radial_frequencies,
    rotation_frequency_valid,
)
