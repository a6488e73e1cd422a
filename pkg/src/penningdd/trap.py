"""Penning-trap single-particle mode frequencies, stability and plasma coupling.

A Penning trap superimposes a static axial magnetic field B0 with a
quadrupolar electrostatic potential U0/(2(z0^2 + r0^2/2)) * (2z^2 - x^2 - y^2).
The axial motion is harmonic; the radial motion decomposes into a fast
modified-cyclotron orbit and a slow magnetron drift.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import (
    BOLTZMANN,
    CRYSTALLIZATION_COUPLING,
    ELEMENTARY_CHARGE,
    EPSILON_0,
)
from .errors import NonConfining, Unstable

_IDENTITY_RTOL = 1e-12


@dataclass(frozen=True)
class TrapConfig:
    """Trap operating point: particle, field, voltage and electrode geometry.

    Either (r0, z0) or the combined geometry factor z0^2 + r0^2/2 may be
    supplied; the individual electrode dimensions are never needed on
    their own.
    """

    charge: float            # C
    mass: float              # kg
    b0: float                # T
    u0: float                # V
    r0: float = 0.0          # m
    z0: float = 0.0          # m
    geometry_factor: float | None = None   # m^2, overrides r0/z0

    def __post_init__(self):
        if self.charge == 0:
            raise ValueError("charge must be nonzero")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.b0 <= 0:
            raise ValueError("b0 must be positive")
        if self.effective_geometry <= 0:
            raise ValueError("z0^2 + r0^2/2 must be positive")

    @property
    def effective_geometry(self) -> float:
        """Geometry factor z0^2 + r0^2/2 in m^2."""
        if self.geometry_factor is not None:
            return self.geometry_factor
        return self.z0**2 + self.r0**2 / 2


@dataclass(frozen=True)
class ModeFrequencies:
    """The three single-particle mode frequencies plus derived quantities.

    Invariants omega_plus + omega_minus = omega_c and
    omega_plus * omega_minus = omega_z^2 / 2 are checked on construction.
    """

    cyclotron: float         # rad/s
    axial: float             # rad/s
    modified_cyclotron: float  # rad/s
    magnetron: float         # rad/s
    omega_1: float           # rad/s

    def __post_init__(self):
        s = self.modified_cyclotron + self.magnetron
        if not math.isclose(s, self.cyclotron, rel_tol=_IDENTITY_RTOL):
            raise ValueError("omega_+ + omega_- must equal omega_c")
        p = self.modified_cyclotron * self.magnetron
        if not math.isclose(p, self.axial**2 / 2, rel_tol=_IDENTITY_RTOL):
            raise ValueError("omega_+ * omega_- must equal omega_z^2 / 2")
        if self.omega_1 < 0:
            raise ValueError("omega_1 must be nonnegative for a stable trap")


@dataclass(frozen=True)
class PlasmaState:
    """Bulk plasma parameters entering the Coulomb coupling constant."""

    density: float           # m^-3
    temperature: float       # K

    def __post_init__(self):
        if self.density <= 0:
            raise ValueError("density must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class FieldGradientModel:
    """Magnetic-field inhomogeneity expressed as qubit-frequency gradients.

    axial_gradient and transverse_gradient are in Hz/mm, quadratic_radial
    in Hz/mm^2.  The transverse linear term reports the unaveraged worst
    case; crystal rotation averages it away in practice.
    """

    axial_gradient: float = 0.0
    transverse_gradient: float = 0.0
    quadratic_radial: float = 0.0

    def __post_init__(self):
        for v in (self.axial_gradient, self.transverse_gradient,
                  self.quadratic_radial):
            if not math.isfinite(v):
                raise ValueError("gradients must be finite")


def axial_frequency(cfg: TrapConfig) -> float:
    """Axial oscillation frequency omega_z = sqrt(2 q U0 / (m (z0^2 + r0^2/2))).

    Raises NonConfining when q*U0 <= 0 (the voltage polarity pushes the
    particle out of the axial well).
    """
    qu = cfg.charge * cfg.u0
    if qu <= 0:
        raise NonConfining(
            f"q*U0 = {qu:.3e} C*V does not confine axially")
    return math.sqrt(2 * qu / (cfg.mass * cfg.effective_geometry))


def cyclotron_frequency(cfg: TrapConfig) -> float:
    """Free-space cyclotron frequency omega_c = qB0/m (rad/s)."""
    return abs(cfg.charge) * cfg.b0 / cfg.mass


def radial_frequencies(cfg: TrapConfig, omega_z: float) -> ModeFrequencies:
    """Split the radial motion into modified-cyclotron and magnetron modes.

    omega_1 = sqrt(omega_c^2 - 2 omega_z^2), omega_+- = (omega_c +- omega_1)/2.
    The magnetron frequency is evaluated as omega_z^2 / (omega_c + omega_1),
    which is algebraically identical but avoids cancellation when
    omega_z << omega_c, so both mode identities hold to ~1e-16.

    Raises Unstable when omega_c^2 <= 2 omega_z^2.
    """
    omega_c = cyclotron_frequency(cfg)
    return split_radial_modes(omega_c, omega_z)


def split_radial_modes(omega_c: float, omega_z: float) -> ModeFrequencies:
    """radial_frequencies for a directly specified (omega_c, omega_z) pair."""
    disc = omega_c**2 - 2 * omega_z**2
    if disc <= 0:
        raise Unstable(
            f"omega_c^2 = {omega_c**2:.6e} <= 2 omega_z^2 = "
            f"{2 * omega_z**2:.6e}; confinement is unstable")
    omega_1 = math.sqrt(disc)
    omega_plus = (omega_c + omega_1) / 2
    omega_minus = omega_z**2 / (omega_c + omega_1) if omega_z > 0 else 0.0
    return ModeFrequencies(
        cyclotron=omega_c,
        axial=omega_z,
        modified_cyclotron=omega_plus,
        magnetron=omega_minus,
        omega_1=omega_1,
    )


def coupling_constant(p: PlasmaState) -> float:
    """Coulomb coupling constant of a one-component plasma.

    Gamma = (1/4 pi eps0) e^2 / (a_ws kB T) with the Wigner-Seitz radius
    a_ws = (3/(4 pi n))^(1/3).  The temperature excludes rotational
    energy; no rotational correction is applied.
    """
    a_ws = (3.0 / (4.0 * math.pi * p.density)) ** (1.0 / 3.0)
    return ELEMENTARY_CHARGE**2 / (
        4 * math.pi * EPSILON_0 * a_ws * BOLTZMANN * p.temperature)


def is_crystallized(p: PlasmaState,
                    threshold: float = CRYSTALLIZATION_COUPLING) -> bool:
    """Whether the plasma coupling exceeds the crystallization threshold."""
    return coupling_constant(p) > threshold


def rotation_frequency_valid(omega_r: float, modes: ModeFrequencies) -> bool:
    """True iff the rotation frequency lies in [omega_-, omega_+]."""
    return modes.magnetron <= omega_r <= modes.modified_cyclotron


def inhomogeneity_shift(model: FieldGradientModel, z_mm: float,
                        r_mm: float) -> float:
    """Static qubit-frequency shift (Hz) at axial offset z and radius r (mm).

    delta_f = g_z * z + g_r * r + g_r2 * r^2.  Linear in every gradient
    coefficient.
    """
    return (model.axial_gradient * z_mm
            + model.transverse_gradient * r_mm
            + model.quadratic_radial * r_mm**2)


def mode_report(cfg: TrapConfig) -> dict:
    """All mode frequencies for a config, in rad/s and Hz."""
    omega_z = axial_frequency(cfg)
    modes = radial_frequencies(cfg, omega_z)
    rows = {
        "cyclotron": modes.cyclotron,
        "axial": modes.axial,
        "modified_cyclotron": modes.modified_cyclotron,
        "magnetron": modes.magnetron,
        "omega_1": modes.omega_1,
    }
    return {name: {"rad_per_s": w, "hz": w / (2 * np.pi)}
            for name, w in rows.items()}
