"""Physical constants used throughout the package (CODATA, via scipy)."""

import scipy.constants as _const

ELEMENTARY_CHARGE = _const.e            # C
EPSILON_0 = _const.epsilon_0            # F/m
BOLTZMANN = _const.k                    # J/K
ATOMIC_MASS = _const.u                  # kg
HBAR = _const.hbar                      # J s

# Mass number of 9Be+ and the qubit's field sensitivity, kept as named
# defaults for convenience in configs and examples.
BERYLLIUM_9_MASS = 9.012182 * ATOMIC_MASS        # kg
QUBIT_FIELD_SLOPE_HZ_PER_TESLA = 28e6 / 1e-3     # 28 MHz/mT

# Coulomb coupling constant above which a one-component plasma is
# predicted to crystallize.  Overridable where used.
CRYSTALLIZATION_COUPLING = 170.0

# Nuclear-spin-flip transition frequencies at the 4.5 T operating field,
# kept only as named constants (no level-structure model).
NUCLEAR_F1_HZ = 340e6
NUCLEAR_F2_HZ = 288e6
NUCLEAR_F3_HZ = 286e6
