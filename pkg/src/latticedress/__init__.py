"""Dressing transformations for difference operators on a periodic lattice.

The package works with matrix-valued functions on a finite cyclic lattice,
where the shift automorphism plays the role of a derivation.  On top of
that ring it provides:

* ``ring``    -- lattice ring elements, difference operators, spectral seeds
* ``bell``    -- ordered shift products and difference-to-shift rearrangement
* ``darboux`` -- first-order dressing of difference operators and flows
* ``chains``  -- iterated dressing for shift-type first-order operators
* ``hirota``  -- two-dimensional lattice reduction, ratio substitution,
  scalar dressing chain and periodic closure
* ``nahm``    -- three-term reduction, matrix flow integration and dressing
* ``cli``     -- deterministic verification battery and worked demos

Everything is plain numpy; no symbolic algebra is involved.
"""

from . import bell, chains, cli, darboux, hirota, nahm, ring, serialize, verify
from .errors import (
    ChainInconsistency,
    ConfigError,
    DegenerateSeed,
    DegenerateSpectrum,
    DenominatorUnderflow,
    DimensionError,
    InconsistentRecurrence,
    LatticeDressError,
    LengthMismatch,
    LogBranchWarning,
    ParameterError,
    SeedInconsistent,
    SingularElement,
    StepCountOverflow,
)
from .ring import DifferenceOperator, RingContext, RingElement

__version__ = "0.1.0"

__all__ = [
    "bell",
    "chains",
    "cli",
    "darboux",
    "hirota",
    "nahm",
    "ring",
    "serialize",
    "verify",
    "RingContext",
    "RingElement",
    "DifferenceOperator",
    "LatticeDressError",
    "SingularElement",
    "DegenerateSpectrum",
    "DegenerateSeed",
    "LengthMismatch",
    "InconsistentRecurrence",
    "ChainInconsistency",
    "DenominatorUnderflow",
    "DimensionError",
    "ParameterError",
    "StepCountOverflow",
    "SeedInconsistent",
    "ConfigError",
    "LogBranchWarning",
    "__version__",
]
