"""Exception types shared across the package.

Everything raised on purpose derives from LatticeDressError so callers can
catch the whole family with one clause. LogBranchWarning is a warning, not
an error: a branch-cut hit in a matrix/scalar logarithm is survivable but
the caller should know the answer picked one sheet.
"""


class LatticeDressError(Exception):
    """Base class for all errors raised by latticedress."""


class SingularElement(LatticeDressError):
    """Pointwise inverse failed at some lattice site.

    Attributes
    ----------
    site : int
        The first lattice index where the matrix was singular.
    """

    def __init__(self, site, message=None):
        self.site = site
        super().__init__(message or f"singular matrix at lattice site {site}")


class DegenerateSpectrum(LatticeDressError):
    """Operator spectrum does not separate into enough distinct clusters."""


class DegenerateSeed(LatticeDressError):
    """Stacked eigenvector columns do not form an invertible frame."""


class LengthMismatch(LatticeDressError):
    """Sequence arguments disagree in length."""


class InconsistentRecurrence(LatticeDressError):
    """Dressing recurrence over- or under-determined: consistency row failed."""


class ChainInconsistency(LatticeDressError):
    """Chain state fails the constraint linking s and the sigma map."""


class DenominatorUnderflow(LatticeDressError):
    """Scalar denominator fell below the safe floor.

    Attributes
    ----------
    site : tuple or int
        Grid index where the denominator collapsed.
    """

    def __init__(self, site, message=None):
        self.site = site
        super().__init__(message or f"denominator below floor at grid site {site}")


class DimensionError(LatticeDressError):
    """Operation defined only for scalar (dim == 1) fields got a matrix field."""


class ParameterError(LatticeDressError):
    """Invalid scalar parameter (for example a zero scale that must be invertible)."""


class StepCountOverflow(LatticeDressError):
    """Requested ODE integration would exceed the step budget."""


class SeedInconsistent(LatticeDressError):
    """Dressing seed fails the commutation gate required for covariance."""


class ConfigError(LatticeDressError):
    """Run configuration rejected before any computation started."""


class LogBranchWarning(UserWarning):
    """A logarithm landed on the negative real axis; principal branch was used."""
