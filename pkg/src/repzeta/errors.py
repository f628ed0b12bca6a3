"""Exception hierarchy shared by all repzeta modules."""


class RepZetaError(Exception):
    """Base class for all errors raised by this package."""


# -- rational function arithmetic ------------------------------------------

class ZeroDenominator(RepZetaError):
    pass


class NotExpandable(RepZetaError):
    """Denominator admits no power series in t."""


class PoleAtPoint(RepZetaError):
    pass


class DegenerateAtQ1(RepZetaError):
    """Substituting q = 1 kills the denominator."""


class NoFactoredForm(RepZetaError):
    """Denominator was not recognised as a monomial times (1 - q^a t^b) factors."""


# -- lattices ----------------------------------------------------------------

class NotAHomomorphism(RepZetaError):
    pass


class NotFaithful(RepZetaError):
    pass


class NotClosedUnderBracket(RepZetaError):
    pass


class SpecFileError(RepZetaError):
    """Malformed lattice description (file or builtin selector)."""


# -- minor sets --------------------------------------------------------------

class NotSkew(RepZetaError):
    pass


# -- orbit oracle ------------------------------------------------------------

class OracleUnsupported(RepZetaError):
    """Requested configuration is outside the oracle's validity range."""


class NotPotent(RepZetaError):
    pass


class BudgetExceeded(RepZetaError):
    pass


class OddOrbitExponent(RepZetaError):
    """Internal consistency failure: coadjoint orbit size was not an even p-power."""


class NonFinalCoefficient(RepZetaError):
    pass


# -- p-adic integration ------------------------------------------------------

class ConstantMissing(RepZetaError):
    """Integrand set lacks the constant 1."""


class LevelTooLow(RepZetaError):
    pass


class TailDiverges(RepZetaError):
    pass


# -- catalog -----------------------------------------------------------------

class IdentityFails(RepZetaError):
    """A printed closed form disagrees with its independent derivation route."""


class InvalidParams(RepZetaError):
    pass


class NoCompatiblePsi(RepZetaError):
    """The bracket-compatibility equation has no solution for this basis change."""
