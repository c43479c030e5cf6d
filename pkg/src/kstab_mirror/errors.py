"""Exception hierarchy shared by the engine and the command line.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process status without a lookup table of its own.
"""


class KStabError(Exception):
    """Base class for all engine errors."""

    exit_code = 2


# -- geometry ----------------------------------------------------------------

class InvalidFan(KStabError):
    exit_code = 3


class NonSmoothFan(InvalidFan):
    pass


class NonPrimitiveRay(InvalidFan):
    pass


class DegenerateFan(InvalidFan):
    pass


class BasisMismatch(KStabError):
    pass


class DegenerateClass(KStabError):
    pass


class NotKahler(KStabError):
    pass


class ConfigError(KStabError):
    pass


# -- Laurent arithmetic --------------------------------------------------------

class EmptyScalar(KStabError):
    exit_code = 5


class PrecisionOverflow(KStabError):
    """A rate times k exceeds what the working precision can represent."""

    exit_code = 5


# -- critical points -------------------------------------------------------------

class WallDetected(KStabError):
    exit_code = 4


class NoSolutions(KStabError):
    exit_code = 5


class NoConvergence(KStabError):
    exit_code = 5


class Degenerate(KStabError):
    exit_code = 5


class IllConditioned(KStabError):
    exit_code = 5


class IncompleteCriticalSet(KStabError):
    exit_code = 5


# -- stability ---------------------------------------------------------------------

class DegeneratePoint(KStabError):
    exit_code = 5


class LeadingCancellation(KStabError):
    exit_code = 5


class PositiveRate(KStabError):
    exit_code = 5


class ZeroDenominator(KStabError):
    exit_code = 5


class ZeroDenominatorLimit(KStabError):
    exit_code = 5


class DivergentRatio(KStabError):
    exit_code = 5


class ZeroWeight(KStabError):
    exit_code = 2


class ToleranceFailure(KStabError):
    exit_code = 1
