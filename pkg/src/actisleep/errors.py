"""Exception types shared across the pipeline."""


class ActisleepError(Exception):
    """Base class for all package-specific errors."""


# -- ingest ------------------------------------------------------------------

class MissingColumnError(ActisleepError):
    """A required CSV column is absent from the header."""


class NonMonotonicTimestampsError(ActisleepError):
    """Timestamps repeat or run backwards."""


class NegativeCountError(ActisleepError):
    """An activity count is negative (or not a finite number)."""


class WrongEpochLengthError(ActisleepError):
    """Consecutive timestamps are not exactly one minute apart."""


# -- stc ---------------------------------------------------------------------

class NonVaryingSeriesError(ActisleepError):
    """All counts are identical; min-max normalization is undefined."""


class ConstantCurveError(ActisleepError):
    """A fitted curve has zero range and cannot be dichotomized."""


# -- cpd ---------------------------------------------------------------------

class NonPositiveSampleError(ActisleepError):
    """Gamma segment costs require strictly positive samples."""


class ZeroVarianceError(ActisleepError):
    """Shape estimation is undefined for a constant sample."""


class NoChangePointError(ActisleepError):
    """The bounded search exhausted its penalty schedule without a hit."""


# -- detect ------------------------------------------------------------------

class TooFewTransitionsError(ActisleepError):
    """Refinement needs at least three coarse transitions."""


class NonAlternatingKindsError(ActisleepError):
    """Change points do not strictly alternate wake/sleep."""


class LengthMismatchError(ActisleepError):
    """Two per-minute vectors differ in length."""


# -- metrics -----------------------------------------------------------------

class TooShortError(ActisleepError):
    """Not enough samples for the requested statistic."""


class ZeroVarianceDifferencesError(ActisleepError):
    """Paired differences are all equal (and nonzero); t is undefined."""


class TooFewSubjectsError(ActisleepError):
    """Cohort statistics need at least two subject reports."""


# -- synth / cli -------------------------------------------------------------

class InvalidConfigError(ActisleepError):
    """A generator configuration violates its invariants."""


class ConfigError(ActisleepError):
    """A batch-run configuration is unusable."""
