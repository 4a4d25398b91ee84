"""Exception types shared across the package.

Record-level problems during ingest are not exceptions: they are collected
into the ingest report so one malformed line cannot kill a long run.  The
exceptions here are for errors that make the requested computation
meaningless (empty corpus, bad configuration, numerical blow-up).
"""


class PetmineError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(PetmineError):
    """A configuration value is out of its documented range."""


class EmptyCorpusError(PetmineError):
    """No usable documents remain after filtering."""


class ArchiveFormatError(PetmineError):
    """An input file is structurally unreadable (not a record-level problem)."""


class ValidationError(PetmineError):
    """A domain object violates one of its documented invariants."""


class NumericalError(PetmineError):
    """A fitted quantity became non-finite; results would be garbage."""


class ConvergenceError(PetmineError):
    """An iterative procedure exceeded its iteration budget."""
