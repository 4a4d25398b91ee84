"""Opinion mining for e-petition archives.

Ingests petition records, fits a topic model by collapsed Gibbs
sampling, and derives issue prevalence, temporal entropy, geographic
clustering, and signature-distribution statistics from the result.
"""

__version__ = "0.1.0"

from .errors import (
    ArchiveFormatError,
    ConfigError,
    ConvergenceError,
    EmptyCorpusError,
    NumericalError,
    PetmineError,
    ValidationError,
)

__all__ = [
    "__version__",
    "ArchiveFormatError",
    "ConfigError",
    "ConvergenceError",
    "EmptyCorpusError",
    "NumericalError",
    "PetmineError",
    "ValidationError",
]
