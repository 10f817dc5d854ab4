"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: usage problems are handled by
argparse itself, ``DataError`` and subclasses exit with 2, and
``DivergenceError`` exits with 3.
"""


class AdrError(Exception):
    """Base class for all toolkit errors."""


class DataError(AdrError):
    """Malformed, missing, or unusable input data."""


class EmptySentenceError(DataError):
    """Input reduced to zero tokens after normalization."""


class CorpusSizeError(DataError):
    """Corpus too small for the requested operation."""


class UndefinedMetricError(AdrError):
    """Metric requested on an empty corpus or lexicon."""


class DimensionError(AdrError):
    """Tensor shapes incompatible for the requested operation."""

    def __init__(self, op: str, *shapes):
        super().__init__(f"{op}: incompatible shapes {' vs '.join(str(s) for s in shapes)}")
        self.shapes = shapes


class DivergenceError(AdrError):
    """Training produced a non-finite loss."""


class CheckpointError(DataError):
    """Checkpoint file corrupt or of an unsupported version."""
