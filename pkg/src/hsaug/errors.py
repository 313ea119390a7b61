"""Exception types shared across the toolkit.

Everything raised on purpose derives from ToolkitError so callers (and the
command line front end) can catch one base class.
"""


class ToolkitError(Exception):
    """Base class for all errors raised deliberately by this package."""


class FormatError(ToolkitError):
    """Malformed container: bad magic, truncated payload, trailing bytes."""


class VocabError(ToolkitError):
    """Label id or label name outside the declared class vocabulary."""


class DataError(ToolkitError):
    """Non-finite values or inconsistent record shapes in a dataset."""


class IoError(ToolkitError):
    """Filesystem problem while reading or writing a container."""


class DimError(ToolkitError):
    """Vector dimensionality does not match the object it is used with."""


class EmptyClassError(ToolkitError):
    """An operation needed at least one record of a class and found none."""


class DegenerateVarianceError(ToolkitError):
    """Total variance is zero, so variance ratios are undefined."""


class PoolError(ToolkitError):
    """A data pool is too small to draw the requested subsample."""

    def __init__(self, message: str, class_name: str | None = None):
        super().__init__(message)
        self.class_name = class_name


class EmptyTestError(ToolkitError):
    """Evaluation was asked to score an empty test set."""


class DivergenceError(ToolkitError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class BenchmarkCellError(ToolkitError):
    """A benchmark cell failed; the message names the cell."""
