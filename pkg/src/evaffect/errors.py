"""Exception types shared across the pipeline.

ValidationError covers semantic violations (bad coordinates, unsorted
timestamps, out-of-range values, incompatible arguments); FormatError covers
unparseable or structurally broken files (bad magic, truncated payload).
The CLI maps them to exit codes 1 and 2 respectively.
"""


class ValidationError(ValueError):
    """Input violates a documented invariant or precondition."""


class FormatError(ValueError):
    """Byte stream or text file does not conform to its declared format."""


class ConstantSeriesError(ValidationError):
    """Correlation is undefined because one series has zero variance."""


class TemplateCoverageError(ValidationError):
    """One or more emotion labels have no data to build a template from."""

    def __init__(self, missing):
        self.missing = tuple(missing)
        names = ", ".join(label.value for label in self.missing)
        super().__init__(f"no frames for emotion label(s): {names}")
