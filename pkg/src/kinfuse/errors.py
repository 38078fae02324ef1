"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all kinfuse errors."""


class CorpusFormatError(PipelineError):
    """A corpus or dataset file does not parse under its declared format."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class SchemaError(PipelineError):
    """A line-delimited record file violates its schema."""

    def __init__(self, path, line_no, message):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


class IndexBuildError(PipelineError):
    """Index construction failed (e.g. duplicate unit identifier)."""


class IndexVersionError(PipelineError):
    """A persisted index was written with an incompatible format version."""


class IndexIntegrityError(PipelineError):
    """A persisted index is truncated, corrupt, or inconsistent with its manifest."""


class ContractError(PipelineError):
    """A caller violated an operation precondition (e.g. context at inference)."""


class ConfigError(PipelineError):
    """Run configuration is missing keys or holds invalid values."""


class EvaluationError(PipelineError):
    """Predictions cannot be scored (missing gold, short candidate lists, ...)."""
