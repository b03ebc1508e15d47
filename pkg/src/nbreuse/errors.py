"""Exception types shared across the toolkit."""


class NbreuseError(Exception):
    """Base class for all toolkit errors."""


class MalformedDocument(NbreuseError):
    """Input is not a parseable notebook document."""


class UnsupportedFormatVersion(NbreuseError):
    """Notebook format major version is not supported."""


class IncompleteLog(NbreuseError):
    """Execution log omits a cell that was executed."""


class UnknownCellInLog(NbreuseError):
    """Execution log references a cell id not present in the document."""


class SubjectSyntaxError(NbreuseError):
    """Analyzed notebook code failed to parse.

    Carries the offending cell id and, when available, the position
    reported by the parser.
    """

    def __init__(self, message: str, cell_id: str, lineno: int | None = None):
        super().__init__(message)
        self.cell_id = cell_id
        self.lineno = lineno


class EndpointUnavailable(NbreuseError):
    """A remote model endpoint could not be reached or answered abnormally."""


class MalformedAnnotation(NbreuseError):
    """Annotator endpoint returned a response that could not be parsed."""


class EmptyCorpus(NbreuseError):
    """Evaluation was asked to run over zero pairs."""


class EmptySchema(NbreuseError):
    """Dataset schema has no columns."""


class HarnessUnavailable(NbreuseError):
    """The execution harness script or interpreter is missing."""


class UnreadableArtifact(NbreuseError):
    """A rendered artifact file is missing or not a readable image."""


class UnparseablePlan(NbreuseError):
    """Planner response could not be parsed into plan steps."""


class IncompletePlan(NbreuseError):
    """Finalization was requested while plan steps are still open."""


class NoNotebooksFound(NbreuseError):
    """Corpus directory contains no notebook files."""


class MissingMetadata(NbreuseError):
    """Component store lacks the metadata needed to build an index."""
