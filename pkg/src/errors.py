class LanetError(Exception):
    """Base class for every failure raised by the knowledgebase engine."""


class CorpusError(LanetError):
    """A corpus / snapshot / lexicon line could not be parsed."""

    def __init__(self, message: str, record: str = None, field: str = None):
        self.record = record
        self.field = field
        where = []
        if record is not None:
            where.append(f"record {record}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class ValidationError(LanetError):
    pass


class HierarchyError(LanetError):
    pass


class NetworkError(LanetError):
    pass


class AssemblyError(LanetError):
    pass


class NotFoundError(LanetError):
    pass


class StageError(LanetError):
    """Wraps the failure of one build stage."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_NO_RESULT = 3


def exit_code_for(error: Exception) -> int:
    if isinstance(error, NotFoundError):
        return EXIT_NO_RESULT
    if isinstance(error, ValueError):
        return EXIT_USAGE
    return EXIT_FAILURE
