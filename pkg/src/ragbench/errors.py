"""Exception hierarchy shared across the package."""


class RagBenchError(Exception):
    """Base class for all errors raised by this package."""


# -- corpus --------------------------------------------------------------

class MalformedLine(RagBenchError):
    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        self.reason = reason
        msg = f"malformed line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class EmptyCorpus(RagBenchError):
    pass


class PathNotFound(RagBenchError):
    pass


# -- configuration -------------------------------------------------------

class InvalidConfig(RagBenchError):
    pass


class TemplateError(InvalidConfig):
    pass


# -- embedding / vector store --------------------------------------------

class EmptyText(RagBenchError):
    pass


class DimMismatch(RagBenchError):
    pass


class DuplicateRef(RagBenchError):
    pass


class EmptyIndex(RagBenchError):
    pass


class FormatError(RagBenchError):
    pass


class ChecksumError(RagBenchError):
    pass


# -- remote calls --------------------------------------------------------

class RequestTimeout(RagBenchError):
    pass


class RateLimitedExhausted(RagBenchError):
    pass


class ProtocolError(RagBenchError):
    pass


class EmptyCompletion(RagBenchError):
    pass


# -- metrics -------------------------------------------------------------

class MetricUndefined(RagBenchError):
    pass


class EmptyResults(RagBenchError):
    pass
