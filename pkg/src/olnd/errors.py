"""Exception hierarchy shared by every stage of the pipeline."""


class OlndError(Exception):
    """Base class. ``code`` is the stable machine-readable error kind."""

    code = "OlndError"


class CimeError(OlndError):
    code = "CimeError"

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnterminatedBlock(CimeError):
    code = "UnterminatedBlock"


class HeaderMismatch(CimeError):
    code = "HeaderMismatch"


class UnknownEntity(CimeError):
    code = "UnknownEntity"


class DuplicateId(CimeError):
    code = "DuplicateId"


class GraphError(OlndError):
    code = "GraphError"


class DanglingNode(GraphError):
    code = "DanglingNode"


class DuplicateComponentId(GraphError):
    code = "DuplicateComponentId"


class UnknownComponent(GraphError, KeyError):
    code = "UnknownComponent"

    def __str__(self) -> str:
        return Exception.__str__(self)


class TopologyError(OlndError):
    code = "TopologyError"


class TooManyLevels(TopologyError):
    code = "TooManyLevels"


class NoBuses(TopologyError):
    code = "NoBuses"


class UnrecognizedScheme(TopologyError):
    code = "UnrecognizedScheme"
