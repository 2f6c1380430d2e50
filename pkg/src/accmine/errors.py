"""Exception hierarchy. The CLI maps every ``AccmineError`` to exit status 1."""


class AccmineError(Exception):
    """Base class for domain errors."""


class NotAnAccPragma(AccmineError):
    pass


class UnbalancedParentheses(AccmineError):
    pass


class GrammarUnavailable(AccmineError):
    pass


class NotADirectory(AccmineError):
    pass


class RemoteError(AccmineError):
    """Failure talking to the code-search provider; ``context`` names the request."""

    def __init__(self, message: str, context: dict | None = None):
        super().__init__(message)
        self.context = context or {}

    def __str__(self) -> str:
        base = super().__str__()
        if self.context:
            return f"{base} (request: {self.context})"
        return base


class AuthError(RemoteError):
    pass


class RateLimited(RemoteError):
    pass


class NetworkError(RemoteError):
    pass


class EmptyCorpus(AccmineError):
    pass


class MalformedLine(AccmineError):
    def __init__(self, line_number: int, detail: str = ""):
        self.line_number = line_number
        msg = f"malformed JSONL at line {line_number}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EmptyInput(AccmineError):
    pass


class UnknownId(AccmineError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"generation id {record_id!r} has no reference record")


class NotAnError(AccmineError):
    pass


class MarkerMissing(AccmineError):
    pass


class MarkerDuplicated(AccmineError):
    pass


class CompilerNotFound(AccmineError):
    pass


class SynthesisIncomplete(AccmineError):
    pass
