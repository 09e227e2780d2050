class StructureError(ValueError):
    """Malformed algebra, term, relation or instance."""


class ResourceGuardError(RuntimeError):
    """A search hit its configured size limit before finishing.

    The result is unknown, not negative: callers must not treat this as a
    "no" answer.
    """

    def __init__(self, message: str, explored: int = 0):
        super().__init__(message)
        self.explored = explored
