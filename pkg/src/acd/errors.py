class ACDError(Exception):
    """Invalid input or a numerically undefined diagnostic."""

    def __init__(self, message: str, stage: str | None = None):
        self.stage = stage
        self.message = message
        super().__init__(f"[{stage}] {message}" if stage else message)


class SingularDesignError(ACDError):
    """Design (or weighted design) is rank deficient."""


class ACDWarning(UserWarning):
    """Degenerate but recoverable situation (constant column, flat distances, fold reduction)."""
