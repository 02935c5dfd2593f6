"""Exception types shared across the package."""


class FormatError(ValueError):
    """Malformed text input. ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExhausted(RuntimeError):
    """An exhaustive computation hit its work budget before finishing.

    Raised instead of returning a partial answer.
    """

    def __init__(self, what, budget, done=None):
        self.what = what
        self.budget = budget
        self.done = done
        msg = f"{what}: budget of {budget} exhausted"
        if done is not None:
            msg += f" after {done}"
        super().__init__(msg)


class ConstructionError(RuntimeError):
    """A generated protocol failed its own simulation check (a bug, not user error)."""
