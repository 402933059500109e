"""
Base exception for the embedded ensembles toolkit.

Service modules subclass this next to the code that raises; the CLI catches the base
class and turns it into a nonzero exit status.
"""

from typing import Optional


class EmbeddedEnsembleError(Exception):
    """Base class for domain failures. Carries a human-readable message."""

    exit_status: int = 2

    def __init__(self, message: str, detail: Optional[dict] = None):
        self.message = message
        self.detail = detail or {}
        super().__init__(self.message)


class BudgetExceededError(EmbeddedEnsembleError):
    """Raised when a deterministic work budget is exhausted."""

    exit_status = 3

    def __init__(self, what: str, budget: int, message: Optional[str] = None):
        self.what = what
        self.budget = budget
        super().__init__(
            message or f"{what} exceeded its budget of {budget} operations",
            {"budget": budget},
        )
