"""Error taxonomy shared by the library and the CLI.

Exit-code mapping used by the CLI: usage/domain problems exit 2, capacity
refusals exit 3, verification failures exit 4.
"""


class UsageError(ValueError):
    """Malformed request: bad arguments, malformed files, unknown names."""


class DomainError(ValueError):
    """Mathematically invalid input (degenerate triangle, point outside body, ...)."""


class CapacityError(RuntimeError):
    """Request exceeds configured resource guards; message names the limit."""


class VerificationError(RuntimeError):
    """A certificate or consistency check that was expected to hold failed."""
