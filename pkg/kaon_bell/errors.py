"""Exception hierarchy shared by the library, the CLI and the MCP tools."""

from typing import List, Tuple


class KaonBellError(Exception):
    """Base class for every error raised by kaon_bell."""


class DimensionError(KaonBellError, ValueError):
    """Shapes or arities do not match."""


class NotHermitianError(KaonBellError, ValueError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class InvalidStateError(KaonBellError, ValueError):
    """A density matrix, projector or time argument violates its invariants."""


class PhysicsRangeError(KaonBellError, ValueError):
    """Model parameters outside the range where the model is defined."""


class OutputError(KaonBellError):
    """A result file could not be written."""


class ConfigError(KaonBellError):
    """Configuration could not be parsed or validated.

    ``diagnostics`` holds ``(key_path, message)`` pairs, one per problem.
    """

    def __init__(self, diagnostics: List[Tuple[str, str]]):
        self.diagnostics = list(diagnostics)
        lines = [f"{path}: {message}" for path, message in self.diagnostics]
        super().__init__("; ".join(lines) if lines else "invalid configuration")
