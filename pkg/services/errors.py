"""Exception hierarchy shared by every service"""
from typing import Optional


class GsmError(Exception):
    """Base class for all toolkit errors (mapped to exit code 2 by the CLI)"""


class InvalidGraphError(GsmError):
    """Graph violates a structural invariant or an operation precondition"""


class GeneratorError(GsmError):
    """A generator cannot produce the requested instance"""


class MissingDataError(GsmError):
    """Colors or features required by an operation are absent"""


class TokenizationError(GsmError):
    """Tokenizer parameters or token references are invalid"""


class DimensionMismatchError(GsmError):
    """Matrix / vector shapes do not chain"""


class FactoredStructureError(GsmError):
    """Edge sequence is not a blockwise factored-graph encoding"""


class ConfigError(GsmError):
    """Unknown name or inconsistent pipeline configuration"""


class StorageError(GsmError):
    """A file could not be read, written or decoded"""


class LocalityViolationError(GsmError):
    """A retired node reappeared in a stream that was declared k-local"""

    def __init__(self, position: int, node: Optional[int] = None):
        self.position = position
        self.node = node
        detail = f" (node {node})" if node is not None else ""
        super().__init__(f"node locality violated at edge position {position}{detail}")


class PropertyFailure(Exception):
    """One or more verified properties failed (exit code 1, not a usage error)"""

    def __init__(self, failed: int, total: int):
        self.failed = failed
        self.total = total
        super().__init__(f"{failed} of {total} properties failed")
