"""Services module - exceptions are exported here, service functions live in their modules"""
from services.errors import (
    ConfigError,
    DimensionMismatchError,
    FactoredStructureError,
    GeneratorError,
    GsmError,
    InvalidGraphError,
    LocalityViolationError,
    MissingDataError,
    PropertyFailure,
    StorageError,
    TokenizationError,
)

__all__ = [
    "ConfigError",
    "DimensionMismatchError",
    "FactoredStructureError",
    "GeneratorError",
    "GsmError",
    "InvalidGraphError",
    "LocalityViolationError",
    "MissingDataError",
    "PropertyFailure",
    "StorageError",
    "TokenizationError",
]
