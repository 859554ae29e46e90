"""Middleware modules"""

from .command_middleware import EXIT_OK, EXIT_PROPERTY_FAILURE, EXIT_USAGE, command_middleware

__all__ = ["EXIT_OK", "EXIT_PROPERTY_FAILURE", "EXIT_USAGE", "command_middleware"]
