"""Shared exception types, mapped to distinct CLI exit codes."""


class WirescanError(Exception):
    """Base class for all package errors."""


class ConfigError(WirescanError):
    """Invalid run configuration or geometry library configuration."""

    exit_code = 2


class SolverError(WirescanError):
    """Meshing or electromagnetic solve failure."""

    exit_code = 3


class DataFormatError(WirescanError):
    """Malformed dataset, manifest, or exported artifact."""

    exit_code = 4
