"""Exception types shared across the package.

The CLI maps these to exit codes: ``ParameterError`` -> 2,
``TraceFormatError`` -> 3.
"""


class ParameterError(ValueError):
    """An argument or configuration value is outside its allowed domain."""


class TraceFormatError(ValueError):
    """An input file could not be parsed."""
