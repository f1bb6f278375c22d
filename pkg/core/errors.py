# --- Custom Exceptions ---
# Raised by core/ and services/; routes map them to HTTP status codes.


class ToolkitError(Exception):
    """Base class for every error raised by the toolkit."""
    pass


class DimensionError(ToolkitError):
    """Raised when a configuration length does not match the instance size."""
    pass


class CapacityError(ToolkitError):
    """Raised when an exact oracle or the simulator is asked for more qubits than its cap."""
    pass


class InvalidMatchingError(ToolkitError):
    """Raised when a swap set is not a matching over existing edges."""
    pass


class RoutingError(ToolkitError):
    """Raised when a hyperedge cannot be executed under the given layout."""
    pass


class DegenerateMixerError(ToolkitError):
    """Raised when both mixer fields vanish on a qubit."""
    pass


class UndefinedRatioError(ToolkitError):
    """Raised when an approximation ratio is requested against a zero ground energy."""
    pass


class FitError(ToolkitError):
    """Raised when the sweep-time calibration grid cannot support a linear fit."""
    pass


class InstanceFormatError(ToolkitError):
    """Raised when an instance, layout or coupling-map document is malformed."""
    pass


class TraceParseError(ToolkitError):
    """Raised when an incumbent trace line cannot be parsed."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")
