"""Exception hierarchy shared by the services, the CLI and the API."""


class IsacError(Exception):
    """Base class for every error raised by the simulator"""


class ConfigError(IsacError, ValueError):
    """Invalid scenario configuration or malformed configuration file"""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)


class DimensionError(IsacError, ValueError):
    """Array shapes do not match the network dimensions"""


class DegenerateChannelError(IsacError):
    """Channel statistics make an operation undefined (e.g. a C-AP with zero estimate variance)"""


class NoCommunicationApError(IsacError, ValueError):
    """An operation that needs at least one C-AP received an all-sensing assignment"""


class SolverError(IsacError):
    """A feasibility backend failed or is unavailable"""
