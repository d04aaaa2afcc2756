"""Exception hierarchy shared by the simulator modules."""


class MQPCError(Exception):
    """Base class for all simulator errors."""


class DomainError(MQPCError, ValueError):
    """An argument lies outside the domain an operation accepts."""


class MeasurementError(MQPCError):
    """A forced measurement outcome has zero probability."""


class SizeError(MQPCError):
    """A state or enumeration exceeds the desk-scale limits."""


class ProtocolError(MQPCError):
    """Protocol messages are inconsistent (wrong counts, missing parties)."""
