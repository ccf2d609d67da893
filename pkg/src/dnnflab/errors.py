"""Exception hierarchy shared by all modules."""


class DnnfLabError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(DnnfLabError):
    """Malformed input: bad indices, cycles, unparseable files."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class CapacityError(DnnfLabError):
    """A size guard was exceeded, or parameters are too small for a construction."""


class ContractError(DnnfLabError):
    """A precondition or a guaranteed postcondition does not hold."""


class VariableCollisionError(DnnfLabError):
    """Two assignment sets that must be variable-disjoint share a variable."""


class UndefinedPartitionError(DnnfLabError):
    """The finest product partition of an empty assignment set is not defined."""
