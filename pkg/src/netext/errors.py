"""Exception hierarchy shared by every module."""


class NetextError(Exception):
    pass


class InvalidInputError(NetextError, ValueError):
    """Arguments violate a documented precondition."""


class ResourceError(NetextError, RuntimeError):
    """A configured budget (group size, candidate count) would be exceeded."""


class ContractError(NetextError, RuntimeError):
    """A user-supplied map returned something malformed.

    ``offending_input`` keeps the argument that triggered the failure so that
    reports can point at it.
    """

    def __init__(self, message, offending_input=None):
        super().__init__(message)
        self.offending_input = offending_input


class PluginContractError(ContractError):
    """An external extension program broke the line protocol."""

    def __init__(self, message, offending_input=None, exchange=None):
        super().__init__(message, offending_input)
        self.exchange = exchange
