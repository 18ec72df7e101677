"""Exception types shared across the package.

The three categories map onto distinct failure modes: bad configuration
(rejected before any round runs), broken call contracts (bad arguments to an
otherwise valid object), and protocol violations (calls out of the strict
predict/observe/step order).
"""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (dimensions, budgets, presets)."""


class ContractViolationError(ValueError):
    """A call violated a documented precondition."""


class ProtocolError(RuntimeError):
    """Predict/observe/step calls arrived out of order or past the horizon."""
