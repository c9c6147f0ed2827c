"""Exception hierarchy shared by every module in the package."""

from __future__ import annotations


class MBRError(Exception):
    """Base class for all errors raised by :mod:`mbr`."""


# probability core
class InvalidDistribution(MBRError, ValueError):
    pass


class AllZero(InvalidDistribution):
    pass


class NegativeMass(InvalidDistribution):
    pass


class BadIndex(MBRError, IndexError):
    pass


class ZeroConditioningMass(MBRError, ValueError):
    pass


# environments and instances
class ValidationError(MBRError, ValueError):
    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class ParseError(MBRError, ValueError):
    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}:{line}"
        super().__init__(f"{where}: {message}")


class MeanOutOfRange(MBRError, ValueError):
    pass


class PolicyUndefined(MBRError, KeyError):
    pass


# inference and planning
class ZeroLikelihood(MBRError, ValueError):
    pass


class BudgetExceeded(MBRError, RuntimeError):
    def __init__(self, layer, size, budget):
        self.layer = layer
        self.size = size
        self.budget = budget
        super().__init__(
            f"layer {layer} needs {size} nodes, budget is {budget}; "
            "lower the horizon or raise the budget (MBR_NODE_BUDGET)"
        )


class NotApplicable(MBRError, ValueError):
    pass


class NotStatic(NotApplicable):
    pass


class NotPartialFeedback(NotApplicable):
    pass


# information measures and bounds
class SupportMismatch(MBRError, ValueError):
    pass


class NegativeKL(MBRError, ValueError):
    pass


class LipschitzViolated(NotApplicable):
    pass


class RewardRangeViolated(NotApplicable):
    pass
