"""Exception types shared across the package."""


class MergeLabError(Exception):
    pass


class UnknownPolicy(MergeLabError, ValueError):
    pass


class AlphaOutOfRange(MergeLabError, ValueError):
    pass


class CostOverflow(MergeLabError, OverflowError):
    """A run length, input size or merge cost no longer fits in 64 bits."""


class InstrumentationViolation(MergeLabError, AssertionError):
    def __init__(self, check, step, detail):
        self.check = check
        self.step = step
        self.detail = detail
        super().__init__(f"{check} violated at step {step}: {detail}")
