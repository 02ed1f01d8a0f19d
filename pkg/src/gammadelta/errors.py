"""Exception hierarchy shared by all modules."""


class GammaDeltaError(Exception):
    """Base class for every error raised by the library."""


class NonPLocal(GammaDeltaError, ValueError):
    """A scalar with negative p-adic valuation where a p-local one is required."""


class TruncationOverflow(GammaDeltaError):
    """A result would carry divided-power weight above the context's bound."""

    def __init__(self, needed, bound, what="weight"):
        self.needed = needed
        self.bound = bound
        super().__init__(
            f"{what} {needed} exceeds bound {bound}; raise --weight-bound to at least {needed}"
        )


class DepthExceeded(GammaDeltaError):
    """A delta-tower variable deeper than the context's depth bound is required."""

    def __init__(self, needed, bound):
        self.needed = needed
        self.bound = bound
        super().__init__(
            f"delta depth {needed} exceeds bound {bound}; raise --depth-bound to at least {needed}"
        )


class NotInIdeal(GammaDeltaError, ValueError):
    """Divided powers requested of an element outside the divided-power ideal."""


class ZeroElement(GammaDeltaError, ValueError):
    pass


class ContextMismatch(GammaDeltaError, ValueError):
    pass
