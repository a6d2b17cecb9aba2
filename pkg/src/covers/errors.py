"""Exception hierarchy shared by the cover engines."""


class CoverError(Exception):
    """Base class for all errors raised by this package."""


class SortError(CoverError):
    pass


class TheoryError(CoverError):
    """A literal does not belong to the theory a procedure was asked to handle."""


class InfeasibleError(CoverError):
    pass


class OracleLimitError(CoverError):
    pass


class UnsupportedCombinationError(CoverError):
    """Raised when a theory combination falls outside the convex/tame fragment.

    Covers need not exist for non-convex combinations: the constraint
    ``0 < e < x  &  f(e) = 0`` over integer difference logic plus one free
    unary function has no cover at all, so no answer is fabricated.
    """

    COUNTEREXAMPLE = "exists e. 0 < e & e < x & f(e) = 0"

    def __init__(self, message: str):
        super().__init__(
            f"{message} (non-convex combinations may have no cover, e.g. {self.COUNTEREXAMPLE})"
        )


class InternalError(CoverError):
    pass


class DanglingDefError(CoverError):
    pass


class ParseError(CoverError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}" if line else message)
