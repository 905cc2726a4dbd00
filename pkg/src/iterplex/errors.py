"""Exception hierarchy shared by every module.

The CLI maps each family onto a fixed exit code, so the grouping here
matters: input problems, size guards, lumpability failures and an
unreachable all-ones state are kept apart.
"""


class IterplexError(Exception):
    """Base class for all package errors."""


class InvalidInput(IterplexError, ValueError):
    exit_code = 1


class NonSquare(InvalidInput):
    pass


class SymbolOutOfRange(InvalidInput):
    pass


class RowNotPermutation(InvalidInput):
    def __init__(self, row: int, symbol: int):
        super().__init__(f"row {row} repeats symbol {symbol}")
        self.row = row
        self.symbol = symbol


class ColumnNotPermutation(InvalidInput):
    def __init__(self, column: int, symbol: int):
        super().__init__(f"column {column} repeats symbol {symbol}")
        self.column = column
        self.symbol = symbol


class LengthMismatch(InvalidInput):
    pass


class BadMultisetPermutation(InvalidInput):
    pass


class ArgumentOutOfRange(InvalidInput):
    pass


class SizeError(IterplexError):
    exit_code = 2


class FeasibilityExceeded(SizeError):
    def __init__(self, what: str, estimate: int, limit: int):
        super().__init__(f"{what}: size estimate {estimate} exceeds limit {limit}")
        self.estimate = estimate
        self.limit = limit


class StateSpaceTooLarge(SizeError):
    def __init__(self, what: str, size: int, limit: int):
        super().__init__(f"{what}: {size} exceeds cap {limit}")
        self.size = size
        self.limit = limit


class NotLumpable(IterplexError):
    exit_code = 3

    def __init__(self, state_a, state_b, block: int, sum_a, sum_b):
        super().__init__(
            f"states {list(state_a)} and {list(state_b)} send {sum_a} vs {sum_b} "
            f"into block {block}"
        )
        self.state_a = state_a
        self.state_b = state_b
        self.block = block


class EUnreachable(IterplexError):
    exit_code = 4


class KernelDimensionNotOne(IterplexError):
    pass


class LambdaNotEigenvalue(IterplexError):
    pass


class NonIntegerDivision(IterplexError):
    pass
