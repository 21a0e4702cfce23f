"""Exception types shared across the package."""


class NotSPDError(ValueError):
    """A matrix (or preconditioner operator) violated the SPD assumption."""


class BreakdownError(RuntimeError):
    """A nonpositive pivot appeared while building the inverse factors.

    For an SPD input this cannot happen in exact arithmetic; seeing it means
    the input is not SPD or the arithmetic has gone catastrophically wrong.
    """

    def __init__(self, column, pivot):
        self.column = column
        self.pivot = pivot
        super().__init__(
            f"breakdown at column {column}: pivot {pivot:.6e} is not positive "
            "(input matrix is not SPD?)"
        )


class MatrixFormatError(ValueError):
    """A Matrix Market stream could not be parsed or is unsupported."""
