"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid experiment configuration (bad key, value, or combination)."""


class NumericalFailure(ArithmeticError):
    """Base class for linear-algebra failures."""


class SvdConvergenceError(NumericalFailure):
    """SVD iteration did not converge; carries the offending dimensions."""

    def __init__(self, rows, cols):
        self.rows = rows
        self.cols = cols
        super().__init__(f"SVD failed to converge for a {rows}x{cols} matrix")


class SingularMatrixError(NumericalFailure):
    """Matrix is singular or too ill-conditioned to invert."""

    def __init__(self, condition):
        self.condition = condition
        super().__init__(f"matrix is singular or ill-conditioned (cond ~ {condition:.3e})")


class DegenerateInputError(ValueError):
    """An input that must be nonzero / nondegenerate was not."""


class CodebookFormatError(ValueError):
    """Codebook file could not be parsed; carries the 1-based line number."""

    def __init__(self, line, message):
        self.line = line
        super().__init__(f"line {line}: {message}")
