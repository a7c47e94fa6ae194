"""Exception types.  Each carries a short machine-readable ``code``."""


class StablciError(Exception):
    code = "ERROR"


class RingMismatch(StablciError, ValueError):
    code = "RING_MISMATCH"


class ArityMismatch(StablciError, ValueError):
    code = "ARITY_MISMATCH"


class NonSquareSystem(StablciError, ValueError):
    code = "NON_SQUARE"


class NotZeroDimensional(StablciError):
    code = "NOT_ZERO_DIM"


class GenericPositiveDimensional(StablciError):
    code = "GENERIC_POSITIVE_DIM"


class NoSmoothSubscheme(StablciError):
    code = "NO_SMOOTH"

    def __init__(self, m=None):
        space = f"A^{m}_K" if m is not None else "A^m_K"
        super().__init__(f"There is no I-smooth subscheme of {space}")


class ShapeFailed(StablciError):
    code = "SHAPE_FAILED"


class DegenerateSequence(StablciError):
    code = "DEGENERATE"


class OnBoundary(StablciError):
    code = "ON_BOUNDARY"


class SingularMatrix(StablciError, ArithmeticError):
    code = "SINGULAR"


class NoConvergence(StablciError, ArithmeticError):
    code = "NO_CONVERGENCE"


class Inadmissible(StablciError):
    code = "INADMISSIBLE"


class OriginRoot(StablciError):
    code = "ORIGIN_ROOT"


class ZeroGradient(StablciError):
    code = "ZERO_GRADIENT"


class SingularTransform(StablciError):
    code = "SINGULAR_TRANSFORM"


class ParseError(StablciError, ValueError):
    """Syntax error in a system file; ``line`` and ``col`` are 1-based."""

    code = "PARSE_ERROR"

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f" (line {line}, column {col})" if line is not None else ""
        super().__init__(message + where)


class UndeclaredIdentifier(ParseError):
    code = "UNDECLARED_IDENTIFIER"
