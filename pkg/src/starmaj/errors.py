"""Exception hierarchy shared by all modules."""


class StarmajError(Exception):
    """Base class for errors raised by this package."""


class InputError(StarmajError, ValueError):
    """Raised when an argument or input file is malformed."""


class ParseError(InputError):
    """Raised on a syntax error in an expression.

    ``offset`` is the character offset into the source text at which parsing
    stopped (it may equal the text length for truncated input).
    """

    def __init__(self, message, offset, text=""):
        super().__init__(f"{message} (at offset {offset})")
        self.message = message
        self.offset = offset
        self.text = text


class EvaluationError(StarmajError, ArithmeticError):
    """Raised when an expression is evaluated outside its natural domain.

    ``subexpr`` is the offending subexpression (as text) and ``index`` the
    first row of a batched evaluation at which the problem occurred.
    """

    def __init__(self, message, subexpr="", index=0):
        super().__init__(f"{message}: {subexpr}" if subexpr else message)
        self.subexpr = subexpr
        self.index = index


class ConfigurationError(StarmajError):
    """A sampled check left the evaluable region of the function.

    Carries the offending ``(x, y, lam)`` triple as ``witness``.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class HypothesisViolation(StarmajError):
    """A sampled hypothesis of a check (sign, boundedness) does not hold."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PreconditionError(StarmajError):
    """A majorization relation required by an inequality check does not hold.

    ``condition`` names the failed condition: ``string_order``, ``prefix``
    or ``terminal``.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class GenerationError(StarmajError):
    """Random instance generation failed within the retry budget."""
