class ConslawError(Exception):
    """Base class for all errors raised by this package."""


class UnsupportedExpression(ConslawError):
    """Expression is not a differential polynomial (e.g. fractional power)."""


class IncompletePoint(ConslawError):
    """Evaluation point is missing a value for some symbol."""


class NotNormalForm(ConslawError):
    """Expression contains t-derivatives that the normal form forbids."""


class NotCKForm(ConslawError):
    """PDE is not in Cauchy-Kovalevskaya solved form."""

    def __init__(self, message, jets=()):
        super().__init__(message)
        self.jets = tuple(jets)


class DSLSyntaxError(ConslawError):
    def __init__(self, message, line=0, col=0):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class UnknownSymbol(DSLSyntaxError):
    pass


class EmptyAnsatz(ConslawError):
    pass


class NotAMultiplier(ConslawError):
    pass


class UnsupportedBase(ConslawError):
    pass


class NotChainConsistent(ConslawError):
    pass
