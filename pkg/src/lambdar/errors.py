"""Exception types shared by every module of the package."""


class LambdaRError(Exception):
    """Base class for all library errors."""


class ParseError(LambdaRError):
    def __init__(self, message, line, column, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        where = f"line {line}, column {column}"
        if self.expected:
            message = f"{message} (expected one of: {', '.join(self.expected)})"
        super().__init__(f"{where}: {message}")


class CaptureError(LambdaRError):
    pass


class InvalidRedex(LambdaRError):
    pass


class NotABetaRedex(LambdaRError):
    pass


class NotPure(LambdaRError):
    pass


class NotInU(LambdaRError):
    pass


class NotInT(LambdaRError):
    pass


class FuelExhausted(LambdaRError):
    pass


class InternalNonTermination(LambdaRError):
    pass


class NotANormalForm(LambdaRError):
    pass


class UnsupportedStep(LambdaRError):
    pass


class PartitionMismatch(LambdaRError):
    pass


class SliceMismatch(LambdaRError):
    pass


class InvalidDerivation(LambdaRError):
    pass
