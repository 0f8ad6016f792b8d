"""Exception hierarchy.

Two families matter to callers: :class:`DataError` (bad or inconsistent
input) and :class:`NumericalError` (the math could not produce an answer).
The CLI maps them to distinct exit codes.
"""


class PolarDivError(Exception):
    pass


class DataError(PolarDivError, ValueError):
    pass


class NumericalError(PolarDivError, ArithmeticError):
    pass


class MalformedLine(DataError):
    def __init__(self, line_no, reason=""):
        self.line_no = line_no
        self.reason = reason
        msg = f"malformed event at line {line_no}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class EmptyEventSet(DataError):
    pass


class EmptyAfterPrune(DataError):
    pass


class UnknownUser(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownAnchor(DataError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DimensionMismatch(DataError):
    pass


class ZeroDegreeNode(DataError):
    pass


class EmptySharerSet(DataError):
    pass


class EmptyPool(DataError):
    pass


class NoEvaluableUsers(DataError):
    pass


class EmptyHoldout(DataError):
    pass


class TooFewItems(DataError):
    pass


class EmptyList(DataError):
    pass


class InvalidParams(DataError):
    pass


class NotConverged(NumericalError):
    def __init__(self, max_iter):
        self.max_iter = max_iter
        super().__init__(f"power iteration did not converge in {max_iter} iterations")


class DegenerateDimension(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass
