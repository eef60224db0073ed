"""Exception hierarchy.

Two families matter to callers: :class:`TableError` for malformed input
tables (CLI exit code 2) and :class:`MeasureDomainError` for tables on
which a measure or its derivatives are undefined (CLI exit code 3).
"""


class CtSmoothError(ValueError):
    pass


class TableError(CtSmoothError):
    pass


class RaggedRowsError(TableError):
    pass


class AllZeroTableError(TableError):
    pass


class SumOutOfToleranceError(TableError):
    pass


class NegativeAlphaError(CtSmoothError):
    pass


class NonPositiveParameterError(CtSmoothError):
    pass


class MeasureDomainError(CtSmoothError):
    pass


class NotSquareError(MeasureDomainError):
    def __init__(self, msg="measure requires a square table"):
        super().__init__(msg)


class AllDiagonalError(MeasureDomainError):
    def __init__(self, msg="all probability mass lies on the diagonal; symmetry measure undefined"):
        super().__init__(msg)


class DegenerateMarginalsError(MeasureDomainError):
    def __init__(self, msg="fewer than two nonzero row marginals; Cramer coefficient undefined"):
        super().__init__(msg)


class DivergenceUndefinedError(MeasureDomainError):
    pass


class BoundaryPointError(MeasureDomainError):
    pass
