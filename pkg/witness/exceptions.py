class WitnessError(Exception):
    """Base class for every error raised by the witness library."""


class EmptyIntervalError(WitnessError, ValueError):
    pass


class OrderingError(WitnessError, ValueError):
    pass


class ConstructionInfeasible(WitnessError):
    pass


class SequenceTooShort(WitnessError, ValueError):
    pass


class ExactValuesRequired(WitnessError):
    pass


class NotUniformlyConvex(WitnessError):
    pass


class NonInterpolableError(WitnessError):
    def __init__(self, pair, message):
        # Index of the offending knot pair (pair, pair + 1)
        self.pair = pair
        super().__init__(f'knots {pair} and {pair + 1}: {message}')


class OutOfDomainError(WitnessError, ValueError):
    pass


class FastPathUnavailable(WitnessError):
    pass


class RegressionError(WitnessError, ValueError):
    pass
