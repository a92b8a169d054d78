# =====================
# common/errors.py
# Exception hierarchy shared by the library and the CLI
# =====================
# Errors with extra constructor arguments must define __reduce__ to pickle across joblib workers.


class RodError(Exception):
    pass


class InsufficientData(RodError, ValueError):
    """Too few observations for the requested statistic."""

    def __init__(self, needed: int, got: int, what: str = "statistic"):
        super().__init__(f"{what} needs at least {needed} observations, got {got}")
        self.needed = needed
        self.got = got
        self.what = what

    def __reduce__(self):
        return (self.__class__, (self.needed, self.got, self.what))


class DegenerateSeries(RodError, ValueError):
    """Zero standard deviation: the window is constant."""


class InvalidSeries(RodError, ValueError):
    pass


class InvalidParameter(RodError, ValueError):
    pass


class NonFiniteState(RodError, ArithmeticError):
    def __init__(self, step: int, time: float):
        super().__init__(f"state became non-finite at step {step} (t={time:g})")
        self.step = step
        self.time = time

    def __reduce__(self):
        return (self.__class__, (self.step, self.time))


class InvalidPlan(RodError, ValueError):
    pass


class OneClassInput(RodError, ValueError):
    pass


class ConfigError(RodError, ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message

    def __reduce__(self):
        return (self.__class__, (self.field, self.message))


class SeriesParseError(RodError, ValueError):
    def __init__(self, row: int, message: str):
        super().__init__(f"row {row}: {message}")
        self.row = row
        self.message = message

    def __reduce__(self):
        return (self.__class__, (self.row, self.message))


class ArmFailure(RodError):
    """A simulation arm failed; `arm` identifies (a, sigma, arm, run)."""

    def __init__(self, arm: dict, reason: str):
        super().__init__(f"arm {arm} failed: {reason}")
        self.arm = arm
        self.reason = reason

    def __reduce__(self):
        return (self.__class__, (self.arm, self.reason))
