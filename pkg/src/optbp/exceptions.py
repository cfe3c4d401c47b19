"""Exception hierarchy."""


class OptBPError(Exception):
    """Base class for all errors raised by this package."""


class InvalidArgumentError(OptBPError, ValueError):
    pass


class InvalidStateError(OptBPError, RuntimeError):
    pass


class DegenerateMomentumError(OptBPError, ArithmeticError):
    """The momentum-form update would divide by a (near) zero previous rate."""


class SimulationDivergedError(OptBPError, RuntimeError):
    pass


class TrainingDivergedError(OptBPError, RuntimeError):
    """Non-finite weights appeared during training.

    ``step`` is the sample index at which divergence was detected and
    ``records`` holds every step record emitted before it.
    """

    def __init__(self, step, records=()):
        super().__init__(f"training diverged at step {step}: non-finite weights")
        self.step = step
        self.records = list(records)


class ConfigError(OptBPError, ValueError):
    def __init__(self, message, path=None, line=None):
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
        self.path = path
        self.line = line
