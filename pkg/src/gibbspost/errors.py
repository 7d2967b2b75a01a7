"""Exception hierarchy shared by all modules."""


class GibbsPostError(Exception):
    """Base class for package errors."""


class InputError(GibbsPostError, ValueError):
    """Invalid argument: out-of-range symbol, mismatched spec, bad shape."""


class NumericError(GibbsPostError, ArithmeticError):
    """A numerical routine failed to converge or produced non-finite output."""


class DegeneratePosteriorError(GibbsPostError):
    """Every node received zero likelihood, so the posterior is undefined."""


class FitError(GibbsPostError):
    """Too few usable points for a regression."""


class ConfigError(GibbsPostError):
    """Experiment configuration failed validation.

    ``faults`` holds every fault found, not only the first.
    """

    def __init__(self, faults):
        self.faults = list(faults)
        super().__init__("; ".join(self.faults))
