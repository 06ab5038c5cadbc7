"""Exceptions raised across the tape, compiler, word and algebra modules."""


class CayleyTapeError(Exception):
    """Base class for every error this package raises on purpose"""


class BudgetExhausted(CayleyTapeError, RuntimeError):
    """A semi-decidable word-problem search ran past its step budget"""

    def __init__(self, message: str, budget: int = 0):
        super().__init__(message)
        self.budget = budget


class UndecidableBackend(CayleyTapeError, ValueError):
    """An operation that needs exact canonical forms was given a semi-decidable backend"""


class InvalidAlphabet(CayleyTapeError, ValueError):
    """Generator names or the inverse map violate the alphabet rules"""


class FiniteGroup(CayleyTapeError, ValueError):
    """A finite group was offered as a tape graph"""


class MachineDefinitionError(CayleyTapeError, ValueError):
    """A machine description is incomplete or references unknown states, symbols or moves"""


class PointerClobber(CayleyTapeError, RuntimeError):
    """The word-problem walk found a pointer stack out of order"""


class NoPath(CayleyTapeError, RuntimeError):
    """No super-reduced word of the requested depth exists"""


class LowDegreeResidue(CayleyTapeError, ValueError):
    """p - 1 kept a non-zero homogeneous component at or below the even depth"""

    def __init__(self, message: str, degrees=()):
        super().__init__(message)
        self.degrees = tuple(degrees)


class DimensionOverflow(CayleyTapeError, RuntimeError):
    """The monomial basis at some degree exceeds the configured cap"""


class ScheduleError(CayleyTapeError, ValueError):
    """The delta relations are ambiguous, so gamma is not well defined"""
