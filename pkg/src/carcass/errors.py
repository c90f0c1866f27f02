"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front-end can map
failures onto its documented codes without a lookup table.
"""


class CarcassError(Exception):
    exit_code = 1


class InputError(CarcassError, ValueError):
    """Malformed or invalid input (exit code 2)."""

    exit_code = 2


class PreconditionError(CarcassError):
    """A valid input that does not meet an operation's precondition (exit code 3)."""

    exit_code = 3


class InvariantViolation(CarcassError, AssertionError):
    """An exact identity that must hold did not (exit code 4)."""

    exit_code = 4


class NotUnimodal(InputError):
    pass


class DuplicateAbscissa(InputError):
    pass


class OutOfRange(InputError):
    pass


class OutOfDomain(InputError):
    pass


class NotHomeomorphism(InputError):
    pass


class NonDyadicKink(InputError):
    pass


class NotFirm(PreconditionError):
    pass


class NotFirmWithinBound(NotFirm):
    def __init__(self, kink, max_iter):
        self.kink = kink
        self.max_iter = max_iter
        super().__init__(f"kink {kink} does not reach 0 within {max_iter} iterations")


class DepthCapExceeded(PreconditionError):
    pass


class LevelMissing(DepthCapExceeded):
    pass


class IndexOutOfRange(PreconditionError, IndexError):
    pass


class BitsTooShort(PreconditionError):
    pass


class BitsExhausted(PreconditionError):
    pass


class WindowOutOfRange(PreconditionError, IndexError):
    pass


class SideUnavailable(PreconditionError):
    pass


class TOnBoundary(PreconditionError):
    pass


class Inconclusive(PreconditionError):
    pass
