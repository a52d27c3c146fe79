"""Exception hierarchy shared by all modules."""


class BttwistError(Exception):
    pass


# field construction / arithmetic
class SplitPrime(BttwistError):
    pass


class NotSquareFree(BttwistError):
    pass


class ZeroInput(BttwistError):
    pass


class DivisionByZero(BttwistError):
    pass


# tree geometry
class NoPeak(BttwistError):
    pass


class WindowTooLarge(BttwistError):
    pass


# branches
class NeedsExtension(BttwistError):
    pass


class NotAUnit(BttwistError):
    pass


# twisted forms / trivializations
class CocycleLawViolated(BttwistError):
    pass


class FieldTooSmall(BttwistError):
    pass


class NotIntegral(BttwistError):
    pass


# counting
class WindowInsufficient(BttwistError):
    pass


class NotAbsolutelyIrreducible(BttwistError):
    pass


# global counts
class BadN(BttwistError):
    pass


class DyadicSplit(BttwistError):
    pass


class WrongResidue(BttwistError):
    pass


class ExistenceUnknown(BttwistError):
    pass


class ExistenceFails(BttwistError):
    pass


class InvalidRepresentation(BttwistError):
    pass
