"""Exception hierarchy shared by every module."""


class AzflagError(Exception):
    """Base class for all errors raised by azflag."""


class SingularMatrix(AzflagError):
    pass


class DegenerateCell(AzflagError):
    pass


class RankMismatch(AzflagError):
    pass


class NotPseudoeffective(AzflagError):
    pass


class IndefiniteSupport(AzflagError):
    """The active set of a Zariski decomposition has a Gram matrix that is not negative definite.

    Usually the list of negative-curve candidates is incomplete or wrong.
    """


class IrrationalWall(AzflagError):
    """A chamber wall or threshold has no affine description with rational data."""


class ChamberError(AzflagError):
    """The chamber sweep reached a state the algorithm cannot continue from."""


class VolumeNotVanishing(AzflagError):
    pass


class VerificationFailed(AzflagError):
    """A supplied decomposition or restriction map failed its numerical checks."""

    def __init__(self, report):
        self.report = report
        super().__init__("; ".join(c.describe() for c in report.failures()))


class ParseError(AzflagError):
    pass


class ValidationError(AzflagError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
