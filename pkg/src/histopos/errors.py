"""Exception hierarchy shared by every module.

Each error carries an optional ``witness`` so callers (and the CLI) can
report the offending elements in machine-readable form.
"""


class HistoposError(Exception):
    """Base class for all domain errors."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_dict(self):
        out = {"type": type(self).__name__, "message": self.message}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


class DuplicateElement(HistoposError):
    pass


class UnknownElement(HistoposError):
    pass


class CycleDetected(HistoposError):
    pass


class NotAPartialOrder(HistoposError):
    pass


class MissingBound(HistoposError):
    pass


class NotInvolutive(HistoposError):
    pass


class NotOrthomodular(HistoposError):
    pass


class PartialOperation(HistoposError):
    pass


class UndefinedPair(HistoposError):
    pass


class NotHermitian(HistoposError):
    pass


class NotNormalized(HistoposError):
    pass


class NotACompleteSet(HistoposError):
    pass


class UnknownNode(HistoposError):
    pass


class NotASieve(HistoposError):
    pass


class NotASubpresheaf(HistoposError):
    pass


class PresheafInvalid(HistoposError):
    pass


class SizeGuard(HistoposError):
    pass


class NotClosed(HistoposError):
    pass


class OutOfRange(HistoposError):
    pass


class NotATopology(HistoposError):
    pass


class NotOpen(HistoposError):
    pass


class UnknownPoint(HistoposError):
    pass


class NotAutomorphism(HistoposError):
    pass


class NotGraded(HistoposError):
    pass


class NotHomomorphism(HistoposError):
    pass


class ParseError(HistoposError):
    pass


class SchemaError(HistoposError):
    pass
