"""Exception hierarchy for sublaw."""


class SublawError(Exception):
    """Base class for every error raised by the library."""


class EnumerationCapExceeded(SublawError):
    """The exact oracle would have to enumerate more leaves than allowed."""

    def __init__(self, leaves, cap):
        super().__init__(f"exact enumeration needs {leaves} leaves, cap is {cap}")
        self.leaves = leaves
        self.cap = cap


class InvalidWindow(SublawError, ValueError):
    pass


class NegativeTruncationLevel(SublawError, ValueError):
    pass


class NonMeasurableEvent(SublawError):
    pass


class UnboundedSupport(SublawError):
    pass


class WindowMismatch(SublawError, ValueError):
    pass


class SchemeUnavailable(SublawError, ValueError):
    pass


class OutOfHorizon(SublawError, ValueError):
    pass


class CenteringUnavailable(SublawError):
    pass


class MissingCertificate(SublawError):
    pass


class HypothesisUnmet(SublawError):
    """A theorem's hypothesis failed its checker; the experiment was not run."""

    def __init__(self, condition, detail=""):
        msg = condition if not detail else f"{condition}: {detail}"
        super().__init__(msg)
        self.condition = condition
        self.detail = detail


class NotFoundOnPrefix(SublawError):
    pass
