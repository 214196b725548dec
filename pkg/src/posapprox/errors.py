"""Exception hierarchy shared by all modules."""


class PosApproxError(Exception):
    """Base class for library errors."""


class PrecisionExhausted(PosApproxError):
    """Refinement reached the precision cap without deciding a comparison.

    Usually means two quantities are exactly equal, e.g. because the inputs
    are rationally dependent.
    """


class IntervalTooWide(PosApproxError):
    pass


class DescriptorError(PosApproxError, ValueError):
    pass


class PreconditionNotCertified(PosApproxError):
    pass


class SearchFailed(PosApproxError):
    pass


class DetConditionFailed(PosApproxError):
    pass


class Inapplicable(PosApproxError):
    pass


class NoApplicableNu(PosApproxError):
    pass


class DiophantineConditionViolated(PosApproxError):
    pass
