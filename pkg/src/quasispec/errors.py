"""Exception hierarchy shared by all modules."""


class QuasispecError(Exception):
    """Base class for library errors."""


class DomainError(QuasispecError, ValueError):
    """Input lies outside the domain of an operation (unknown symbol, bad spec)."""


class SiteRangeError(QuasispecError, IndexError):
    """A requested site or level lies outside the materialized window."""


class PreconditionError(QuasispecError, ValueError):
    pass


class ConsistencyError(QuasispecError, ValueError):
    """A word failed a structural check (e.g. it cannot be n-partitioned)."""


class ResolutionError(QuasispecError, RuntimeError):
    """Numerical refinement did not resolve the expected structure."""


class UnsupportedSubstitutionError(QuasispecError, ValueError):
    def __init__(self, message, residue=None):
        super().__init__(message)
        self.residue = residue


class CertificateError(QuasispecError, ValueError):
    """Repetition precondition of a Gordon-type bound does not hold."""


class ContaminatedError(QuasispecError, ValueError):
    """Moment samples are polluted by reflection off the box boundary."""
