"""Exception hierarchy shared by all modules."""


class CertificationError(Exception):
    """Base class for every failure that invalidates a certified result."""


class DomainViolation(CertificationError):
    pass


class PreconditionViolation(CertificationError):
    pass


class ZeroMode(CertificationError):
    pass


class InsufficientCoefficients(CertificationError):
    pass


class NonpositiveVector(CertificationError):
    pass


class ZeroVector(CertificationError):
    pass


class TailDivergence(CertificationError):
    pass


class SpectrumProximity(CertificationError):
    pass


class WindowViolation(CertificationError):
    pass


class LedgerViolation(CertificationError):
    pass


class GapViolation(CertificationError):
    def __init__(self, n_sides: int, gap_lo):
        super().__init__(f"gap after N={n_sides} is not certified positive (lower bound {gap_lo})")
        self.n_sides = n_sides
        self.gap_lo = gap_lo


class ConfigError(Exception):
    """Invalid run configuration (maps to exit status 3)."""
