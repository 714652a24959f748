"""Exception hierarchy with stable error codes for the CLI."""


class SchottkyError(Exception):
    """Base class. ``code`` is the stable identifier printed by the CLI."""

    code = "SchottkyError"
    # CLI exit status: 1 = computation error, 2 = invalid input
    exit_status = 1


class InvalidInput(SchottkyError):
    code = "InvalidInput"
    exit_status = 2


class ParabolicOrElliptic(SchottkyError):
    code = "ParabolicOrElliptic"


class DegenerateMap(InvalidInput):
    code = "DegenerateMap"


class DegenerateMarking(SchottkyError):
    code = "DegenerateMarking"


class NotClassicalSchottky(SchottkyError):
    code = "NotClassicalSchottky"


class EmptyWord(SchottkyError):
    code = "EmptyWord"


class RankMismatch(InvalidInput):
    code = "RankMismatch"


class MultiplierOnUnitCircle(SchottkyError):
    code = "MultiplierOnUnitCircle"


class DivergenceSuspected(SchottkyError):
    code = "DivergenceSuspected"


class NotNormalized(SchottkyError):
    code = "NotNormalized"


class NotRealGroup(SchottkyError):
    code = "NotRealGroup"


class InvalidParameter(InvalidInput):
    code = "InvalidParameter"


class CertificateRequired(SchottkyError):
    code = "CertificateRequired"


class PathCrossesCircle(SchottkyError):
    code = "PathCrossesCircle"


class PoleInDomain(InvalidInput):
    code = "PoleInDomain"


class RankDeficientSeeds(SchottkyError):
    code = "RankDeficientSeeds"


class IntegralityViolation(SchottkyError):
    code = "IntegralityViolation"


class PoleAtZ0(InvalidInput):
    code = "PoleAtZ0"


class CoincidentFixedPoints(InvalidInput):
    code = "CoincidentFixedPoints"


class NonInvertibleLeadingTerm(SchottkyError):
    code = "NonInvertibleLeadingTerm"
