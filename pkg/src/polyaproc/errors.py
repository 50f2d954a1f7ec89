"""Error hierarchy shared by the library and the command line.

Every error carries the process exit code the CLI should use for it:
2 for invalid input, 3 for numerical ambiguity, 4 for exceeded limits.
"""

from __future__ import annotations


class PolyaError(Exception):
    exit_code = 2
    kind = "error"

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "kind": self.kind, "message": str(self)}


# Input and validation problems (exit 2)

class SpecError(PolyaError, ValueError):
    kind = "spec"


class ScalarParseError(SpecError):
    pass


class MixedArithmeticError(SpecError):
    pass


class UnknownFixture(SpecError):
    pass


class ValidationError(PolyaError, ValueError):
    kind = "validation"


class InitializationViolation(ValidationError):
    pass


class BalanceViolation(ValidationError):
    pass


class TenabilityViolation(ValidationError):
    pass


class JordanBasisError(ValidationError):
    """A pinned form or basis does not satisfy the Jordan basis requirements."""


class UnitRootNotSemisimple(ValidationError):
    pass


class SupportViolation(ValidationError):
    pass


class SmallProcess(ValidationError):
    pass


class UnsupportedPower(ValidationError):
    pass


class NegativePropensity(ValidationError):
    pass


# Numerical ambiguity (exit 3)

class NumericAmbiguity(PolyaError, ArithmeticError):
    exit_code = 3
    kind = "numeric-ambiguity"


class ClusterAmbiguity(NumericAmbiguity):
    pass


class DefectiveNumerics(NumericAmbiguity):
    pass


class ResonanceAmbiguity(NumericAmbiguity):
    pass


# Limits (exit 4)

class LimitExceeded(PolyaError, RuntimeError):
    exit_code = 4
    kind = "limit"


class BasisCapExceeded(LimitExceeded):
    pass


class ScaleOverflow(LimitExceeded):
    pass
