"""Process definition, validation and urn standardization."""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    BalanceViolation,
    InitializationViolation,
    SpecError,
    TenabilityViolation,
    ValidationError,
)
from .scalars import arithmetic_mode, format_scalar, fraction_gcd, parse_scalar

FLOAT_BALANCE_TOL = 1e-12


class FloatTenabilityUnknown(UserWarning):
    """Raised as a warning: divisibility of real numbers cannot be decided with floats."""


def _row(values) -> tuple:
    return tuple(parse_scalar(v) for v in values)


@dataclass(frozen=True)
class ProcessSpec:
    """A balanced Pólya process in canonical form.

    ``replacement[k]`` is the increment ``w_k`` written in the coordinates
    given by the forms, so ``replacement[k][j] = l_j(w_k)``; ``initial`` is
    ``X1`` in the same coordinates.  Specs given with arbitrary forms are
    reduced to this form by :func:`canonicalize`.
    """

    replacement: tuple
    initial: tuple
    name: str = "custom"
    parameters: dict = field(default_factory=dict, compare=False)
    tenability_waived: bool = False

    def __post_init__(self):
        rows = tuple(_row(r) for r in self.replacement)
        init = _row(self.initial)
        s = len(rows)
        if s == 0:
            raise SpecError("dimension must be at least 1")
        if any(len(r) != s for r in rows):
            raise SpecError("replacement matrix must be square")
        if len(init) != s:
            raise SpecError(f"initial vector has length {len(init)}, expected {s}")
        arithmetic_mode([*init, *(x for r in rows for x in r)])
        object.__setattr__(self, "replacement", rows)
        object.__setattr__(self, "initial", init)

    @property
    def dimension(self) -> int:
        return len(self.initial)

    @property
    def arithmetic(self) -> str:
        return arithmetic_mode([*self.initial, *(x for r in self.replacement for x in r)])

    @property
    def exact(self) -> bool:
        return self.arithmetic == "exact"

    @property
    def tau1(self):
        return sum(self.initial, Fraction(0) if self.exact else 0.0)

    def column(self, k: int) -> tuple:
        """Entries ``l_k(w_j)`` for all j (0-based k)."""
        return tuple(r[k] for r in self.replacement)

    def with_waiver(self, waived: bool = True) -> "ProcessSpec":
        return ProcessSpec(self.replacement, self.initial, self.name, dict(self.parameters), waived)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": {k: format_scalar(v) if not isinstance(v, (int, str)) else v
                           for k, v in self.parameters.items()},
            "dimension": self.dimension,
            "replacement_matrix": [[format_scalar(x) for x in r] for r in self.replacement],
            "initial": [format_scalar(x) for x in self.initial],
            "tau1": format_scalar(self.tau1),
            "arithmetic": self.arithmetic,
            "tenability_waived": self.tenability_waived,
        }


@dataclass(frozen=True)
class Violation:
    condition: str
    detail: str
    index: int | None = None


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: tuple
    tenability_waived: bool
    warnings: tuple = ()

    def raise_for_status(self) -> None:
        if self.valid:
            return
        first = next(v for v in self.violations if not (self.tenability_waived and v.condition.startswith("3")))
        cls = {"1": InitializationViolation, "2": BalanceViolation}.get(first.condition, TenabilityViolation)
        err = cls(first.detail)
        err.violations = self.violations
        raise err

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "tenability_waived": self.tenability_waived,
            "violations": [{"condition": v.condition, "detail": v.detail, "index": v.index}
                           for v in self.violations],
            "warnings": list(self.warnings),
        }


def validate_process(spec: ProcessSpec, waive_tenability: bool | None = None) -> ValidationReport:
    """Check initialization, balance and the two sufficient tenability conditions."""
    if waive_tenability is None:
        waive_tenability = spec.tenability_waived
    s = spec.dimension
    R = spec.replacement
    X1 = spec.initial
    exact = spec.exact
    out: list[Violation] = []
    notes: list[str] = []

    if all(x == 0 for x in X1):
        out.append(Violation("1", "initial vector is zero"))
    for k, x in enumerate(X1):
        if x < 0:
            out.append(Violation("1", f"l_{k + 1}(X1) = {x} is negative", k + 1))

    for k, row in enumerate(R):
        total = sum(row)
        bad = total != 1 if exact else abs(total - 1) > FLOAT_BALANCE_TOL
        if bad:
            out.append(Violation("2", f"row {k + 1} sums to {total}, expected 1", k + 1))

    for k in range(s):
        for kp in range(s):
            if kp != k and R[kp][k] < 0:
                out.append(Violation(
                    "3.a", f"off-diagonal entry l_{k + 1}(w_{kp + 1}) = {R[kp][k]} is negative", k + 1))

    for k in range(s):
        diag = R[k][k]
        if diag >= 0:
            continue
        if not exact:
            msg = f"lattice condition for form {k + 1} cannot be decided in float mode"
            notes.append(msg)
            warnings.warn(msg, FloatTenabilityUnknown, stacklevel=2)
            continue
        g = fraction_gcd([X1[k], *spec.column(k)])
        if g != abs(diag):
            out.append(Violation(
                "3.b", f"lattice generated by l_{k + 1}(X1) and column {k + 1} is {g}Z, not {abs(diag)}Z", k + 1))

    fatal = [v for v in out if not (waive_tenability and v.condition.startswith("3"))]
    return ValidationReport(not fatal, tuple(out), bool(waive_tenability), tuple(notes))


def standardize_urn(R: Sequence[Sequence], U1: Sequence, *, name: str = "urn",
                    parameters: dict | None = None, balance=None) -> ProcessSpec:
    """Divide a balanced urn by its common row sum ``S``."""
    rows = [_row(r) for r in R]
    init = _row(U1)
    if not rows:
        raise SpecError("empty replacement matrix")
    sums = [sum(r) for r in rows]
    exact = arithmetic_mode([*init, *(x for r in rows for x in r)]) == "exact"
    S = sums[0] if balance is None else parse_scalar(balance)
    for k, t in enumerate(sums):
        same = t == S if exact else abs(t - S) <= FLOAT_BALANCE_TOL * max(1.0, abs(S))
        if not same:
            raise BalanceViolation(f"row {k + 1} sums to {t}, expected common sum {S}")
    if S == 0:
        raise BalanceViolation("common row sum is zero (degenerate urn)")
    return ProcessSpec(tuple(tuple(x / S for x in r) for r in rows),
                       tuple(x / S for x in init), name, dict(parameters or {}))


def canonicalize(increments, forms, initial, **kwargs) -> ProcessSpec:
    """Rewrite a process given by arbitrary forms ``l_k`` and increments ``w_k``
    in the coordinates defined by the forms."""
    W = [_row(w) for w in increments]
    L = [_row(f) for f in forms]
    X = _row(initial)
    s = len(L)
    if len(W) != s or any(len(v) != s for v in (*W, *L)) or len(X) != s:
        raise SpecError("forms, increments and initial vector must all have dimension s")
    from . import linalg  # local import keeps this module light

    if linalg.rank([list(r) for r in L], exact=arithmetic_mode([x for r in L for x in r]) == "exact") < s:
        raise SpecError("forms are not linearly independent")
    rows = tuple(tuple(sum(L[j][i] * W[k][i] for i in range(s)) for j in range(s)) for k in range(s))
    init = tuple(sum(L[j][i] * X[i] for i in range(s)) for j in range(s))
    return ProcessSpec(rows, init, **kwargs)


def spec_from_mapping(data: dict, *, name: str = "file") -> ProcessSpec:
    """Build a spec from the parsed contents of a process spec file."""
    try:
        R = data["replacement_matrix"]
        X = data["initial"]
    except KeyError as exc:
        raise SpecError(f"missing field {exc.args[0]!r}") from None
    s = data.get("dimension", len(R))
    if s != len(R):
        raise SpecError(f"field 'dimension' is {s} but replacement_matrix has {len(R)} rows")
    for i, row in enumerate(R):
        if len(row) != s:
            raise SpecError(f"replacement_matrix row {i + 1} has {len(row)} entries, expected {s}")
    if "forms" in data and data["forms"] is not None:
        spec = canonicalize(R, data["forms"], X, name=name)
        if "balance" in data and data["balance"] is not None:
            raise SpecError("'balance' applies to urn specs without explicit forms")
        return spec
    if data.get("balance") is not None:
        return standardize_urn(R, X, name=name, balance=data["balance"])
    sums = [sum(_row(r)) for r in R]
    if all(t == sums[0] for t in sums) and sums[0] not in (0, 1):
        return standardize_urn(R, X, name=name)
    return ProcessSpec(tuple(tuple(r) for r in R), tuple(X), name)


def load_spec_file(path) -> ProcessSpec:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise SpecError(f"{path}: expected a JSON object at top level")
    return spec_from_mapping(data, name=str(path))


def require_valid(spec: ProcessSpec, waive_tenability: bool | None = None) -> ValidationReport:
    report = validate_process(spec, waive_tenability)
    report.raise_for_status()
    return report


__all__ = [
    "FloatTenabilityUnknown",
    "ProcessSpec",
    "ValidationError",
    "ValidationReport",
    "Violation",
    "canonicalize",
    "load_spec_file",
    "require_valid",
    "spec_from_mapping",
    "standardize_urn",
    "validate_process",
]
