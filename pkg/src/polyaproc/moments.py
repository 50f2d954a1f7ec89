"""Finite-time moments, the gamma polynomials, asymptotic constants and limit moments."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.special import loggamma

from . import _kernels
from .errors import SmallProcess, SupportViolation, UnsupportedPower
from .operator import PhiMatrix, ReducedTable, nilpotence_index
from .process import ProcessSpec
from .scalars import format_scalar
from .spectral import SpectralData, classify_power, classify_process
from .upoly import UPolynomial, order_key

LOG_GAMMA_THRESHOLD = 64


def _is_exact(x) -> bool:
    return isinstance(x, (Fraction, int)) and not isinstance(x, bool)


def _nonpositive_integer(w) -> bool:
    w = complex(w) if not _is_exact(w) else w
    if _is_exact(w):
        return Fraction(w).denominator == 1 and w <= 0
    return w.imag == 0 and w.real <= 0 and float(w.real).is_integer()


def gamma_product(tau1, n: int, z):
    """prod_{k=1}^{n-1} (1 + z/(k + tau1 - 1)), exact for rational inputs."""
    if n < 1:
        raise ValueError("n must be at least 1")
    exact = _is_exact(tau1) and _is_exact(z)
    acc = Fraction(1) if exact else 1 + 0j
    for k in range(1, n):
        d = k + tau1 - 1
        acc = acc * (1 + z / d) if exact else acc * (1 + complex(z) / float(d))
    return acc


def gamma_quotient(tau1, n: int, z) -> complex:
    """Gamma(tau1)/Gamma(tau1+z) * Gamma(n+tau1-1+z)/Gamma(n+tau1-1) via log-gamma."""
    t = float(tau1)
    z = complex(z)
    top = n + t - 1
    if _nonpositive_integer(t + z):
        # 1/Gamma(tau1+z) = 0 unless the numerator pole cancels it
        m = -int(round((t + z).real))
        if m <= n - 2:
            return 0j
        return complex(gamma_product(tau1, n, z))
    if _nonpositive_integer(top + z):
        return complex(gamma_product(tau1, n, z))
    val = loggamma(t) - loggamma(t + z) + loggamma(top + z) - loggamma(top)
    return complex(cmath.exp(val))


def gamma_eval(tau1, n: int, z):
    """The polynomial gamma_{tau1,n} evaluated at z.

    Rational inputs give an exact :class:`Fraction`.  Otherwise the literal
    product is used below ``LOG_GAMMA_THRESHOLD`` and the Gamma quotient
    above it; real inputs give a float.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if _is_exact(tau1) and _is_exact(z):
        return gamma_product(Fraction(tau1), n, Fraction(z))
    val = gamma_product(tau1, n, z) if n < LOG_GAMMA_THRESHOLD else gamma_quotient(tau1, n, z)
    if not isinstance(z, complex) or complex(z).imag == 0:
        return float(val.real)
    return val


def gamma_ratio(tau1, z):
    """Gamma(tau1)/Gamma(tau1+z) with 1/Gamma at nonpositive integers equal to 0.

    Exact (a Fraction) when tau1 is rational and z a nonnegative integer.
    """
    if _is_exact(tau1) and _is_exact(z) and Fraction(z).denominator == 1 and z >= 0:
        out = Fraction(1)
        for j in range(int(z)):
            out /= tau1 + j
        return out
    if _nonpositive_integer(float(tau1) + complex(z)):
        return 0j
    return complex(cmath.exp(loggamma(float(tau1)) - loggamma(float(tau1) + complex(z))))


# ---------------------------------------------------------------------------
# exact finite-time moments


def _as_list(n) -> tuple[list, bool]:
    if isinstance(n, Iterable) and not isinstance(n, (str, bytes)):
        return [int(x) for x in n], True
    return [int(n)], False


def exact_moment(f: UPolynomial, n, table: ReducedTable, arithmetic: str = "auto"):
    """E f(X_n) by iterating g <- g + Phi(g)/(k + tau1 - 1) and evaluating at X1.

    ``f`` is a polynomial in the u-coordinates.  ``arithmetic`` is
    ``"exact"`` (Fractions), ``"float"`` (complex128 kernel) or ``"auto"``
    (exact when the spectral data are exact and max n <= 2000).
    ``n`` may be an integer or an iterable of integers.
    """
    ns, many = _as_list(n)
    if any(x < 1 for x in ns):
        raise ValueError("n must be at least 1")
    sd = table.spectral
    if not f.terms:
        zero = Fraction(0) if sd.exact else 0j
        return [zero] * len(ns) if many else zero
    top = max(f.terms, key=order_key)
    mat = PhiMatrix.build(top, table.op, table.cap)
    x1 = sd.forms_at(table.spec.initial)
    tau1 = table.spec.tau1
    if arithmetic == "auto":
        arithmetic = "exact" if sd.exact and max(ns) <= 2000 else "float"
    if arithmetic == "exact":
        if not sd.exact:
            raise ValueError("exact arithmetic needs exact spectral data")
        vals = _iterate_exact(mat, mat.vector(f, True), x1, tau1, ns)
    else:
        vals = _iterate_float(mat, f, x1, tau1, ns)
    return vals if many else vals[0]


def _eval_vector(basis, x1) -> list:
    out = []
    for beta in basis:
        v = 1
        for x, b in zip(x1, beta):
            if b:
                v = v * x ** b
        out.append(v)
    return out


def _iterate_exact(mat: PhiMatrix, g: list, x1, tau1, ns) -> list:
    e = _eval_vector(mat.basis, x1)
    order = sorted(set(ns))
    found = {}
    k = 1
    for target in order:
        while k < target:
            img = mat.apply_vector(g)
            d = k + tau1 - 1
            g = [a + b / d for a, b in zip(g, img)]
            k += 1
        found[target] = sum(a * b for a, b in zip(e, g) if a and b)
    return [Fraction(found[x]) for x in ns]


def _iterate_float(mat: PhiMatrix, f: UPolynomial, x1, tau1, ns) -> list:
    indptr, indices, data = mat.to_csr()
    g0 = np.array([complex(c) for c in mat.vector(f, False)], dtype=np.complex128)
    e = np.array([complex(v) for v in _eval_vector(mat.basis, x1)], dtype=np.complex128)
    order = np.array(sorted(set(ns)), dtype=np.int64)
    vals = _kernels.moment_iterate(indptr, indices, data, g0, e, float(tau1), order)
    lookup = dict(zip(order.tolist(), vals.tolist()))
    return [lookup[x] for x in ns]


# ---------------------------------------------------------------------------
# asymptotics


@dataclass(frozen=True)
class AsymptoticTerm:
    exponent: object
    log_power: int
    constant: complex | None
    regime: str  # "SmallBound" | "LargeLeading" | "SemisimpleLargeExact"

    def to_dict(self) -> dict:
        return {
            "exponent": format_scalar(self.exponent),
            "log_power": self.log_power,
            "constant": None if self.constant is None else format_scalar(complex(self.constant)),
            "regime": self.regime,
        }


def asymptotic_moment(alpha: Sequence[int], table: ReducedTable) -> AsymptoticTerm:
    """Leading behaviour of E u^alpha(X_n)."""
    alpha = tuple(alpha)
    sd = table.spectral
    pc = classify_power(alpha, sd)
    if pc.large_power:
        z = sd.pairing(alpha)
        nu = nilpotence_index(alpha, table)
        Q = table.reduced(alpha)
        top = table.shifted_power(Q, z, nu)
        val = complex(top.evaluate(sd.forms_at(table.spec.initial)))
        c = complex(gamma_ratio(table.spec.tau1, z)) * val / math.factorial(nu)
        regime = "SemisimpleLargeExact" if pc.semisimple_power and nu == 0 else "LargeLeading"
        return AsymptoticTerm(z, nu, c, regime)
    if pc.small_power:
        coords = table.q_coordinates(UPolynomial.monomial(alpha, Fraction(1) if sd.exact else 1 + 0j))
        nu = max((table.nilpotence_by_iteration(b) for b in coords), default=0)
        return AsymptoticTerm(Fraction(sum(alpha), 2), nu, None, "SmallBound")
    raise UnsupportedPower(f"{alpha} mixes large and small projections")


def expected_vector_asymptote(spec: ProcessSpec, spectral: SpectralData):
    """Projection of X1 on ker(A - 1) and the exponent of the remainder."""
    s = spectral.dimension
    x1 = spectral.forms_at(spec.initial)
    zero = Fraction(0) if spectral.exact else 0j
    vec = [zero] * s
    for k, lam in enumerate(spectral.eigenvalues):
        if lam == 1:
            for i in range(s):
                vec[i] += x1[k] * spectral.duals[i, k]
    rest = [spectral.real(k) for k, lam in enumerate(spectral.eigenvalues) if lam != 1]
    tau = max([*rest, Fraction(0) if spectral.exact else 0.0])
    return vec, tau


def designated_w_indices(spectral: SpectralData) -> list:
    """1-based indices whose limit variables W_k are defined."""
    out = {1}
    for b in spectral.principal_blocks():
        out.add(b.start)
    return sorted(out)


def limit_w_moment(alpha: Sequence[int], table: ReducedTable):
    """E prod W_k^alpha_k = Gamma(tau1)/Gamma(tau1 + <alpha,lambda>) Q_alpha(X1)."""
    alpha = tuple(alpha)
    sd = table.spectral
    if classify_process(sd).size_class != "Large":
        raise SmallProcess("limit variables W_k are only defined for large processes")
    allowed = designated_w_indices(sd)
    bad = [k + 1 for k, a in enumerate(alpha) if a and k + 1 not in allowed]
    if bad:
        raise SupportViolation(f"indices {bad} are not among the designated indices {allowed}")
    z = sd.pairing(alpha)
    q = table.reduced(alpha).evaluate(sd.forms_at(table.spec.initial))
    ratio = gamma_ratio(table.spec.tau1, z)
    if isinstance(ratio, Fraction) and sd.exact:
        return ratio * q
    val = complex(ratio) * complex(q)
    return val.real if val.imag == 0 else val


@dataclass(frozen=True)
class MomentReport:
    alpha: tuple
    ns: tuple
    values: tuple
    asymptotic: AsymptoticTerm | None
    limit_w: complex | None

    def to_dict(self) -> dict:
        return {
            "alpha": list(self.alpha),
            "n": list(self.ns),
            "values": [format_scalar(v) for v in self.values],
            "asymptotic": None if self.asymptotic is None else self.asymptotic.to_dict(),
            "limit_w_moment": None if self.limit_w is None else format_scalar(self.limit_w),
        }


def moment_report(alpha: Sequence[int], ns: Sequence[int], table: ReducedTable,
                  arithmetic: str = "auto") -> MomentReport:
    alpha = tuple(alpha)
    sd = table.spectral
    f = UPolynomial.monomial(alpha, Fraction(1) if sd.exact else 1 + 0j)
    values = exact_moment(f, list(ns), table, arithmetic)
    try:
        asym = asymptotic_moment(alpha, table)
    except UnsupportedPower:
        asym = None
    try:
        lim = limit_w_moment(alpha, table)
    except (SmallProcess, SupportViolation):
        lim = None
    return MomentReport(alpha, tuple(ns), tuple(values), asym, lim)
