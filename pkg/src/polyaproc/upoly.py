"""Sparse polynomials in the Jordan forms u_1..u_s and the degree-antialphabetical order."""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .scalars import format_scalar

MultiIndex = tuple


def order_key(alpha: Sequence[int]) -> tuple:
    """Sort key realizing the degree-antialphabetical order.

    Lower total degree comes first; on ties the exponent with the highest
    index decides, so ``d1 < d2 < ... < ds < 2*d1``.
    """
    return (sum(alpha), tuple(reversed(alpha)))


def order_compare(alpha: Sequence[int], beta: Sequence[int]) -> int:
    ka, kb = order_key(alpha), order_key(beta)
    return (ka > kb) - (ka < kb)


def delta(s: int, k: int) -> MultiIndex:
    """Unit multi-index for the 1-based variable k."""
    return tuple(int(i == k - 1) for i in range(s))


def add(alpha, beta) -> MultiIndex:
    return tuple(a + b for a, b in zip(alpha, beta))


@lru_cache(maxsize=None)
def indices_of_degree(s: int, d: int) -> tuple:
    """All multi-indices of length s and degree d, increasing in the order."""
    out = []
    for cut in itertools.combinations(range(d + s - 1), s - 1):
        prev = -1
        parts = []
        for c in cut:
            parts.append(c - prev - 1)
            prev = c
        parts.append(d + s - 2 - prev)
        out.append(tuple(parts))
    return tuple(sorted(out, key=order_key))


def indices_up_to(alpha: Sequence[int]) -> list:
    """All beta <= alpha, increasing."""
    alpha = tuple(alpha)
    s, d = len(alpha), sum(alpha)
    out = []
    for e in range(d):
        out.extend(indices_of_degree(s, e))
    key = order_key(alpha)
    out.extend(b for b in indices_of_degree(s, d) if order_key(b) <= key)
    return out


def count_up_to(alpha: Sequence[int]) -> int:
    """Size of the space spanned by u^beta for beta <= alpha, without enumerating it."""
    from math import comb

    s, d = len(alpha), sum(alpha)
    lower = comb(d - 1 + s, s) if d else 0
    key = order_key(alpha)
    return lower + sum(1 for b in indices_of_degree(s, d) if order_key(b) <= key)


def parse_multi_index(text: str, s: int | None = None) -> MultiIndex:
    body = str(text).replace(" ", "").strip("()[]")
    parts = [p for p in body.split(",") if p != ""]
    try:
        alpha = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"bad multi-index {text!r}") from None
    if any(a < 0 for a in alpha):
        raise ValueError(f"multi-index entries must be nonnegative: {text!r}")
    if s is not None and len(alpha) != s:
        raise ValueError(f"multi-index {text!r} must have {s} entries")
    return alpha


class UPolynomial:
    """Immutable sparse polynomial; exponent tuples map to coefficients.

    Coefficients may be :class:`Fraction`, float or complex.  Exact zeros are
    dropped on construction; use :meth:`prune` for numerical noise.
    """

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        clean = {}
        for alpha, c in items:
            alpha = tuple(alpha)
            if len(alpha) != nvars:
                raise ValueError(f"exponent {alpha} does not have {nvars} entries")
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
                if clean[alpha] == 0:
                    del clean[alpha]
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("UPolynomial is immutable")

    @classmethod
    def monomial(cls, alpha: Sequence[int], coef=Fraction(1)) -> "UPolynomial":
        return cls(len(alpha), {tuple(alpha): coef})

    @classmethod
    def constant(cls, nvars: int, c=Fraction(1)) -> "UPolynomial":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def variable(cls, nvars: int, k: int, coef=Fraction(1)) -> "UPolynomial":
        return cls(nvars, {delta(nvars, k): coef})

    @classmethod
    def zero(cls, nvars: int) -> "UPolynomial":
        return cls(nvars)

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other) -> "UPolynomial":
        if isinstance(other, UPolynomial):
            if other.nvars != self.nvars:
                raise ValueError("polynomials live in different numbers of variables")
            return other
        return UPolynomial.constant(self.nvars, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0) + c
        return UPolynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return UPolynomial(self.nvars, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, UPolynomial):
            if other == 0:
                return UPolynomial(self.nvars)
            return UPolynomial(self.nvars, {a: c * other for a, c in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                k = add(a, b)
                out[k] = out.get(k, 0) + c * d
        return UPolynomial(self.nvars, out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return UPolynomial(self.nvars, {a: c / scalar for a, c in self.terms.items()})

    def __pow__(self, p: int):
        if p < 0:
            raise ValueError("negative power")
        out = UPolynomial.constant(self.nvars)
        base = self
        while p:
            if p & 1:
                out = out * base
            base = base * base
            p >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, UPolynomial):
            return self.nvars == other.nvars and self.terms == other.terms
        return self == self._coerce(other)

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_terms())

    def __repr__(self):
        return f"UPolynomial({self.to_text()})"

    # queries ------------------------------------------------------------

    def coefficient(self, alpha: Sequence[int]):
        return self.terms.get(tuple(alpha), 0)

    def support(self) -> list:
        return sorted(self.terms, key=order_key)

    def sorted_terms(self) -> list:
        """Terms in decreasing order."""
        return sorted(self.terms.items(), key=lambda t: order_key(t[0]), reverse=True)

    def leading(self) -> MultiIndex | None:
        return max(self.terms, key=order_key) if self.terms else None

    def degree(self) -> int:
        return max((sum(a) for a in self.terms), default=-1)

    def is_zero(self, tol: float = 0.0) -> bool:
        return all(abs(c) <= tol for c in self.terms.values())

    def prune(self, tol: float) -> "UPolynomial":
        return UPolynomial(self.nvars, {a: c for a, c in self.terms.items() if abs(c) > tol})

    def max_abs(self) -> float:
        return max((abs(complex(c)) for c in self.terms.values()), default=0.0)

    def almost_equal(self, other: "UPolynomial", tol: float) -> bool:
        return (self - other).max_abs() <= tol * max(1.0, self.max_abs())

    def map_coefficients(self, fn) -> "UPolynomial":
        return UPolynomial(self.nvars, {a: fn(c) for a, c in self.terms.items()})

    def to_complex(self) -> "UPolynomial":
        return self.map_coefficients(complex)

    def evaluate(self, values: Sequence):
        """Evaluate at given values of u_1..u_s."""
        total = 0
        for alpha, c in self.terms.items():
            term = c
            for v, a in zip(values, alpha):
                if a:
                    term = term * v ** a
            total = total + term
        return total

    def substitute_linear(self, M) -> "UPolynomial":
        """Substitute x_i -> sum_k M[i][k] y_k."""
        n = len(M)
        cols = len(M[0])
        lin = [UPolynomial(cols, {delta(cols, k + 1): M[i][k] for k in range(cols)}) for i in range(n)]
        cache: dict = {}
        out = UPolynomial(cols)
        for alpha, c in self.terms.items():
            term = UPolynomial.constant(cols, c)
            for i, a in enumerate(alpha):
                if a:
                    if (i, a) not in cache:
                        cache[(i, a)] = lin[i] ** a
                    term = term * cache[(i, a)]
            out = out + term
        return out

    def to_text(self, name: str = "u") -> str:
        if not self.terms:
            return "0"
        pieces = []
        for alpha, c in self.sorted_terms():
            mono = "·".join(f"{name}{i + 1}" + (f"^{a}" if a > 1 else "") for i, a in enumerate(alpha) if a)
            coef = _coef_text(c)
            if mono:
                if coef == "1":
                    piece = mono
                elif coef == "-1":
                    piece = "-" + mono
                else:
                    piece = f"{coef}·{mono}"
            else:
                piece = coef
            pieces.append(piece)
        text = " + ".join(pieces)
        return text.replace("+ -", "- ")

    def to_dict(self) -> list:
        return [{"exponent": list(a), "coefficient": format_scalar(c)} for a, c in self.sorted_terms()]

    @classmethod
    def from_dict(cls, nvars: int, items: list) -> "UPolynomial":
        from .scalars import parse_scalar

        terms = {}
        for it in items:
            c = it["coefficient"]
            c = complex(*c) if isinstance(c, list) else parse_scalar(c)
            terms[tuple(it["exponent"])] = c
        return cls(nvars, terms)


def _coef_text(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    if isinstance(c, complex):
        if c.imag == 0:
            return f"{c.real:.12g}"
        return f"({c.real:.12g}{c.imag:+.12g}j)"
    if isinstance(c, float):
        return f"{c:.12g}"
    return str(c)


def change_basis(f: UPolynomial, forms) -> UPolynomial:
    """Rewrite a polynomial in the canonical coordinates as a polynomial in the u_k.

    ``forms`` holds the rows u_k; the coordinates satisfy x = V u with
    V the inverse of that matrix.
    """
    from . import linalg

    U = np.asarray(forms)
    exact = U.dtype == object
    V = linalg.inverse(U, exact)
    return f.substitute_linear([[V[i, k] for k in range(V.shape[1])] for i in range(V.shape[0])])


def to_coordinates(f: UPolynomial, forms) -> UPolynomial:
    """Inverse of :func:`change_basis`: substitute u_k = sum_i U[k, i] x_i."""
    U = np.asarray(forms)
    return f.substitute_linear([[U[k, i] for i in range(U.shape[1])] for k in range(U.shape[0])])


def evaluate_at(f: UPolynomial, forms, point: Sequence):
    """Evaluate a u-polynomial at a point given in canonical coordinates."""
    U = np.asarray(forms)
    s = U.shape[0]
    vals = [sum(U[k, i] * point[i] for i in range(s)) for k in range(s)]
    return f.evaluate(vals)
