"""Transition operator on polynomials in the Jordan forms, and reduced polynomials.

For a polynomial f, ``Phi(f)(v) = sum_k l_k(v) (f(v + w_k) - f(v))``; in
u-coordinates ``l_k = sum_j V[k, j] u_j`` and ``u_i(v + w_k) = u_i + C[i, k]``
with ``C[i, k] = u_i(w_k)``.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

import numpy as np
from scipy.special import stirling2

from .errors import BasisCapExceeded, ResonanceAmbiguity
from .process import ProcessSpec
from .spectral import SpectralData, classify_power
from .upoly import UPolynomial, count_up_to, indices_up_to, order_key

BASIS_CAP = 20_000
RESONANCE_BAND = 1e3


class TransitionOperator:
    """Memoized action of Phi and of its derivation part on u-monomials."""

    def __init__(self, spec: ProcessSpec, spectral: SpectralData):
        self.spec = spec
        self.spectral = spectral
        s = spectral.dimension
        self.s = s
        W = np.array(spec.replacement, dtype=object)  # rows w_k in canonical coordinates
        U = spectral.forms
        if spectral.exact:
            C = U.dot(W.T)
        else:
            C = U.dot(np.array(W, dtype=complex).T)
        self.shift = [[_scalar(C[i, k], spectral.exact) for k in range(s)] for i in range(s)]
        V = spectral.duals
        self.propensity = [[_scalar(V[k, j], spectral.exact) for j in range(s)] for k in range(s)]
        self._cache: dict = {}
        self._one = Fraction(1) if spectral.exact else 1 + 0j

    def image(self, beta: Sequence[int]) -> dict:
        """Coefficients of Phi(u^beta)."""
        beta = tuple(beta)
        hit = self._cache.get(beta)
        if hit is not None:
            return hit
        s = self.s
        out: dict = {}
        for k in range(s):
            factors = []
            for i in range(s):
                c = self.shift[i][k]
                b = beta[i]
                if c == 0 or b == 0:
                    factors.append([(b, self._one)])
                else:
                    factors.append([(t, comb(b, t) * c ** (b - t)) for t in range(b + 1)])
            expansion = []
            for combo in itertools.product(*factors):
                t = tuple(x[0] for x in combo)
                if t == beta:
                    continue
                coef = self._one
                for x in combo:
                    coef = coef * x[1]
                expansion.append((t, coef))
            if not expansion:
                continue
            for j in range(s):
                lk = self.propensity[k][j]
                if lk == 0:
                    continue
                for t, coef in expansion:
                    key = t[:j] + (t[j] + 1,) + t[j + 1:]
                    out[key] = out.get(key, 0) + lk * coef
        out = {a: c for a, c in out.items() if c != 0}
        self._cache[beta] = out
        return out

    def apply(self, f: UPolynomial) -> UPolynomial:
        out: dict = {}
        for beta, c in f.terms.items():
            for a, d in self.image(beta).items():
                out[a] = out.get(a, 0) + c * d
        return UPolynomial(self.s, out)

    def partial(self, f: UPolynomial) -> UPolynomial:
        """The derivation with u_k -> lambda_k u_k + eps_k u_{k-1}."""
        lam = self.spectral.eigenvalues
        eps = self.spectral.eps
        out: dict = {}
        for beta, c in f.terms.items():
            for k, b in enumerate(beta):
                if not b:
                    continue
                out[beta] = out.get(beta, 0) + c * b * lam[k]
                if eps[k]:
                    key = list(beta)
                    key[k] -= 1
                    key[k - 1] += 1
                    key = tuple(key)
                    out[key] = out.get(key, 0) + c * b
        return UPolynomial(self.s, out)


def _scalar(x, exact: bool):
    return Fraction(x) if exact else complex(x)


def phi_apply(f: UPolynomial, spec: ProcessSpec, spectral: SpectralData) -> UPolynomial:
    return TransitionOperator(spec, spectral).apply(f)


def phi_partial_apply(f: UPolynomial, spectral: SpectralData) -> UPolynomial:
    op = TransitionOperator.__new__(TransitionOperator)
    op.spectral, op.s = spectral, spectral.dimension
    return TransitionOperator.partial(op, f)


@dataclass
class PhiMatrix:
    """Matrix of Phi on the span of u^beta, beta <= alpha, in increasing order."""

    basis: list
    index: dict
    columns: list  # list of dict row-index -> coefficient

    @classmethod
    def build(cls, alpha: Sequence[int], op: TransitionOperator, cap: int = BASIS_CAP) -> "PhiMatrix":
        n = count_up_to(alpha)
        if n > cap:
            raise BasisCapExceeded(f"basis of size {n} exceeds the cap of {cap}")
        basis = indices_up_to(alpha)
        index = {b: i for i, b in enumerate(basis)}
        sd = op.spectral
        cols = []
        for j, b in enumerate(basis):
            img = op.image(b)
            thr = 0 if sd.exact else sd.tol * max(1.0, max((abs(c) for c in img.values()), default=0.0))
            col = {}
            for a, c in img.items():
                i = index.get(a)
                if i is None or i > j:
                    if abs(c) <= thr:
                        continue
                    raise AssertionError(f"Phi(u^{b}) leaves the stable span at {a}")
                col[i] = c
            cols.append(col)
        return cls(basis, index, cols)

    def __len__(self):
        return len(self.basis)

    def vector(self, f: UPolynomial, exact: bool) -> list:
        zero = Fraction(0) if exact else 0j
        v = [zero] * len(self.basis)
        for a, c in f.terms.items():
            if a not in self.index:
                raise ValueError(f"monomial {a} outside the basis")
            v[self.index[a]] = c
        return v

    def apply_vector(self, v: list) -> list:
        out = [0] * len(v)
        for j, x in enumerate(v):
            if x == 0:
                continue
            for i, c in self.columns[j].items():
                out[i] += c * x
        return out

    def is_upper_triangular(self) -> bool:
        return all(i <= j for j, col in enumerate(self.columns) for i in col)

    def diagonal(self) -> list:
        return [col.get(j, 0) for j, col in enumerate(self.columns)]

    def to_csr(self):
        """CSR arrays (indptr, indices, data) with complex data."""
        indptr = [0]
        indices, data = [], []
        rows: list[list] = [[] for _ in self.basis]
        for j, col in enumerate(self.columns):
            for i, c in col.items():
                rows[i].append((j, complex(c)))
        for row in rows:
            row.sort()
            for j, c in row:
                indices.append(j)
                data.append(c)
            indptr.append(len(indices))
        return (np.array(indptr, dtype=np.int64), np.array(indices, dtype=np.int64),
                np.array(data, dtype=np.complex128))


class ReducedTable:
    """Inductive computation of the reduced polynomials Q_alpha.

    ``q[alpha][beta]`` and ``p[alpha][beta]`` hold the nonzero scalars with
    ``Q_alpha = u^alpha - sum q Q_beta`` and
    ``(Phi - <alpha, lambda>) Q_alpha = sum p Q_beta``.
    """

    def __init__(self, spec: ProcessSpec, spectral: SpectralData, cap: int = BASIS_CAP):
        self.spec = spec
        self.spectral = spectral
        self.op = TransitionOperator(spec, spectral)
        self.cap = cap
        self.exact = spectral.exact
        self.tol = spectral.tol
        self.s = spectral.dimension
        self.Q: dict = {}
        self.q: dict = {}
        self.p: dict = {}
        self.r: dict = {}
        self._done: list = []

    # resonance ----------------------------------------------------------

    def resonant(self, alpha, beta) -> bool:
        sd = self.spectral
        if self.exact:
            return sd.pairing(alpha) == sd.pairing(beta)
        if sd.class_counts(alpha) == sd.class_counts(beta):
            return True
        za, zb = sd.pairing(alpha), sd.pairing(beta)
        scale = 1.0 + sum(a * abs(l) for a, l in zip(alpha, sd.eigenvalues))
        d = abs(za - zb)
        if d <= self.tol * scale:
            return True
        if d <= self.tol * scale * RESONANCE_BAND:
            raise ResonanceAmbiguity(
                f"<{alpha},lambda> and <{beta},lambda> differ by {d:.2e}, too close to decide")
        return False

    # induction ----------------------------------------------------------

    def reduced(self, alpha: Sequence[int]) -> UPolynomial:
        alpha = tuple(int(a) for a in alpha)
        if len(alpha) != self.s:
            raise ValueError(f"multi-index must have {self.s} entries")
        if alpha in self.Q:
            return self.Q[alpha]
        n = count_up_to(alpha)
        if n > self.cap:
            raise BasisCapExceeded(f"basis of size {n} exceeds the cap of {self.cap}")
        for beta in indices_up_to(alpha):
            if beta not in self.Q:
                self._compute(beta)
        return self.Q[alpha]

    def q_coordinates(self, f: UPolynomial) -> dict:
        """Coefficients of f in the basis (Q_beta)."""
        for gamma in f.terms:
            if gamma not in self.Q:
                self.reduced(gamma)
        return self._expand_monomials(f)

    def _expand_monomials(self, f: UPolynomial) -> dict:
        out: dict = {}
        for gamma, c in f.terms.items():
            out[gamma] = out.get(gamma, 0) + c
            for beta, qv in self.q[gamma].items():
                out[beta] = out.get(beta, 0) + c * qv
        return {b: c for b, c in out.items() if c != 0}

    def _zero_threshold(self, values) -> float:
        m = max((abs(v) for v in values), default=0.0)
        return self.tol * max(1.0, m)

    def _compute(self, alpha: tuple) -> None:
        sd = self.spectral
        a = sd.pairing(alpha)
        mono = UPolynomial.monomial(alpha, Fraction(1) if self.exact else 1 + 0j)
        g = self.op.apply(mono) - mono * a
        key = order_key(alpha)
        upper = {b: c for b, c in g.terms.items() if order_key(b) >= key}
        if upper:
            # only rounding noise may sit at or above alpha
            if self.exact or max(abs(c) for c in upper.values()) > self._zero_threshold(g.terms.values()):
                raise AssertionError(f"Phi - <alpha,lambda> must lower the order of u^{alpha}")
            g = UPolynomial(self.s, {b: c for b, c in g.terms.items() if b not in upper})
        # u^gamma = Q_gamma + sum_beta q[gamma][beta] Q_beta
        r = self._expand_monomials(g)
        thr = 0 if self.exact else self._zero_threshold(r.values())
        r = {b: c for b, c in r.items() if abs(c) > thr}
        q_row: dict = {}
        p_row: dict = {}
        acc: dict = {}
        heap = [(_neg_key(b), b) for b in r]
        heapq.heapify(heap)
        seen = set(r)
        while heap:
            _, beta = heapq.heappop(heap)
            val = r.get(beta, 0) - acc.get(beta, 0)
            if abs(val) <= thr:
                continue
            if self.resonant(alpha, beta):
                p_row[beta] = val
                continue
            qv = val / (sd.pairing(beta) - a)
            q_row[beta] = qv
            for gamma, pv in self.p[beta].items():
                acc[gamma] = acc.get(gamma, 0) + qv * pv
                if gamma not in seen:
                    seen.add(gamma)
                    heapq.heappush(heap, (_neg_key(gamma), gamma))
        Qa = mono
        for beta, qv in q_row.items():
            Qa = Qa - self.Q[beta] * qv
        if not self.exact:
            Qa = Qa.prune(self.tol * 1e-3 * max(1.0, Qa.max_abs()))
        self.Q[alpha] = Qa
        self.q[alpha] = q_row
        self.p[alpha] = p_row
        self.r[alpha] = r
        self._done.append(alpha)

    # derived quantities ---------------------------------------------------

    def shifted_power(self, f: UPolynomial, z, times: int, partial: bool = False) -> UPolynomial:
        for _ in range(times):
            f = (self.op.partial(f) if partial else self.op.apply(f)) - f * z
            if not self.exact:
                f = f.prune(self.tol * 1e-3)
        return f

    def nilpotence_by_iteration(self, alpha, partial: bool = False) -> int:
        """Smallest nu with (Phi - <alpha,lambda>)^(nu+1) killing Q_alpha.

        With ``partial=True`` the derivation part is iterated on u^alpha.
        """
        alpha = tuple(alpha)
        z = self.spectral.pairing(alpha)
        if partial:
            f = UPolynomial.monomial(alpha, Fraction(1) if self.exact else 1 + 0j)
        else:
            f = self.reduced(alpha)
        thr = self.tol * 1e2 * max(1.0, f.max_abs())
        bound = count_up_to(alpha) + 1
        for nu in range(bound + 1):
            f = (self.op.partial(f) if partial else self.op.apply(f)) - f * z
            if f.is_zero(0 if self.exact else thr):
                return nu
        raise AssertionError("operator is not nilpotent on the generalized eigenspace")


def _neg_key(beta) -> tuple:
    d, rev = order_key(beta)
    return (-d, tuple(-x for x in rev))


def reduced_polynomial(alpha: Sequence[int], spec: ProcessSpec, spectral: SpectralData,
                       table: ReducedTable | None = None) -> UPolynomial:
    table = table or ReducedTable(spec, spectral)
    return table.reduced(alpha)


def monogenic_nu(alpha: Sequence[int], spectral: SpectralData) -> int:
    """Closed form for powers supported in one block: sum of (position in block) * exponent."""
    support = [k for k, a in enumerate(alpha) if a]
    if not support:
        return 0
    block = spectral.block_of(support[0] + 1)
    if any(k + 1 not in block.indices for k in support):
        raise ValueError("multi-index is not supported in a single block")
    return sum((k + 1 - block.start) * alpha[k] for k in support)


def nilpotence_index(alpha: Sequence[int], table: ReducedTable) -> int:
    """nu_alpha, using the cheapest valid route.

    Large powers iterate the derivation part on u^alpha (and monogenic
    ones are cross-checked against the closed form); other powers iterate
    Phi on Q_alpha.
    """
    pc = classify_power(alpha, table.spectral)
    if not pc.large_power:
        return table.nilpotence_by_iteration(alpha)
    nu = table.nilpotence_by_iteration(alpha, partial=True)
    if pc.monogenic_power and nu != monogenic_nu(alpha, table.spectral):
        raise AssertionError(f"nilpotence index {nu} disagrees with the block closed form")
    return nu


def rising_factorial_poly(s: int, k: int, p: int, step=Fraction(1)) -> UPolynomial:
    """u_k (u_k + step) ... (u_k + (p-1) step)."""
    out = UPolynomial.constant(s)
    uk = UPolynomial.variable(s, k)
    for j in range(p):
        out = out * (uk + step * j)
    return out


def stirling_inversion(p: int, s: int) -> dict:
    """u_1^p as a combination of the Q_{k delta_1}: signed Stirling numbers of the second kind."""
    return {tuple(k if i == 0 else 0 for i in range(s)):
            Fraction((-1) ** (p - k) * int(stirling2(p, k, exact=True)))
            for k in range(1, p + 1)} if p else {(0,) * s: Fraction(1)}
