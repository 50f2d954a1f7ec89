"""Replacement endomorphism, spectrum, Jordan basis of linear forms and classifications.

Linear forms are stored as coefficient rows in the canonical coordinates of
the process.  The replacement endomorphism ``A`` has matrix ``R^T``, so a
form with coefficient column ``c`` is sent by ``A^T`` to ``R @ c``; Jordan
chains are therefore built for ``R`` acting on columns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import ClusterAmbiguity, DefectiveNumerics, JordanBasisError, UnitRootNotSemisimple
from .process import ProcessSpec
from .scalars import format_scalar, parse_scalar

DEFAULT_TOL = 1e-9
CLUSTER_BAND = 1e4  # clusters closer than tol * CLUSTER_BAND are ambiguous


def build_replacement_endomorphism(spec: ProcessSpec) -> np.ndarray:
    """Matrix of ``A = sum_k l_k (x) w_k`` in the basis dual to the forms."""
    R = np.array(spec.replacement, dtype=object)
    if spec.exact:
        return linalg.as_exact(R.T)
    return R.T.astype(float)


@dataclass(frozen=True)
class Eigenvalue:
    value: object  # Fraction when exact, complex otherwise
    multiplicity: int
    exact: bool


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    exact: bool
    mode: str
    fallback_reason: str | None = None

    def values(self) -> list:
        return [e.value for e in self.eigenvalues]


def _order_key(value) -> tuple:
    z = complex(value)
    return (0 if value == 1 else 1, -z.real, z.imag)


def _clean_complex(z: complex, tol: float) -> complex:
    re, im = z.real, z.imag
    if abs(im) <= tol * max(1.0, abs(z)):
        im = 0.0
    return complex(re, im)


def compute_spectrum(A, tol: float = DEFAULT_TOL, mode: str = "auto") -> Spectrum:
    """Eigenvalues with algebraic multiplicities.

    Rational matrices go through the exact characteristic polynomial and a
    squarefree factorization over Q, so multiplicities are exact and rational
    roots are certified.  Roots of the remaining irrational factors are
    computed numerically from well-conditioned squarefree factors.
    Float matrices are handled by eigenvalue clustering.
    """
    A = np.asarray(A)
    is_rational = A.dtype == object
    if not is_rational:
        return _numeric_spectrum(A, tol)

    chi = linalg.charpoly(A)
    found: list[Eigenvalue] = []
    irrational = False
    for factor, mult in linalg.squarefree_decomposition(chi):
        for r in linalg.rational_roots(factor, linalg.polished_roots(factor)):
            found.append(Eigenvalue(r, mult, True))
            factor = linalg.deflate(factor, r)
        if len(factor) > 1:
            irrational = True
            roots = linalg.polished_roots(factor)
            roots = _conjugate_pairs(roots, tol)
            for z in roots:
                found.append(Eigenvalue(_clean_complex(complex(z), tol), mult, False))
    if not any(e.value == 1 for e in found):
        raise DefectiveNumerics("1 is not an eigenvalue; the process is not balanced")
    found.sort(key=lambda e: _order_key(e.value))
    _check_separation([complex(e.value) for e in found], tol)
    if mode == "numeric" or irrational:
        reason = None if mode == "numeric" else "irrational eigenvalues"
        vals = tuple(Eigenvalue(complex(e.value), e.multiplicity, False) for e in found)
        return Spectrum(vals, False, "numeric", reason)
    return Spectrum(tuple(found), True, "exact")


def _conjugate_pairs(roots: np.ndarray, tol: float) -> list:
    """Make the roots of a real polynomial come in exact conjugate pairs."""
    out = []
    used = [False] * len(roots)
    for i, z in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if abs(z.imag) <= tol * max(1.0, abs(z)):
            out.append(complex(z.real, 0.0))
            continue
        j = min((j for j in range(len(roots)) if not used[j]),
                key=lambda j: abs(roots[j] - np.conj(z)), default=None)
        if j is None:
            out.append(complex(z))
            continue
        used[j] = True
        m = (z + np.conj(roots[j])) / 2
        out.extend([complex(m), complex(np.conj(m))])
    return out


def _check_separation(values: list, tol: float) -> None:
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            d = abs(values[i] - values[j])
            if d <= tol * CLUSTER_BAND * max(1.0, abs(values[i])):
                raise ClusterAmbiguity(
                    f"eigenvalues {values[i]:.6g} and {values[j]:.6g} are {d:.2e} apart")


def _numeric_spectrum(A: np.ndarray, tol: float) -> Spectrum:
    vals = np.linalg.eigvals(A.astype(complex))
    scale = max(1.0, float(np.max(np.abs(vals))))
    radius = math.sqrt(tol) * scale  # eigenvalues of a defective block split like eps**(1/size)
    clusters: list[list[complex]] = []
    for z in sorted(vals, key=lambda z: (-z.real, z.imag)):
        for c in clusters:
            if abs(np.mean(c) - z) <= radius:
                c.append(z)
                break
        else:
            clusters.append([z])
    centers = [complex(np.mean(c)) for c in clusters]
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if abs(centers[i] - centers[j]) <= radius * CLUSTER_BAND ** 0.5:
                raise ClusterAmbiguity(f"eigenvalue clusters {centers[i]:.6g} and {centers[j]:.6g} overlap")
    eig = []
    have_one = False
    for c, z in zip(clusters, centers):
        if abs(z - 1) <= radius:
            z = 1 + 0j
            have_one = True
        eig.append(Eigenvalue(_clean_complex(z, tol), len(c), False))
    if not have_one:
        raise DefectiveNumerics("no eigenvalue 1 found; the process is not balanced")
    eig.sort(key=lambda e: _order_key(e.value))
    return Spectrum(tuple(eig), False, "numeric")


@dataclass(frozen=True)
class MonogenicBlock:
    start: int  # 1-based index of the eigenform
    size: int
    eigenvalue: object

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.size)


@dataclass(frozen=True)
class SpectralData:
    """Jordan basis of linear forms together with the derived block structure.

    ``forms[k]`` is the coefficient row of ``u_{k+1}``; ``duals[:, k]`` is the
    vector ``v_{k+1}``.  Indices in ``eps`` and ``eigenvalues`` are 0-based
    (``eps[0]`` is always 0).
    """

    replacement: np.ndarray
    eigenvalues: tuple
    eps: tuple
    forms: np.ndarray
    duals: np.ndarray
    exact: bool
    tol: float = DEFAULT_TOL
    mode: str = "exact"
    fallback_reason: str | None = None
    pinned: tuple = ()
    classes: tuple = ()
    blocks: tuple = field(init=False)

    def __post_init__(self):
        blocks = []
        start = 0
        s = len(self.eigenvalues)
        for k in range(1, s + 1):
            if k == s or self.eps[k] == 0:
                blocks.append(MonogenicBlock(start + 1, k - start, self.eigenvalues[start]))
                start = k
        object.__setattr__(self, "blocks", tuple(blocks))
        if not self.classes:
            distinct: list = []
            cls = []
            for lam in self.eigenvalues:
                idx = next((i for i, d in enumerate(distinct) if d == lam), None)
                if idx is None:
                    distinct.append(lam)
                    idx = len(distinct) - 1
                cls.append(idx)
            object.__setattr__(self, "classes", tuple(cls))

    @property
    def dimension(self) -> int:
        return len(self.eigenvalues)

    def zero(self):
        return Fraction(0) if self.exact else 0j

    def pairing(self, alpha: Sequence[int]):
        """The scalar <alpha, lambda>."""
        acc = self.zero()
        for a, lam in zip(alpha, self.eigenvalues):
            if a:
                acc += a * lam
        return acc

    def class_counts(self, alpha: Sequence[int]) -> tuple:
        counts = [0] * (max(self.classes) + 1)
        for a, c in zip(alpha, self.classes):
            counts[c] += a
        return tuple(counts)

    def real(self, k: int) -> float | Fraction:
        lam = self.eigenvalues[k]
        return lam if isinstance(lam, Fraction) else lam.real

    def block_of(self, k: int) -> MonogenicBlock:
        """Block containing 1-based index k."""
        for b in self.blocks:
            if k in b.indices:
                return b
        raise IndexError(k)

    def forms_at(self, x: Sequence) -> list:
        """Values u_k(x) for a point x in canonical coordinates."""
        return [sum(self.forms[k, i] * x[i] for i in range(self.dimension)) for k in range(self.dimension)]

    @property
    def sigma2(self):
        ones = sum(1 for lam in self.eigenvalues if lam == 1)
        if ones > 1:
            return Fraction(1) if self.exact else 1.0
        others = [self.real(k) for k, lam in enumerate(self.eigenvalues) if lam != 1]
        if not others:
            return -math.inf
        return max(others)

    def same_real(self, a, b) -> bool:
        if self.exact:
            return a == b
        return abs(float(a) - float(b)) <= self.tol * max(1.0, abs(float(a)))

    def real_le(self, a, b) -> bool:
        """a <= b, with numeric slack."""
        if self.exact and isinstance(a, Fraction) and isinstance(b, Fraction):
            return a <= b
        return float(a) <= float(b) + self.tol * max(1.0, abs(float(b)))

    def principal_blocks(self) -> list:
        sig = self.sigma2
        if sig == -math.inf:
            return []
        cand = [b for b in self.blocks if self.same_real(self.real(b.start - 1), sig)]
        if not cand:
            return []
        big = max(b.size for b in cand)
        return [b for b in cand if b.size == big]

    def jordan_matrix(self) -> np.ndarray:
        """Matrix of ``A^T`` in the basis ``(u_k)``: eigenvalues on the diagonal, eps above."""
        s = self.dimension
        T = linalg.identity(s, self.exact) * 0
        for k in range(s):
            T[k, k] = self.eigenvalues[k]
            if k:
                T[k - 1, k] = self.eps[k]
        return T

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "fallback_reason": self.fallback_reason,
            "eigenvalues": [format_scalar(x) for x in self.eigenvalues],
            "eps": list(self.eps[1:]),
            "blocks": [{"start": b.start, "size": b.size, "eigenvalue": format_scalar(b.eigenvalue)}
                       for b in self.blocks],
            "jordan_forms": [[format_scalar(x) for x in row] for row in self.forms],
            "dual_vectors": [[format_scalar(self.duals[i, k]) for i in range(self.dimension)]
                             for k in range(self.dimension)],
            "sigma2": None if self.sigma2 == -math.inf else format_scalar(self.sigma2),
            "pinned_forms": [k for k in self.pinned],
        }


def _chains(M: np.ndarray, lam, mult: int, exact: bool, tol: float, seed_vectors=()) -> list:
    """Jordan chains of ``M`` at ``lam`` as lists ``[eigenvector, ..., top]``."""
    n = M.shape[0]
    N = M - lam * linalg.identity(n, exact)
    kernels = []
    dims = [0]
    P = linalg.identity(n, exact)
    while dims[-1] < mult:
        P = P.dot(N)
        basis = linalg.nullspace(P, exact, tol)
        if len(basis) <= dims[-1] or len(basis) > mult:
            raise DefectiveNumerics(
                f"generalized eigenspace of {lam} has inconsistent dimensions {dims[1:] + [len(basis)]}"
                f" for multiplicity {mult}")
        dims.append(len(basis))
        kernels.append(basis)
    top = len(dims) - 1
    chains: list[list] = []
    seeds = list(seed_vectors)
    for level in range(top, 0, -1):
        wanted = dims[level] - dims[level - 1] - len(chains)
        span = list(kernels[level - 2]) if level >= 2 else []
        span += [ch[level - 1] for ch in chains]
        base_rank = linalg.rank(span, exact, tol) if span else 0
        new = []
        for cand in [*seeds, *kernels[level - 1]] if level == 1 else kernels[level - 1]:
            if len(new) == wanted:
                break
            r = linalg.rank(span + new + [cand], exact, tol)
            if r > base_rank + len(new):
                new.append(cand)
        if len(new) != wanted:
            raise DefectiveNumerics(f"could not complete Jordan chains at {lam}")
        for y in new:
            chain = [y]
            v = y
            for _ in range(level - 1):
                v = N.dot(v)
                chain.insert(0, v)
            chains.append(chain)
    return chains


def build_jordan_basis(spec_or_R, spectrum: Spectrum | None = None, *, tol: float = DEFAULT_TOL,
                       mode: str = "auto", pin_forms: Mapping | None = None,
                       pin_basis: Sequence | None = None) -> SpectralData:
    """Deterministic Jordan basis of linear forms.

    Within each eigenvalue, blocks are sorted by decreasing size and chains
    are extended greedily from echelon kernel bases, so the result depends
    only on the matrix.  ``pin_forms`` overrides individual eigenforms of
    size-one blocks; ``pin_basis`` replaces the whole basis after checking it.
    """
    if isinstance(spec_or_R, ProcessSpec):
        R = np.array(spec_or_R.replacement, dtype=object)
        rational = spec_or_R.exact
    else:
        R = np.asarray(spec_or_R)
        rational = R.dtype == object
    R = linalg.as_exact(R) if rational else linalg.as_numeric(R)
    if pin_basis is not None:
        return _from_pinned_basis(R, pin_basis, rational, tol, mode)
    if spectrum is None:
        spectrum = compute_spectrum(R.T if rational else R.T.real, tol, mode)
    exact = spectrum.exact
    M = R if exact else linalg.as_numeric(R)
    s = M.shape[0]
    one = linalg.identity(1, exact)[0, 0]
    ones = np.array([one] * s, dtype=object if exact else complex)

    rows, lams, eps = [], [], []
    for ev in spectrum.eigenvalues:
        lam = ev.value
        seeds = [ones] if lam == 1 else []
        chains = _chains(M, lam, ev.multiplicity, exact, tol, seeds)
        if lam == 1 and any(len(ch) > 1 for ch in chains):
            raise UnitRootNotSemisimple("eigenvalue 1 has a nontrivial Jordan block")
        for ch in chains:
            for j, v in enumerate(ch):
                rows.append(v)
                lams.append(lam)
                eps.append(1 if j else 0)
    eps[0] = 0
    U = np.array(rows, dtype=object if exact else complex)
    if exact:
        U = linalg.as_exact(U)
    try:
        V = linalg.inverse(U, exact)
    except (ZeroDivisionError, np.linalg.LinAlgError):
        raise DefectiveNumerics("Jordan forms are not linearly independent") from None
    data = SpectralData(R if exact else linalg.as_numeric(R), tuple(lams), tuple(eps), U, V, exact, tol,
                        spectrum.mode, spectrum.fallback_reason)
    _check_jordan_relation(data)
    if pin_forms:
        data = apply_pins(data, pin_forms)
    return data


def _check_jordan_relation(data: SpectralData) -> None:
    M = data.replacement
    U = data.forms
    for k in range(data.dimension):
        resid = M.dot(U[k]) - data.eigenvalues[k] * U[k]
        if data.eps[k]:
            resid = resid - U[k - 1]
        if not linalg.is_zero_vector(resid, data.exact, data.tol * 1e2, float(np.max(np.abs(
                np.asarray(U[k], dtype=complex))))):
            raise DefectiveNumerics(f"Jordan relation fails for u_{k + 1}")


def _parse_covector(values, exact: bool):
    out = []
    for v in values:
        if isinstance(v, (list, tuple)) and len(v) == 2:
            z = complex(float(v[0]), float(v[1]))
            if exact:
                raise JordanBasisError("complex pinned coefficients require numeric mode")
            out.append(z)
            continue
        x = parse_scalar(v) if isinstance(v, str) else v
        if exact:
            if not isinstance(x, (Fraction, int)):
                raise JordanBasisError("pinned forms must be rational in exact mode")
            out.append(Fraction(x))
        else:
            out.append(complex(x))
    return np.array(out, dtype=object if exact else complex)


def apply_pins(data: SpectralData, pins: Mapping) -> SpectralData:
    """Replace eigenforms of size-one blocks by user-chosen eigenforms."""
    U = data.forms.copy()
    s = data.dimension
    for k, cov in sorted(pins.items()):
        k = int(k)
        if not 2 <= k <= s:
            raise JordanBasisError(f"cannot pin u_{k}: index must be between 2 and {s}")
        if data.eps[k - 1] or (k < s and data.eps[k]):
            raise JordanBasisError(f"cannot pin u_{k}: it belongs to a Jordan block of size > 1")
        c = _parse_covector(cov, data.exact)
        if len(c) != s:
            raise JordanBasisError(f"pinned u_{k} has {len(c)} coefficients, expected {s}")
        resid = data.replacement.dot(c) - data.eigenvalues[k - 1] * c
        if not linalg.is_zero_vector(resid, data.exact, data.tol):
            raise JordanBasisError(f"pinned u_{k} is not an eigenform for {data.eigenvalues[k - 1]}")
        U[k - 1] = c
    try:
        V = linalg.inverse(U, data.exact)
        if not data.exact and linalg.numeric_rank(U, data.tol) < s:
            raise np.linalg.LinAlgError
    except (ZeroDivisionError, np.linalg.LinAlgError):
        raise JordanBasisError("pinned forms make the basis linearly dependent") from None
    return SpectralData(data.replacement, data.eigenvalues, data.eps, U, V, data.exact, data.tol,
                        data.mode, data.fallback_reason, tuple(sorted(int(k) for k in pins)))


def _from_pinned_basis(R, basis, rational: bool, tol: float, mode: str) -> SpectralData:
    has_complex = any(isinstance(x, (list, tuple, complex)) for row in basis for x in row)
    exact = rational and not has_complex and mode != "numeric"
    M = R if exact else linalg.as_numeric(R)
    s = M.shape[0]
    U = np.array([_parse_covector(row, exact) for row in basis], dtype=object if exact else complex)
    if U.shape != (s, s):
        raise JordanBasisError(f"pinned basis must be {s}x{s}")
    if not linalg.is_zero_vector(U[0] - 1, exact, tol):
        raise JordanBasisError("the first pinned form must be the sum of the coordinate forms")
    try:
        V = linalg.inverse(U, exact)
    except (ZeroDivisionError, np.linalg.LinAlgError):
        raise JordanBasisError("pinned basis is singular") from None
    T = linalg.inverse(U.T, exact).dot(M).dot(U.T)
    lams, eps = [], []
    for k in range(s):
        lams.append(T[k, k] if exact else _clean_complex(complex(T[k, k]), tol))
        e = 0
        for j in range(s):
            if j == k:
                continue
            val = T[j, k]
            small = val == 0 if exact else abs(val) <= tol * 1e2
            if small:
                continue
            if j == k - 1 and (val == 1 if exact else abs(val - 1) <= tol * 1e2):
                e = 1
                continue
            raise JordanBasisError(f"pinned basis is not a Jordan basis (entry {j + 1},{k + 1})")
        eps.append(e)
    if not exact:
        snapped = []
        for lam in lams:
            match = next((m for m in snapped if abs(m - lam) <= tol * 1e2), None)
            snapped.append(match if match is not None else lam)
        lams = snapped
    for k in range(1, s):
        if eps[k] and lams[k] != lams[k - 1]:
            raise JordanBasisError(f"u_{k + 1} is chained to a form with a different eigenvalue")
    if lams[0] != 1:
        raise JordanBasisError("u_1 must have eigenvalue 1")
    if any(lams[k] == 1 and (eps[k] or (k + 1 < s and eps[k + 1])) for k in range(s)):
        raise UnitRootNotSemisimple("forms for eigenvalue 1 must all be eigenforms")
    m = "exact" if exact else "numeric"
    return SpectralData(M, tuple(lams), tuple(eps), U, V, exact, tol, m, None, tuple(range(1, s + 1)))


# ---------------------------------------------------------------------------
# Classification


@dataclass(frozen=True)
class Classification:
    size_class: str  # "Small" or "Large"
    principally_semisimple: bool
    semisimple: bool
    sigma2: object
    nu: int

    def to_dict(self) -> dict:
        return {
            "size_class": self.size_class,
            "principally_semisimple": self.principally_semisimple,
            "semisimple": self.semisimple,
            "sigma2": None if self.sigma2 == -math.inf else format_scalar(self.sigma2),
            "nu": self.nu,
        }


HALF = Fraction(1, 2)


def classify_process(data: SpectralData) -> Classification:
    sig = data.sigma2
    small = sig == -math.inf or data.real_le(sig, HALF)
    principal = data.principal_blocks()
    sizes = {b.size for b in principal}
    nu = (max(sizes) - 1) if sizes else 0
    return Classification(
        "Small" if small else "Large",
        all(b.size == 1 for b in principal),
        all(e == 0 for e in data.eps),
        sig,
        nu,
    )


@dataclass(frozen=True)
class PowerClass:
    large_power: bool
    small_power: bool
    semisimple_power: bool
    monogenic_power: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def is_large_index(data: SpectralData, k: int) -> bool:
    """0-based index k has Re(lambda_k) > 1/2 (beyond tolerance)."""
    return not data.real_le(data.real(k), HALF)


def classify_power(alpha: Sequence[int], data: SpectralData) -> PowerClass:
    support = [k for k, a in enumerate(alpha) if a]
    large = all(is_large_index(data, k) for k in support)
    small = all(not is_large_index(data, k) for k in support)
    semisimple = all(data.eps[k] == 0 for k in support)
    blocks = {data.block_of(k + 1).start for k in support}
    return PowerClass(large, small, semisimple, len(blocks) <= 1)


def analyze(spec: ProcessSpec, *, tol: float = DEFAULT_TOL, mode: str = "auto",
            pin_forms: Mapping | None = None, pin_basis=None) -> SpectralData:
    """Spectrum plus Jordan basis for a validated spec."""
    if pin_basis is not None:
        return build_jordan_basis(spec, tol=tol, mode=mode, pin_basis=pin_basis)
    A = build_replacement_endomorphism(spec)
    spectrum = compute_spectrum(A, tol, mode)
    return build_jordan_basis(spec, spectrum, tol=tol, mode=mode, pin_forms=pin_forms)
