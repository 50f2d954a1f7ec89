"""Small dense linear algebra over Q (Fraction object arrays) or C (complex128).

Exact routines take and return ``numpy`` object arrays holding
:class:`Fraction`; numeric routines use ``complex128`` with an explicit
tolerance.  Everything here is deterministic: no random pivoting.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .errors import DefectiveNumerics

# ratio between the zero threshold and the top of the "cannot decide" band
AMBIGUITY_FACTOR = 1e3


def as_exact(M) -> np.ndarray:
    arr = np.array(M, dtype=object)
    flat = arr.reshape(-1)
    for i, x in enumerate(flat):
        flat[i] = Fraction(x)
    return arr


def as_numeric(M) -> np.ndarray:
    arr = np.array(M, dtype=object)
    out = np.empty(arr.shape, dtype=complex)
    for idx, x in np.ndenumerate(arr):
        out[idx] = complex(float(x.real), float(x.imag)) if isinstance(x, complex) else complex(float(x))
    return out


def identity(n: int, exact: bool) -> np.ndarray:
    if exact:
        out = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                out[i, j] = Fraction(int(i == j))
        return out
    return np.eye(n, dtype=complex)


def _scale(M: np.ndarray) -> float:
    return max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0


def rref(M, exact: bool, tol: float = 1e-9):
    """Reduced row echelon form and pivot columns.

    Numeric pivots use partial pivoting with threshold ``tol * scale``.
    """
    A = np.array(M, dtype=object if exact else complex, copy=True)
    rows, cols = A.shape
    thresh = tol * _scale(A) if not exact else 0
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        if exact:
            p = next((i for i in range(r, rows) if A[i, c] != 0), None)
        else:
            i = r + int(np.argmax(np.abs(A[r:, c])))
            p = i if abs(A[i, c]) > thresh else None
        if p is None:
            if not exact:
                A[r:, c] = 0
            continue
        if p != r:
            A[[r, p]] = A[[p, r]]
        A[r] = A[r] / A[r, c]
        for i in range(rows):
            if i != r and A[i, c] != 0:
                A[i] = A[i] - A[i, c] * A[r]
        if not exact:
            A[r, c] = 1
            A[np.arange(rows) != r, c] = 0
        pivots.append(c)
        r += 1
    return A, pivots


def nullspace(M, exact: bool, tol: float = 1e-9) -> list:
    """Basis of the right kernel: one vector per free column, with that entry set to 1."""
    A, pivots = rref(M, exact, tol)
    cols = A.shape[1]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.array([Fraction(0)] * cols, dtype=object) if exact else np.zeros(cols, dtype=complex)
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = -A[i, f]
        basis.append(v)
    if not exact:
        check_nullity(M, len(basis), tol)
    return basis


def singular_values(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return np.zeros(0)
    return np.linalg.svd(M, compute_uv=False)


def numeric_rank(M, tol: float = 1e-9) -> int:
    """SVD rank; raises when a singular value falls in the undecidable band."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0
    sv = singular_values(M)
    scale = _scale(M)
    lo, hi = tol * scale, tol * scale * AMBIGUITY_FACTOR
    if np.any((sv > lo) & (sv <= hi)):
        raise DefectiveNumerics(
            f"singular value {float(sv[(sv > lo) & (sv <= hi)][0]):.3e} is too close to the rank threshold")
    return int(np.sum(sv > lo))


def check_nullity(M, expected: int, tol: float) -> None:
    M = np.asarray(M, dtype=complex)
    got = M.shape[1] - numeric_rank(M, tol)
    if got != expected:
        raise DefectiveNumerics(f"echelon nullity {expected} disagrees with SVD nullity {got}")


def rank(vectors, exact: bool, tol: float = 1e-9) -> int:
    M = np.array(vectors, dtype=object if exact else complex)
    if M.size == 0:
        return 0
    if exact:
        return len(rref(M, True)[1])
    return numeric_rank(M, tol)


def inverse(M, exact: bool) -> np.ndarray:
    n = M.shape[0]
    if not exact:
        return np.linalg.inv(np.asarray(M, dtype=complex))
    aug = np.concatenate([np.array(M, dtype=object), identity(n, True)], axis=1)
    A, pivots = rref(aug, True)
    if pivots[:n] != list(range(n)):
        raise ZeroDivisionError("matrix is singular")
    return A[:, n:]


def matrix_power(M, p: int, exact: bool) -> np.ndarray:
    out = identity(M.shape[0], exact)
    for _ in range(p):
        out = out.dot(M)
    return out


def is_zero_vector(v, exact: bool, tol: float = 1e-9, scale: float = 1.0) -> bool:
    if exact:
        return all(x == 0 for x in v)
    return bool(np.max(np.abs(np.asarray(v, dtype=complex)), initial=0.0) <= tol * max(1.0, scale))


# ---------------------------------------------------------------------------
# Univariate polynomials over Q, coefficient lists with the leading term first


def charpoly(M) -> list:
    """Characteristic polynomial det(xI - M) by Faddeev-LeVerrier, exact."""
    A = as_exact(M)
    n = A.shape[0]
    coeffs = [Fraction(1)]
    Mk = np.zeros((n, n), dtype=object)
    Mk[:] = Fraction(0)
    I = identity(n, True)
    c = Fraction(1)
    for k in range(1, n + 1):
        Mk = A.dot(Mk) + c * I
        AM = A.dot(Mk)
        c = -sum(AM[i, i] for i in range(n)) / k
        coeffs.append(c)
    return coeffs


def poly_trim(p: list) -> list:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def poly_eval(p: list, x):
    acc = 0
    for c in p:
        acc = acc * x + c
    return acc


def poly_deriv(p: list) -> list:
    n = len(p) - 1
    if n == 0:
        return [Fraction(0)]
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def poly_divmod(a: list, b: list):
    a = [Fraction(x) for x in poly_trim(a)]
    b = poly_trim(b)
    if len(b) == 1 and b[0] == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return [Fraction(0)], a
    q = []
    rem = list(a)
    while len(rem) >= len(b):
        f = rem[0] / b[0]
        q.append(f)
        for i in range(len(b)):
            rem[i] -= f * b[i]
        rem.pop(0)
    return q, poly_trim(rem) if rem else [Fraction(0)]


def poly_monic(p: list) -> list:
    p = poly_trim(p)
    return [Fraction(c) / p[0] for c in p]


def poly_gcd(a: list, b: list) -> list:
    a, b = poly_trim(a), poly_trim(b)
    while not (len(b) == 1 and b[0] == 0):
        _, r = poly_divmod(a, b)
        a, b = b, r
    return poly_monic(a)


def squarefree_decomposition(p: list) -> list:
    """Yun's algorithm: returns [(f_i, i)] with p = lc * prod f_i^i, f_i squarefree and coprime."""
    f = poly_monic(p)
    if len(f) == 1:
        return []
    out = []
    d = poly_deriv(f)
    a = poly_gcd(f, d)
    b, _ = poly_divmod(f, a)
    c, _ = poly_divmod(d, a)
    i = 1
    while len(b) > 1:
        d = [x - y for x, y in zip(_pad(c, len(b) - 1), _pad(poly_deriv(b), len(b) - 1))]
        d = poly_trim(d)
        a = poly_gcd(b, d)
        if len(a) > 1:
            out.append((a, i))
        b, _ = poly_divmod(b, a)
        c, _ = poly_divmod(d, a)
        i += 1
    return out


def _pad(p: list, n: int) -> list:
    return [Fraction(0)] * (n - len(p)) + list(p) if len(p) < n else list(p)


def integer_primitive(p: list) -> list:
    """Scale a rational polynomial to coprime integer coefficients with positive lead."""
    from math import gcd, lcm

    den = 1
    for c in p:
        den = lcm(den, Fraction(c).denominator)
    ints = [int(Fraction(c) * den) for c in p]
    g = 0
    for x in ints:
        g = gcd(g, x)
    ints = [x // g for x in ints]
    if ints[0] < 0:
        ints = [-x for x in ints]
    return ints


def rational_roots(p: list, approx_roots=None) -> list:
    """Rational roots of ``p`` found by rationalizing numerical approximations.

    Each candidate ``a/b`` is accepted only if ``b`` divides the leading
    coefficient of the primitive integer polynomial and ``p(a/b) == 0``
    exactly, so the result is exact whatever the numerics did.
    """
    p = poly_trim(p)
    if len(p) <= 1:
        return []
    ints = integer_primitive(p)
    lead = ints[0]
    if approx_roots is None:
        approx_roots = np.roots([float(c) for c in ints]) if len(ints) > 1 else []
    found = []
    for z in approx_roots:
        if abs(z.imag) > 1e-6 * max(1.0, abs(z)):
            continue
        x = float(z.real)
        bound = 1
        while True:
            bound = min(bound * 10, abs(lead))
            cand = Fraction(x).limit_denominator(bound)
            if lead % cand.denominator == 0 and cand not in found and poly_eval(p, cand) == 0:
                found.append(cand)
                break
            if bound >= abs(lead):
                break
    return sorted(found)


def deflate(p: list, root) -> list:
    q, r = poly_divmod(p, [Fraction(1), -Fraction(root)])
    assert len(r) == 1 and r[0] == 0
    return q


def polished_roots(p: list) -> np.ndarray:
    """Numerical roots of a squarefree polynomial, polished by Newton steps."""
    coeffs = np.array([float(c) for c in p])
    if len(coeffs) <= 1:
        return np.zeros(0, dtype=complex)
    roots = np.roots(coeffs).astype(complex)
    dcoeffs = np.polyder(coeffs)
    for _ in range(4):
        fv = np.polyval(coeffs, roots)
        dv = np.polyval(dcoeffs, roots)
        step = np.where(dv != 0, fv / np.where(dv == 0, 1, dv), 0)
        roots = roots - step
    return roots
