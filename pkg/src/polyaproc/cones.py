"""The cone spanned by the vectors 2*d_i - d_j, its faces, and the polyhedra A_alpha."""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg
from .spectral import SpectralData


def cone_generators(s: int) -> list:
    """Vectors ``2 d_i - d_j`` for ordered pairs i != j."""
    out = []
    for i in range(s):
        for j in range(s):
            if i != j:
                v = [0] * s
                v[i] += 2
                v[j] -= 1
                out.append(tuple(v))
    return out


def dual_generators(s: int) -> list:
    """Covectors with value 2 on a proper nonempty index set I and 1 elsewhere.

    Ordered by the size of I, then lexicographically.  Each one cuts out a
    face of the cone, so there are ``2**s - 2`` of them.
    """
    out = []
    for size in range(1, s):
        for subset in itertools.combinations(range(s), size):
            out.append(tuple(2 if i in subset else 1 for i in range(s)))
    return out


def sigma_faces(s: int) -> list:
    """Pairs (I, covector) with I the 0-based index set carrying coefficient 2."""
    subsets = [c for size in range(1, s) for c in itertools.combinations(range(s), size)]
    return list(zip(subsets, dual_generators(s)))


def sigma_contains(x: Sequence) -> bool:
    """Membership in the cone by the face inequalities.

    In dimension one the cone reduces to the origin.
    """
    s = len(x)
    if s == 1:
        return x[0] == 0
    total = sum(x)
    # the tightest face for a given size puts the smallest coordinates in I
    xs = sorted(x)
    partial = 0
    for size in range(1, s):
        partial += xs[size - 1]
        if total + partial < 0:
            return False
    return True


def sigma_contains_by_generators(x: Sequence) -> bool:
    """Exact feasibility of x = sum c_g g with c_g >= 0.

    Carathéodory: if feasible, some linearly independent subset of the
    generators already works, so enumerate subsets of size up to the rank and
    solve each system exactly.
    """
    s = len(x)
    target = [Fraction(v) for v in x]
    if all(v == 0 for v in target):
        return True
    if s == 1:
        return False
    gens = [tuple(Fraction(g) for g in v) for v in cone_generators(s)]
    rank = linalg.rank([list(g) for g in gens], True)
    for size in range(1, rank + 1):
        for combo in itertools.combinations(gens, size):
            coeffs = _solve_nonnegative(combo, target)
            if coeffs is not None:
                return True
    return False


def _solve_nonnegative(columns, target):
    """Solve sum c_i col_i = target exactly; return c if unique, nonnegative and consistent."""
    s = len(target)
    k = len(columns)
    M = np.empty((s, k + 1), dtype=object)
    for i in range(s):
        for j in range(k):
            M[i, j] = columns[j][i]
        M[i, k] = target[i]
    R, pivots = linalg.rref(M, True)
    if k in pivots:
        return None  # inconsistent
    if len(pivots) < k:
        return None  # dependent columns: a smaller subset covers this case
    c = [R[i, k] for i in range(k)]
    if any(v < 0 for v in c):
        return None
    return c


def _moves(alpha: Sequence[int], spectral: SpectralData) -> list:
    """0-based k with alpha_k >= 1 and eps_k = 1."""
    return [k for k in range(1, len(alpha)) if spectral.eps[k] and alpha[k] >= 1]


def a_alpha(alpha: Sequence[int], spectral: SpectralData) -> list:
    """Nonnegative integer points of alpha minus the cone of moves ``d_k - d_{k-1}``.

    Only indices with alpha_k >= 1 and eps_k = 1 contribute moves.  Points
    are found by breadth-first search, applying a move only while the
    current coordinate is positive; the result is sorted lexicographically.
    """
    alpha = tuple(int(a) for a in alpha)
    moves = _moves(alpha, spectral)
    seen = {alpha}
    queue = deque([alpha])
    while queue:
        beta = queue.popleft()
        for k in moves:
            if beta[k] >= 1:
                nxt = list(beta)
                nxt[k] -= 1
                nxt[k - 1] += 1
                nxt = tuple(nxt)
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return sorted(seen)


def a_alpha_by_sums(alpha: Sequence[int], spectral: SpectralData) -> list:
    """A_alpha as alpha minus nonnegative combinations of the moves, kept nonnegative.

    Performing the moves from the highest index down shows every such point
    is reachable, so this enumeration must agree with :func:`a_alpha`.
    """
    alpha = tuple(alpha)
    movable = _moves(alpha, spectral)
    bounds = [sum(alpha[k:]) for k in movable]
    out = set()
    for counts in itertools.product(*[range(b + 1) for b in bounds]):
        beta = list(alpha)
        for k, c in zip(movable, counts):
            beta[k] -= c
            beta[k - 1] += c
        if all(b >= 0 for b in beta):
            out.add(tuple(beta))
    return sorted(out)


def dominated_by(alpha: Sequence[int], beta: Sequence[int], spectral: SpectralData) -> bool:
    """True when some alpha' in A_alpha has alpha' - beta in the cone."""
    return any(sigma_contains([a - b for a, b in zip(ap, beta)]) for ap in a_alpha(alpha, spectral))
