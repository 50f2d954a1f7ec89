"""Built-in processes.  Each fixture returns a spec plus any default pinned forms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import SpecError, UnknownFixture
from .process import ProcessSpec, standardize_urn
from .scalars import parse_scalar


@dataclass(frozen=True)
class Fixture:
    spec: ProcessSpec
    pins: dict = field(default_factory=dict)
    waive_tenability: bool = False
    description: str = ""


def _p(params: dict, key: str, default):
    v = params.get(key, default)
    return parse_scalar(v) if isinstance(v, (str, int, float, Fraction)) and not isinstance(v, bool) else v


def _int(params: dict, key: str, default: int) -> int:
    v = params.get(key, default)
    out = int(v) if not isinstance(v, Fraction) else int(v)
    if out < 1:
        raise ValueError(f"{key} must be a positive integer")
    return out


def original_polya(params: dict) -> Fixture:
    S = _p(params, "S", 2)
    x1, y1 = _p(params, "x1", 2), _p(params, "y1", 2)
    spec = standardize_urn([[S, 0], [0, S]], [x1, y1], name="original-polya", parameters={"S": S, "x1": x1, "y1": y1})
    return Fixture(spec, description="S times the identity, standardized")


def identity_urn(params: dict) -> Fixture:
    s = _int(params, "s", 2)
    x = _p(params, "x", 1)
    R = [[int(i == j) for j in range(s)] for i in range(s)]
    spec = ProcessSpec(R, [x] * s, "identity", {"s": s, "x": x})
    return Fixture(spec, description="identity replacement; the limit is Dirichlet")


def general_2d(params: dict) -> Fixture:
    a, b = _p(params, "a", Fraction(1, 4)), _p(params, "b", Fraction(1, 5))
    x1, y1 = _p(params, "x1", 1), _p(params, "y1", 1)
    spec = ProcessSpec([[1 - a, a], [b, 1 - b]], [x1, y1], "general-2d",
                       {"a": a, "b": b, "x1": x1, "y1": y1})
    return Fixture(spec, {2: [a, -b]}, description="u2 pinned to a*x - b*y")


def triangular(params: dict) -> Fixture:
    l = _p(params, "l", Fraction(3, 4))
    x1, y1 = _p(params, "x1", 1), _p(params, "y1", 1)
    spec = ProcessSpec([[1, 0], [1 - l, l]], [x1, y1], "triangular", {"l": l, "x1": x1, "y1": y1})
    return Fixture(spec, description="triangular urn, u2 = y")


def conjugate_pair(params: dict) -> Fixture:
    """The second matrix of the conjugate pair, with u2 pinned to b*y - a*x."""
    a, b = Fraction(1, 4), Fraction(1, 5)
    spec = ProcessSpec([[1 - a, a], [b, 1 - b]], [1, 1], "conjugate-general", {})
    return Fixture(spec, {2: [-a, b]}, description="((3/4,1/4),(1/5,4/5)) with u2 = y/5 - x/4")


def conjugate_triangular(params: dict) -> Fixture:
    spec = ProcessSpec([[1, 0], [Fraction(9, 20), Fraction(11, 20)]], [1, 1], "conjugate-triangular", {})
    return Fixture(spec, description="((1,0),(9/20,11/20)), u2 = y")


def two_three_tree(params: dict) -> Fixture:
    spec = ProcessSpec([[-2, 3], [4, -3]], [2, 0], "two-three-tree", {})
    return Fixture(spec, description="fringe analysis of 2-3 trees")


TEN_DIM_ROWS = [
    [-4, 2, 3, 0, 0, 0, 0, 0, 0, 0],
    [0, -2, -3, 6, 0, 0, 0, 0, 0, 0],
    [0, -2, -3, 0, 6, 0, 0, 0, 0, 0],
    [0, 0, 0, -6, 0, 4, 3, 0, 0, 0],
    [0, 0, 0, 0, -6, 4, 3, 0, 0, 0],
    [0, 0, 0, 0, 0, -4, -3, 2, 6, 0],
    [8, 0, 0, 0, 0, -4, -3, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, -2, -6, 9],
    [4, 2, 3, 0, 0, 0, 0, -2, -6, 0],
    [4, 0, 0, 6, 0, 0, 0, 0, 0, -9],
]


def two_three_tree_10d(params: dict) -> Fixture:
    spec = ProcessSpec(TEN_DIM_ROWS, [4] + [0] * 9, "two-three-tree-10d", {}, tenability_waived=True)
    return Fixture(spec, waive_tenability=True,
                   description="10-color 2-3 tree urn; negative off-diagonal entries need the waiver")


def cyclic(params: dict) -> Fixture:
    s = _int(params, "s", 7)
    R = [[int(j == (i + 1) % s) for j in range(s)] for i in range(s)]
    spec = ProcessSpec(R, [1] + [0] * (s - 1), "cyclic", {"s": s})
    return Fixture(spec, description="drawing color k adds one ball of color k+1 mod s")


def bst_congruence(params: dict) -> Fixture:
    s = _int(params, "s", 3)
    R = [[0] * s for _ in range(s)]
    for k in range(s):
        R[k][k] -= 1
        R[k][(k + 1) % s] += 2
    spec = ProcessSpec(R, [2] + [0] * (s - 1), "bst-congruence", {"s": s})
    return Fixture(spec, description="leaf depths of a binary search tree modulo s")


def ycart_4d(params: dict) -> Fixture:
    b, w = _p(params, "b", 1), _p(params, "w", 1)
    p = _p(params, "p", Fraction(1, 2))
    R = [[1, 0, 0, 0], [0, 1, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0]]
    spec = ProcessSpec(R, [b, w, p, 1 - p], "ycart-4d", {"b": b, "w": w, "p": p})
    return Fixture(spec, description="urn with random replacement encoded in four colors")


def jordan_3d(params: dict) -> Fixture:
    l = _p(params, "l", Fraction(3, 4))
    spec = ProcessSpec([[1, 0, 0], [1 - l, l, 0], [0, 1 - l, l]], [1, 1, 1], "jordan-3d", {"l": l})
    return Fixture(spec, description="three colors with a size-two Jordan block at l")


def triangular_3d(params: dict) -> Fixture:
    a, b = _p(params, "a", Fraction(3, 4)), _p(params, "b", Fraction(1, 2))
    spec = ProcessSpec([[1, 0, 0], [1 - a, a, 0], [(1 - b) / 2, (1 - b) / 2, b]], [1, 1, 1],
                       "triangular-3d", {"a": a, "b": b})
    return Fixture(spec, description="three-color triangular urn with distinct eigenvalues")


FIXTURES: dict[str, Callable[[dict], Fixture]] = {
    "original-polya": original_polya,
    "identity": identity_urn,
    "general-2d": general_2d,
    "triangular": triangular,
    "conjugate-general": conjugate_pair,
    "conjugate-triangular": conjugate_triangular,
    "two-three-tree": two_three_tree,
    "two-three-tree-10d": two_three_tree_10d,
    "cyclic": cyclic,
    "bst-congruence": bst_congruence,
    "ycart-4d": ycart_4d,
    "jordan-3d": jordan_3d,
    "triangular-3d": triangular_3d,
}


PARAMETERS: dict[str, tuple] = {
    "original-polya": ("S", "x1", "y1"),
    "identity": ("s", "x"),
    "general-2d": ("a", "b", "x1", "y1"),
    "triangular": ("l", "x1", "y1"),
    "conjugate-general": (),
    "conjugate-triangular": (),
    "two-three-tree": (),
    "two-three-tree-10d": (),
    "cyclic": ("s",),
    "bst-congruence": ("s",),
    "ycart-4d": ("b", "w", "p"),
    "jordan-3d": ("l",),
    "triangular-3d": ("a", "b"),
}


def get_fixture(name: str, **params) -> Fixture:
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}") from None
    unknown = sorted(set(params) - set(PARAMETERS[name]))
    if unknown:
        accepted = ", ".join(PARAMETERS[name]) or "none"
        raise SpecError(f"fixture {name!r} has no parameter(s) {', '.join(unknown)}; accepted: {accepted}")
    return factory(params)
