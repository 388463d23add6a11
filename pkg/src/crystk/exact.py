"""Exact rational vectors, matrices, affine isometries and lattices.

Scalars are :class:`fractions.Fraction` (always lowest terms, hashable).
Vectors and matrices are plain tuples so they can be used as set members
and dictionary keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence, Union

from crystk.intlinalg import smith_normal_form

Scalar = Fraction
Vec3 = tuple[Fraction, Fraction, Fraction]
Mat3 = tuple[Vec3, Vec3, Vec3]

Number = Union[int, Fraction, str]


class NotASublattice(ValueError):
    pass


class GeneratorNotInLattice(ValueError):
    pass


class NotOrthogonal(ValueError):
    pass


def q(x: Number) -> Fraction:
    """Parse an int, Fraction or "p/q" string into a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted in exact code")
    return Fraction(x)


def vec(*xs: Number) -> Vec3:
    if len(xs) == 1 and not isinstance(xs[0], (int, str, Fraction)):
        xs = tuple(xs[0])  # type: ignore[assignment]
    if len(xs) != 3:
        raise ValueError(f"expected 3 coordinates, got {len(xs)}")
    return (q(xs[0]), q(xs[1]), q(xs[2]))


def mat(rows: Iterable[Iterable[Number]], scale: Number = 1) -> Mat3:
    s = q(scale)
    m = tuple(tuple(q(x) * s for x in row) for row in rows)
    if len(m) != 3 or any(len(r) != 3 for r in m):
        raise ValueError("expected a 3x3 matrix")
    return m  # type: ignore[return-value]


ZERO: Vec3 = (Fraction(0), Fraction(0), Fraction(0))
IDENTITY: Mat3 = mat([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
MINUS_IDENTITY: Mat3 = mat([[-1, 0, 0], [0, -1, 0], [0, 0, -1]])


def add(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def neg(a: Vec3) -> Vec3:
    return (-a[0], -a[1], -a[2])


def scale(c: Number, a: Vec3) -> Vec3:
    c = q(c)
    return (c * a[0], c * a[1], c * a[2])


def dot(a: Vec3, b: Vec3) -> Fraction:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


# Point-group matrices and line directions repeat constantly, so products are memoized.
@lru_cache(maxsize=1 << 18)
def matvec(m: Mat3, v: Vec3) -> Vec3:
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


@lru_cache(maxsize=1 << 16)
def matmul(a: Mat3, b: Mat3) -> Mat3:
    return tuple(
        tuple(a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j] for j in range(3))
        for i in range(3)
    )  # type: ignore[return-value]


def transpose(m: Mat3) -> Mat3:
    return tuple(tuple(m[j][i] for j in range(3)) for i in range(3))  # type: ignore[return-value]


def mat_neg(m: Mat3) -> Mat3:
    return tuple(tuple(-x for x in row) for row in m)  # type: ignore[return-value]


def det(m: Mat3) -> Fraction:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def inverse(m: Mat3) -> Mat3:
    d = det(m)
    if d == 0:
        raise ZeroDivisionError("singular matrix")
    cof = [[Fraction(0)] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            c = [k for k in range(3) if k != j]
            minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]]
            cof[i][j] = minor if (i + j) % 2 == 0 else -minor
    # inverse = adjugate / det, adjugate = cofactor transpose
    return tuple(tuple(cof[j][i] / d for j in range(3)) for i in range(3))  # type: ignore[return-value]


def columns(*vs: Vec3) -> Mat3:
    """Matrix whose columns are the given vectors."""
    return transpose((vs[0], vs[1], vs[2]))


def is_orthogonal(m: Mat3) -> bool:
    return matmul(transpose(m), m) == IDENTITY


def is_integral(v: Iterable[Fraction]) -> bool:
    return all(x.denominator == 1 for x in v)


def primitive_integer(v: Vec3) -> tuple[int, int, int]:
    """Scale a nonzero rational vector to a primitive integer vector (same direction)."""
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no direction")
    return (ints[0] // g, ints[1] // g, ints[2] // g)


def fmt_scalar(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_vec(v: Vec3) -> str:
    return "(" + ", ".join(fmt_scalar(x) for x in v) + ")"


def vec_to_json(v: Vec3) -> list[str]:
    return [fmt_scalar(x) for x in v]


def mat_to_json(m: Mat3) -> list[list[str]]:
    return [[fmt_scalar(x) for x in row] for row in m]


@dataclass(frozen=True)
class AffineIsometry:
    """The map p -> translation + linear @ p, with orthogonal linear part."""

    translation: Vec3
    linear: Mat3

    def __post_init__(self) -> None:
        if not is_orthogonal(self.linear):
            raise NotOrthogonal(f"linear part is not orthogonal: {self.linear}")

    @classmethod
    def pure(cls, linear: Mat3) -> "AffineIsometry":
        return cls(ZERO, linear)

    @classmethod
    def shift(cls, translation: Vec3) -> "AffineIsometry":
        return cls(translation, IDENTITY)

    def __call__(self, p: Vec3) -> Vec3:
        return add(self.translation, matvec(self.linear, p))

    def __matmul__(self, other: "AffineIsometry") -> "AffineIsometry":
        # (w1 + A1)(w2 + A2) = (w1 + A1 w2) + A1 A2
        return AffineIsometry(
            add(self.translation, matvec(self.linear, other.translation)),
            matmul(self.linear, other.linear),
        )

    def inverse(self) -> "AffineIsometry":
        inv = transpose(self.linear)
        return AffineIsometry(neg(matvec(inv, self.translation)), inv)

    def to_json(self) -> dict:
        return {"translation": vec_to_json(self.translation), "linear": mat_to_json(self.linear)}

    @classmethod
    def from_json(cls, d: dict) -> "AffineIsometry":
        return cls(vec(*d["translation"]), mat(d["linear"]))


def apply_isometry(g: AffineIsometry, p: Vec3) -> Vec3:
    return g(p)


class Lattice:
    """Rank-3 lattice given by a rational basis (stored exactly as given)."""

    def __init__(self, basis: Sequence[Vec3], name: str | None = None):
        if len(basis) != 3:
            raise ValueError("a lattice needs exactly three basis vectors")
        self.basis: tuple[Vec3, Vec3, Vec3] = (vec(basis[0]), vec(basis[1]), vec(basis[2]))
        self.name = name
        self.matrix = columns(*self.basis)
        if det(self.matrix) == 0:
            raise ValueError("basis vectors are linearly dependent")
        self._inv = inverse(self.matrix)

    def __repr__(self) -> str:
        inner = ", ".join(fmt_vec(b) for b in self.basis)
        return f"Lattice({self.name or ''}<{inner}>)"

    def coords(self, v: Vec3) -> Vec3:
        return matvec(self._inv, v)

    def point(self, c: Sequence[Number]) -> Vec3:
        return matvec(self.matrix, vec(*c))

    def contains(self, v: Vec3) -> bool:
        return is_integral(self.coords(v))

    @property
    def covolume(self) -> Fraction:
        return abs(det(self.matrix))

    def primitive(self, v: Vec3) -> Vec3:
        """Shortest lattice vector on the ray through v (v must be a rational multiple of a lattice vector)."""
        c = primitive_integer(self.coords(v))
        return self.point(c)

    def to_json(self) -> list[list[str]]:
        return [vec_to_json(b) for b in self.basis]


def lattice_contains(L: Lattice, v: Vec3) -> bool:
    return L.contains(v)


def sublattice_index(L_big: Lattice, L_small: Lattice) -> int:
    cs = []
    for b in L_small.basis:
        c = L_big.coords(b)
        if not is_integral(c):
            raise NotASublattice(f"{fmt_vec(b)} is not in {L_big!r}")
        cs.append(c)
    d = abs(det(columns(*cs)))
    assert d.denominator == 1
    return int(d)


def is_full_subgroup(L: Lattice, generators: Sequence[Vec3]) -> bool:
    """True iff the generators span (over Z) every point of L in their real span.

    Works in lattice coordinates: the generators form an integer matrix G, and
    Z^3 / rowspace(G) is torsion-free exactly when every invariant factor is 1.
    """
    rows = []
    for g in generators:
        c = L.coords(vec(g))
        if not is_integral(c):
            raise GeneratorNotInLattice(f"{fmt_vec(vec(g))} is not in {L!r}")
        rows.append([int(x) for x in c])
    if not rows or all(all(x == 0 for x in r) for r in rows):
        return True
    factors, _rank = smith_normal_form(rows)
    return all(f == 1 for f in factors)
