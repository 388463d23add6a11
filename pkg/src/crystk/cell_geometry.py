"""Fundamental polyhedra for the seven maximal groups, ridge-cycle checks, and cell stabilizers.

The polyhedra and their side-pairings are stored as JSON under ``data/domains``.
Everything else (vertices, ridges, angle sums, subdivisions, stabilizers) is
recomputed here with exact arithmetic and compared against that data.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from itertools import combinations
from typing import Iterable, Sequence

from crystk.crystal_classes import CrystGroup, lookup, maximal_group
from crystk.exact import (
    IDENTITY,
    AffineIsometry,
    Vec3,
    add,
    dot,
    fmt_scalar,
    fmt_vec,
    matmul,
    matvec,
    scale,
    sub,
    vec,
    vec_to_json,
)
from crystk.intlinalg import smith_normal_form
from crystk.point_groups import (
    PointGroup,
    finite_iso_type,
    identify_named,
    is_negligible_finite,
    standard_point_group,
)

MAX_CYCLE_STEPS = 24
SAMPLE_FRACTION = Fraction(2, 7)


class InvalidDomain(ValueError):
    pass


class NotSubproper(AssertionError):
    pass


class PreconditionViolated(ValueError):
    pass


class NotASubgroup(ValueError):
    pass


# --- angles -----------------------------------------------------------------

# arccos(sqrt(r)) for the squared cosines that give rational multiples of pi
_SPECIAL_ARCCOS = {
    Fraction(0): Fraction(1, 2),
    Fraction(1, 4): Fraction(1, 3),
    Fraction(1, 2): Fraction(1, 4),
    Fraction(3, 4): Fraction(1, 6),
    Fraction(1): Fraction(0),
}


@dataclass(frozen=True)
class Angle:
    """pi_coeff * pi + sum(coeff * arccos(sqrt(r))) with 0 < r < 1 and r not special."""

    pi_coeff: Fraction = Fraction(0)
    terms: tuple[tuple[Fraction, int], ...] = ()

    @classmethod
    def _make(cls, pi_coeff, terms: dict) -> "Angle":
        return cls(Fraction(pi_coeff), tuple(sorted((r, c) for r, c in terms.items() if c)))

    def __add__(self, other: "Angle") -> "Angle":
        t = dict(self.terms)
        for r, c in other.terms:
            t[r] = t.get(r, 0) + c
        return Angle._make(self.pi_coeff + other.pi_coeff, t)

    def __neg__(self) -> "Angle":
        return Angle._make(-self.pi_coeff, {r: -c for r, c in self.terms})

    def __sub__(self, other: "Angle") -> "Angle":
        return self + (-other)

    @property
    def is_rational_pi(self) -> bool:
        return not self.terms

    def __str__(self) -> str:
        parts = []
        if self.pi_coeff or not self.terms:
            parts.append(_fmt_pi(self.pi_coeff))
        for r, c in self.terms:
            s = f"arccos({_fmt_sqrt(r)})"
            parts.append(s if c == 1 else f"{c}*{s}")
        return " + ".join(parts)

    def to_float(self) -> float:
        import math

        return float(self.pi_coeff) * math.pi + sum(c * math.acos(math.sqrt(r)) for r, c in self.terms)


def _fmt_pi(x: Fraction) -> str:
    if x == 0:
        return "0"
    num = "pi" if x.numerator == 1 else f"{x.numerator}pi"
    return num if x.denominator == 1 else f"{num}/{x.denominator}"


def _isqrt_exact(n: int) -> int | None:
    from math import isqrt

    s = isqrt(n)
    return s if s * s == n else None


def _fmt_sqrt(r: Fraction) -> str:
    p, q = _isqrt_exact(r.numerator), _isqrt_exact(r.denominator)
    if p is not None and q is not None:
        return fmt_scalar(Fraction(p, q))
    if p is not None:
        return f"{p}/sqrt({r.denominator})"
    return f"sqrt({fmt_scalar(r)})"


def arccos_angle(sign: int, r: Fraction) -> Angle:
    """The angle arccos(sign * sqrt(r)) in normal form."""
    if not 0 <= r <= 1:
        raise ValueError(f"squared cosine {r} out of range")
    if r in _SPECIAL_ARCCOS:
        base = Angle(_SPECIAL_ARCCOS[r])
    else:
        base = Angle._make(0, {r: 1})
    if sign >= 0 or r == 0:
        return base
    # arccos(-a) = pi - arccos(a)
    return Angle(Fraction(1)) - base


def dihedral_cosine(n1: Vec3, n2: Vec3) -> tuple[int, Fraction]:
    """cos of the angle between two normals as (sign, squared value)."""
    d = dot(n1, n2)
    if dot(n1, n1) == 0 or dot(n2, n2) == 0:
        raise ValueError("normals must be nonzero")
    sign = (d > 0) - (d < 0)
    return sign, d * d / (dot(n1, n1) * dot(n2, n2))


def dihedral_angle(n1: Vec3, n2: Vec3) -> Angle:
    """Interior angle between two sides with outward normals n1, n2."""
    sign, r = dihedral_cosine(n1, n2)
    return Angle(Fraction(1)) - arccos_angle(sign, r)


# --- polyhedra --------------------------------------------------------------


@dataclass(frozen=True)
class Side:
    normal: Vec3
    offset: Fraction

    def on(self, p: Vec3) -> bool:
        return dot(self.normal, p) == self.offset

    def inside(self, p: Vec3) -> bool:
        return dot(self.normal, p) <= self.offset


def _solve(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> tuple[list[Fraction], list[list[Fraction]]] | None:
    """Exact solution set of rows @ x = rhs: (particular solution, nullspace basis) or None."""
    n = len(rows[0])
    a = [list(map(Fraction, r)) + [Fraction(b)] for r, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        a[r] = [x / a[r][c] for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    if any(all(x == 0 for x in row[:n]) and row[n] != 0 for row in a):
        return None
    part = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        part[c] = a[i][n]
    null = []
    for free in (c for c in range(n) if c not in pivots):
        v = [Fraction(0)] * n
        v[free] = Fraction(1)
        for i, c in enumerate(pivots):
            v[c] = -a[i][free]
        null.append(v)
    return part, null


class Polyhedron:
    """Convex polyhedron {p : normal_i . p <= offset_i}; vertices are recomputed from the sides."""

    def __init__(self, sides: Sequence[Side], vertices: Sequence[Vec3] | None = None):
        self.sides = tuple(sides)
        found = self._compute_vertices()
        if vertices is not None and set(vertices) != set(found):
            raise InvalidDomain(
                f"listed vertices {sorted(map(fmt_vec, vertices))} != computed {sorted(map(fmt_vec, found))}"
            )
        self.vertices = tuple(sorted(found))
        if len(self.vertices) < 4:
            raise InvalidDomain("polyhedron has empty interior")

    def _compute_vertices(self) -> list[Vec3]:
        out = set()
        for i, j, k in combinations(range(len(self.sides)), 3):
            ss = [self.sides[t] for t in (i, j, k)]
            sol = _solve([s.normal for s in ss], [s.offset for s in ss])
            if sol is None or sol[1]:
                continue
            p = vec(*sol[0])
            if all(s.inside(p) for s in self.sides):
                out.add(p)
        return list(out)

    def sides_at(self, p: Vec3) -> list[int]:
        return [i for i, s in enumerate(self.sides) if s.on(p)]

    def side_vertices(self, i: int) -> frozenset[Vec3]:
        return frozenset(v for v in self.vertices if self.sides[i].on(v))

    def ridges(self) -> dict[tuple[int, int], tuple[Vec3, Vec3]]:
        """Edges of the polyhedron keyed by the pair of sides meeting there."""
        out = {}
        for i, j in combinations(range(len(self.sides)), 2):
            common = sorted(self.side_vertices(i) & self.side_vertices(j))
            if len(common) >= 2:
                if len(common) > 2:
                    raise InvalidDomain(f"sides {i + 1},{j + 1} share more than two vertices")
                out[(i, j)] = (common[0], common[1])
        return out

    def contains(self, p: Vec3) -> bool:
        return all(s.inside(p) for s in self.sides)


@dataclass
class SidePairing:
    """phi[i] maps side partner[i] onto side i."""

    phi: dict[int, AffineIsometry]
    partner: dict[int, int] = field(default_factory=dict)

    def is_reflection_in(self, P: Polyhedron, i: int) -> bool:
        g = self.phi[i]
        return self.partner[i] == i and g.linear != IDENTITY and all(g(v) == v for v in P.side_vertices(i))


def _resolve_partners(P: Polyhedron, phi: dict[int, AffineIsometry]) -> dict[int, int]:
    partner = {}
    for i, g in phi.items():
        inv = g.inverse()
        image = frozenset(inv(v) for v in P.side_vertices(i))
        hits = [j for j in range(len(P.sides)) if P.side_vertices(j) == image]
        if len(hits) != 1:
            raise InvalidDomain(f"side {i + 1}: inverse pairing does not land on a side")
        partner[i] = hits[0]
    for i, j in partner.items():
        if partner[j] != i or phi[j] != phi[i].inverse():
            raise InvalidDomain(f"pairings of sides {i + 1} and {j + 1} are not mutually inverse")
    return partner


@dataclass
class Domain:
    index: int
    group: CrystGroup
    polyhedron: Polyhedron
    pairing: SidePairing
    listed_subdivision: tuple[Vec3, ...]


def _load_json(i: int) -> dict:
    path = resources.files("crystk") / "data" / "domains" / f"gamma_{i}.json"
    return json.loads(path.read_text())


@lru_cache(maxsize=None)
def load_domain(i: int) -> Domain:
    raw = _load_json(i)
    sides = [Side(vec(*s["normal"]), Fraction(s["offset"])) for s in raw["sides"]]
    P = Polyhedron(sides, [vec(*v) for v in raw["vertices"]])
    phi = {p["side"] - 1: AffineIsometry.from_json(p["isometry"]) for p in raw["pairings"]}
    if set(phi) != set(range(len(sides))):
        raise InvalidDomain(f"gamma_{i}: every side needs a pairing")
    pairing = SidePairing(phi, _resolve_partners(P, phi))
    sub_vertices = tuple(vec(*v) for v in raw.get("subdivision_vertices", []))
    return Domain(i, maximal_group(i), P, pairing, sub_vertices)


# --- ridge cycles -----------------------------------------------------------


@dataclass(frozen=True)
class RidgeCycle:
    ridges: tuple[tuple[int, int], ...]  # one entry per distinct sample point, 0-based side pairs
    kind: str  # "dihedral" or "cyclic"
    angle_sum: Angle
    repeated_ridges: tuple[tuple[int, int], ...]

    @property
    def ok(self) -> bool:
        s = self.angle_sum
        if not s.is_rational_pi or s.pi_coeff <= 0:
            return False
        target = s.pi_coeff if self.kind == "dihedral" else s.pi_coeff / 2
        return target.numerator == 1

    def describe(self) -> str:
        names = ", ".join(f"S{a + 1}/S{b + 1}" for a, b in self.ridges)
        return f"{self.kind} cycle [{names}] sum = {self.angle_sum}"


def _follow_cycle(P: Polyhedron, pairing: SidePairing, y: Vec3, side: int) -> RidgeCycle:
    start = (y, side)
    points: dict[Vec3, tuple[int, int]] = {}
    dihedral = False
    state = start
    for _ in range(MAX_CYCLE_STEPS):
        y, x = state
        at = P.sides_at(y)
        if len(at) != 2:
            raise InvalidDomain(f"sample point {fmt_vec(y)} is not interior to a ridge")
        points.setdefault(y, (at[0], at[1]))
        if pairing.is_reflection_in(P, x):
            dihedral = True
        y2 = pairing.phi[x].inverse()(y)
        landed = pairing.partner[x]
        at2 = P.sides_at(y2)
        if landed not in at2 or len(at2) != 2:
            raise InvalidDomain(f"pairing of side {x + 1} sends {fmt_vec(y)} off a ridge")
        state = (y2, next(s for s in at2 if s != landed))
        if state == start:
            break
    else:
        raise NotSubproper(f"ridge cycle from {fmt_vec(start[0])} did not close in {MAX_CYCLE_STEPS} steps")
    total = Angle()
    seen_ridges: list[tuple[int, int]] = []
    repeated = []
    for p, (a, b) in points.items():
        total = total + dihedral_angle(P.sides[a].normal, P.sides[b].normal)
        if (a, b) in seen_ridges:
            repeated.append((a, b))
        seen_ridges.append((a, b))
    return RidgeCycle(tuple(seen_ridges), "dihedral" if dihedral else "cyclic", total, tuple(repeated))


def ridge_cycles(P: Polyhedron, pairing: SidePairing) -> list[RidgeCycle]:
    cycles = []
    covered: set[tuple[int, int]] = set()
    for key, (a, b) in sorted(P.ridges().items()):
        if key in covered:
            continue
        y = add(a, scale(SAMPLE_FRACTION, sub(b, a)))
        c = _follow_cycle(P, pairing, y, key[0])
        covered.update(c.ridges)
        cycles.append(c)
    return cycles


@dataclass
class SubproperReport:
    cycles: list[RidgeCycle]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.cycles)

    def lines(self) -> list[str]:
        return [("ok   " if c.ok else "FAIL ") + c.describe() for c in self.cycles]


def verify_subproper(P: Polyhedron, pairing: SidePairing) -> SubproperReport:
    report = SubproperReport(ridge_cycles(P, pairing))
    bad = [c for c in report.cycles if not c.ok]
    if bad:
        raise NotSubproper(bad[0].describe())
    return report


# --- group generated by the pairings ----------------------------------------


def generates_group(G: CrystGroup, maps: Iterable[AffineIsometry]) -> bool:
    """True iff the isometries lie in G and generate all of it.

    The point-group image is reached by search; the translation part comes from
    Schreier generators and is compared with the lattice through Smith normal form.
    """
    gens = list(maps)
    L, H = G.lattice, G.point_group
    for g in gens:
        if g.linear not in H or not L.contains(g.translation):
            return False
    gens = gens + [g.inverse() for g in gens]
    lift = {IDENTITY: AffineIsometry.pure(IDENTITY)}
    frontier = [IDENTITY]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                x = lift[h] @ g
                if x.linear not in lift:
                    lift[x.linear] = x
                    nxt.append(x.linear)
        frontier = nxt
    if set(lift) != set(H.elements):
        return False
    rows = []
    for h, lh in lift.items():
        for g in gens:
            x = lh @ g
            t = x @ lift[x.linear].inverse()
            c = L.coords(t.translation)
            rows.append([int(v) for v in c])
    factors, rank = smith_normal_form(rows)
    return rank == 3 and all(f == 1 for f in factors)


# --- subdivision ------------------------------------------------------------


@dataclass(frozen=True)
class BadSide:
    side: int
    case: str  # "line" when the pairing fixes a line in the side, "point" when it fixes one point
    added: tuple[Vec3, ...]
    chord: tuple[Vec3, Vec3] | None


def _fixed_set_in_side(P: Polyhedron, g: AffineIsometry, i: int):
    s = P.sides[i]
    rows = [[g.linear[r][c] - IDENTITY[r][c] for c in range(3)] for r in range(3)]
    rhs = [-g.translation[r] for r in range(3)]
    return _solve(rows + [list(s.normal)], rhs + [s.offset])


def bad_sides(P: Polyhedron, pairing: SidePairing) -> list[BadSide]:
    out = []
    for i in range(len(P.sides)):
        if pairing.partner[i] != i or pairing.is_reflection_in(P, i):
            continue
        sol = _fixed_set_in_side(P, pairing.phi[i], i)
        if sol is None:
            raise InvalidDomain(f"side {i + 1} is mapped to itself without a fixed point")
        base, null = vec(*sol[0]), sol[1]
        if not null:
            out.append(BadSide(i, "point", (base,), None))
            continue
        if len(null) != 1:
            raise InvalidDomain(f"side {i + 1}: pairing fixes the whole side but is not a reflection")
        d = vec(*null[0])
        lo, hi = None, None
        for s in P.sides:
            a, b = dot(s.normal, d), s.offset - dot(s.normal, base)
            if a > 0:
                hi = b / a if hi is None else min(hi, b / a)
            elif a < 0:
                lo = b / a if lo is None else max(lo, b / a)
            elif b < 0:
                raise InvalidDomain(f"fixed line of side {i + 1} misses the polyhedron")
        if lo is None or hi is None or lo > hi:
            raise InvalidDomain(f"fixed line of side {i + 1} misses the polyhedron")
        p, q = add(base, scale(lo, d)), add(base, scale(hi, d))
        chord = (min(p, q), max(p, q))
        out.append(BadSide(i, "line", chord, chord))
    return out


def bad_ridges(P: Polyhedron, pairing: SidePairing) -> list[tuple[int, int]]:
    out = []
    for c in ridge_cycles(P, pairing):
        out.extend(c.repeated_ridges)
    return sorted(set(out))


def _midpoint(a: Vec3, b: Vec3) -> Vec3:
    return scale(Fraction(1, 2), add(a, b))


def _on_open_segment(p: Vec3, a: Vec3, b: Vec3) -> bool:
    d = sub(b, a)
    w = sub(p, a)
    cx = (w[1] * d[2] - w[2] * d[1], w[2] * d[0] - w[0] * d[2], w[0] * d[1] - w[1] * d[0])
    if any(cx):
        return False
    t = dot(w, d) / dot(d, d)
    return 0 < t < 1


def _split(a: Vec3, b: Vec3, points: Iterable[Vec3]) -> list[tuple[Vec3, Vec3]]:
    inner = sorted((p for p in points if _on_open_segment(p, a, b)), key=lambda p: dot(sub(p, a), sub(b, a)))
    chain = [a] + inner + [b]
    return [tuple(sorted(pair)) for pair in zip(chain, chain[1:])]  # type: ignore[misc]


@dataclass
class Subdivision:
    vertices: tuple[Vec3, ...]
    added: tuple[Vec3, ...]
    edges: tuple[tuple[Vec3, Vec3], ...]
    bad_sides: tuple[BadSide, ...]
    bad_ridges: tuple[tuple[int, int], ...]


@lru_cache(maxsize=None)
def subdivide(i: int) -> Subdivision:
    """Vertices and edges of the domain after the bad-side and bad-ridge subdivisions."""
    D = load_domain(i)
    P, pairing = D.polyhedron, D.pairing
    bs = bad_sides(P, pairing)
    br = bad_ridges(P, pairing)
    ridges = P.ridges()
    added: set[Vec3] = set()
    segments = list(ridges.values())
    for b in bs:
        added.update(b.added)
        if b.chord is not None and b.chord[0] != b.chord[1]:
            segments.append(b.chord)
    for key in br:
        added.add(_midpoint(*ridges[key]))
    added -= set(P.vertices)
    if set(D.listed_subdivision) != added:
        raise InvalidDomain(
            f"gamma_{i}: computed subdivision {sorted(map(fmt_vec, added))} "
            f"!= listed {sorted(map(fmt_vec, D.listed_subdivision))}"
        )
    vertices = tuple(sorted(set(P.vertices) | added))
    edges = set()
    for a, b in segments:
        edges.update(_split(a, b, vertices))
    return Subdivision(vertices, tuple(sorted(added)), tuple(sorted(edges)), tuple(bs), tuple(br))


# --- stabilizers and cells --------------------------------------------------


def point_stabilizer(G: CrystGroup, v: Vec3) -> PointGroup:
    """Point-group image of the stabilizer of v: all h with v - h v in the lattice."""
    L = G.lattice
    return PointGroup(h for h in G.point_group.elements if L.contains(sub(v, matvec(h, v))))


def stabilizer_lifts(G: CrystGroup, v: Vec3) -> list[AffineIsometry]:
    """The isometries (v - h v) + h fixing v; one per element of point_stabilizer."""
    return [AffineIsometry(sub(v, matvec(h, v)), h) for h in sorted(point_stabilizer(G, v).elements)]


def edge_stabilizer(G: CrystGroup, a: Vec3, b: Vec3) -> PointGroup:
    """Elements fixing the segment [a, b] pointwise."""
    d = sub(b, a)
    return PointGroup(h for h in point_stabilizer(G, a).elements if matvec(h, d) == d)


_S4_FULL = None


def negligibility_shortcut(G: CrystGroup, v: Vec3) -> bool | None:
    """True when 2v is outside the lattice (stabilizer then negligible), None if inconclusive."""
    global _S4_FULL
    if _S4_FULL is None:
        _S4_FULL = standard_point_group("S4+x(-1)")
    if not G.point_group.issubgroup(_S4_FULL):
        raise PreconditionViolated(f"{G.label}: point group is not inside S4+x(-1)")
    return True if not G.lattice.contains(scale(2, v)) else None


@dataclass(frozen=True)
class Cell:
    points: tuple[Vec3, ...]  # one point for a vertex, sorted endpoints for an edge

    @classmethod
    def vertex(cls, p: Vec3) -> "Cell":
        return cls((p,))

    @classmethod
    def edge(cls, a: Vec3, b: Vec3) -> "Cell":
        return cls(tuple(sorted((a, b))))

    @property
    def dim(self) -> int:
        return len(self.points) - 1

    @property
    def position(self) -> Vec3:
        return self.points[0] if self.dim == 0 else _midpoint(*self.points)

    def moved(self, g: AffineIsometry) -> "Cell":
        return Cell(tuple(sorted(g(p) for p in self.points)))

    def sort_key(self):
        return (self.dim, self.position, self.points)

    def __str__(self) -> str:
        if self.dim == 0:
            return fmt_vec(self.points[0])
        return f"[{fmt_vec(self.points[0])}, {fmt_vec(self.points[1])}]"


def cell_stabilizer(G: CrystGroup, c: Cell) -> PointGroup:
    return point_stabilizer(G, c.points[0]) if c.dim == 0 else edge_stabilizer(G, *c.points)


def same_orbit(G: CrystGroup, c1: Cell, c2: Cell) -> bool:
    if c1.dim != c2.dim:
        return False
    L = G.lattice
    for h in G.point_group.elements:
        p0 = matvec(h, c1.points[0])
        if c1.dim == 0:
            if L.contains(sub(c2.points[0], p0)):
                return True
            continue
        p1 = matvec(h, c1.points[1])
        for a, b in ((p0, p1), (p1, p0)):
            w = sub(c2.points[0], a)
            if L.contains(w) and add(w, b) == c2.points[1]:
                return True
    return False


@dataclass(frozen=True)
class CellEntry:
    cell: Cell
    stabilizer: PointGroup
    iso_type: str
    stabilizer_name: str | None

    @property
    def negligible(self) -> bool:
        return is_negligible_finite(self.iso_type)

    def to_json(self) -> dict:
        return {
            "dim": self.cell.dim,
            "points": [vec_to_json(p) for p in self.cell.points],
            "position": vec_to_json(self.cell.position),
            "stabilizer": self.stabilizer_name,
            "iso_type": self.iso_type,
            "order": len(self.stabilizer),
        }


@dataclass(frozen=True)
class CellComplex:
    """Orbit representatives of cells of dimension 0 and 1 with their stabilizers.

    Faces and the open polyhedron have stabilizers of order at most 2, so they
    never matter for the K-theory and are not listed.
    """

    group_label: str
    cells: tuple[CellEntry, ...]

    def of_dim(self, d: int) -> list[CellEntry]:
        return [c for c in self.cells if c.cell.dim == d]

    def non_negligible(self) -> "CellComplex":
        return CellComplex(self.group_label, tuple(c for c in self.cells if not c.negligible))

    def to_json(self) -> dict:
        return {"group": self.group_label, "cells": [c.to_json() for c in self.cells]}


def _entry(G: CrystGroup, c: Cell) -> CellEntry:
    S = cell_stabilizer(G, c)
    return CellEntry(c, S, finite_iso_type(S), identify_named(S))


def _orbit_reps(G: CrystGroup, candidates: Iterable[Cell]) -> list[Cell]:
    reps: list[list[Cell]] = []
    for c in sorted(set(candidates), key=Cell.sort_key):
        for orbit in reps:
            if same_orbit(G, orbit[0], c):
                orbit.append(c)
                break
        else:
            reps.append([c])
    return [min(orbit, key=Cell.sort_key) for orbit in reps]


@lru_cache(maxsize=None)
def domain_cells(i: int) -> CellComplex:
    """All vertex and edge orbits of the subdivided domain of the i-th maximal group."""
    G = maximal_group(i)
    sd = subdivide(i)
    cands = [Cell.vertex(v) for v in sd.vertices] + [Cell.edge(a, b) for a, b in sd.edges]
    entries = [_entry(G, c) for c in _orbit_reps(G, cands)]
    return CellComplex(G.label, tuple(sorted(entries, key=lambda e: e.cell.sort_key())))


def right_transversal(H: PointGroup, H_sub: PointGroup) -> list:
    """One representative (the least matrix) of each right coset H_sub h."""
    seen: set = set()
    reps = []
    for h in sorted(H.elements):
        if h in seen:
            continue
        coset = {matmul(k, h) for k in H_sub.elements}
        seen |= coset
        reps.append(min(coset))
    return reps


def refine_stabilizers(G: CrystGroup, G_sub: CrystGroup, cells: CellComplex) -> CellComplex:
    """Non-negligible cells for a subgroup on the same lattice, from those of G."""
    same_lattice = G.lattice.basis == G_sub.lattice.basis
    if not same_lattice or not G_sub.point_group.issubgroup(G.point_group):
        raise NotASubgroup(f"{G_sub.label} is not a subgroup of {G.label} on the same lattice")
    T = right_transversal(G.point_group, G_sub.point_group)
    moved = [c.cell.moved(AffineIsometry.pure(t)) for t in T for c in cells.cells]
    entries = [_entry(G_sub, c) for c in _orbit_reps(G_sub, moved)]
    keep = [e for e in entries if not e.negligible]
    return CellComplex(G_sub.label, tuple(sorted(keep, key=lambda e: e.cell.sort_key())))


@lru_cache(maxsize=None)
def cell_complex(label: str) -> CellComplex:
    """Non-negligible cell orbits of a catalog group."""
    G = lookup(label)
    top = maximal_group(G.lattice_index)
    base = domain_cells(G.lattice_index).non_negligible()
    if G.label == top.label:
        return base
    return refine_stabilizers(top, G, base)


def domain_report(i: int) -> dict:
    """Everything the ``domain`` command prints about the i-th fundamental polyhedron."""
    D = load_domain(i)
    rep = verify_subproper(D.polyhedron, D.pairing)
    sd = subdivide(i)
    return {
        "group": D.group.label,
        "sides": [
            {"normal": vec_to_json(s.normal), "offset": fmt_scalar(s.offset)} for s in D.polyhedron.sides
        ],
        "pairings": [
            {"side": k + 1, "partner": D.pairing.partner[k] + 1, "isometry": g.to_json()}
            for k, g in sorted(D.pairing.phi.items())
        ],
        "vertices": [vec_to_json(v) for v in D.polyhedron.vertices],
        "subdivision_vertices": [vec_to_json(v) for v in sd.added],
        "bad_sides": [{"side": b.side + 1, "case": b.case} for b in sd.bad_sides],
        "bad_ridges": [[a + 1, b + 1] for a, b in sd.bad_ridges],
        "cycles": [
            {
                "ridges": [[a + 1, b + 1] for a, b in c.ridges],
                "kind": c.kind,
                "angle_sum": str(c.angle_sum),
                "ok": c.ok,
            }
            for c in rep.cycles
        ],
        "generates_group": generates_group(D.group, D.pairing.phi.values()),
    }


__all__ = [
    "Angle",
    "Cell",
    "CellComplex",
    "CellEntry",
    "Polyhedron",
    "Side",
    "SidePairing",
    "arccos_angle",
    "cell_complex",
    "dihedral_angle",
    "dihedral_cosine",
    "domain_cells",
    "load_domain",
    "negligibility_shortcut",
    "point_stabilizer",
    "refine_stabilizers",
    "subdivide",
    "verify_subproper",
]
