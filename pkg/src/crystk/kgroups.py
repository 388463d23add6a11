"""Formal lower K-group expressions and the finite-stabilizer part of the K-theory.

A :class:`KExpr` is a direct sum of copies of Z, Z/2, Z/4, the countably
infinite sums of Z/2 and Z/4, and the symbolic Nil groups NK1(ZD4), NK1(ZD6).
No other summand ever shows up for these groups, so anything else is refused.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, fields
from typing import Mapping, Sequence

from crystk.cell_geometry import Cell, CellComplex, cell_complex, same_orbit
from crystk.crystal_classes import CrystGroup, lookup
from crystk.intlinalg import integer_kernel, smith_normal_form
from crystk.point_groups import FIN_TYPES, UnrecognizedType, canonical_type


class UnknownType(KeyError):
    pass


class UnsupportedTorsion(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class MissingCellData(LookupError):
    pass


class SpectralSequenceConflict(AssertionError):
    """Both E2_{0,0} and E2_{1,-1} came out nonzero, so the extension is ambiguous."""


@dataclass(frozen=True)
class KExpr:
    free_rank: int = 0
    z2: int = 0
    z4: int = 0
    inf_z2: bool = False
    inf_z4: bool = False
    nk_d4: int = 0
    nk_d6: int = 0

    def __post_init__(self):
        for f in fields(self):
            x = getattr(self, f.name)
            if not isinstance(x, bool) and x < 0:
                raise ValueError(f"negative multiplicity for {f.name}")

    @classmethod
    def zero(cls) -> "KExpr":
        return cls()

    @classmethod
    def from_invariants(cls, torsion: Sequence[int], free_rank: int = 0) -> "KExpr":
        """Build from invariant factors; factors equal to 1 are dropped."""
        z2 = z4 = 0
        for d in torsion:
            if d == 1:
                continue
            if d == 2:
                z2 += 1
            elif d == 4:
                z4 += 1
            else:
                raise UnsupportedTorsion(f"Z/{d} has no place in a K-group expression here")
        return cls(free_rank=free_rank, z2=z2, z4=z4)

    def is_zero(self) -> bool:
        return self == KExpr()

    def __add__(self, other: "KExpr") -> "KExpr":
        # infinite sums absorb copies of themselves; finite counts are kept as printed
        return KExpr(
            self.free_rank + other.free_rank,
            self.z2 + other.z2,
            self.z4 + other.z4,
            self.inf_z2 or other.inf_z2,
            self.inf_z4 or other.inf_z4,
            self.nk_d4 + other.nk_d4,
            self.nk_d6 + other.nk_d6,
        )

    def times(self, n: int) -> "KExpr":
        out = KExpr()
        for _ in range(n):
            out = out + self
        return out

    def __str__(self) -> str:
        parts = []

        def power(base: str, n: int) -> str:
            return base if n == 1 else f"{base}^{n}"

        if self.free_rank:
            parts.append(power("Z", self.free_rank))
        if self.z2:
            parts.append(power("(Z/2)", self.z2) if self.z2 > 1 else "Z/2")
        if self.z4:
            parts.append(power("(Z/4)", self.z4) if self.z4 > 1 else "Z/4")
        if self.inf_z2:
            parts.append("inf(Z/2)")
        if self.inf_z4:
            parts.append("inf(Z/4)")
        for n, name in ((self.nk_d4, "NK1(ZD4)"), (self.nk_d6, "NK1(ZD6)")):
            if n:
                parts.append(name if n == 1 else f"{n}*{name}")
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {
            "Z": self.free_rank,
            "Z2": self.z2,
            "Z4": self.z4,
            "inf_Z2": self.inf_z2,
            "inf_Z4": self.inf_z4,
            "NK1_ZD4": self.nk_d4,
            "NK1_ZD6": self.nk_d6,
        }

    @classmethod
    def from_json(cls, d: Mapping) -> "KExpr":
        return cls(
            int(d.get("Z", 0)),
            int(d.get("Z2", 0)),
            int(d.get("Z4", 0)),
            bool(d.get("inf_Z2", False)),
            bool(d.get("inf_Z4", False)),
            int(d.get("NK1_ZD4", 0)),
            int(d.get("NK1_ZD6", 0)),
        )

    @classmethod
    def parse(cls, text: str) -> "KExpr":
        """Inverse of ``str``; also accepts a few loose spellings like "2NK1(ZD4)"."""
        s = text.strip()
        if s in ("", "0"):
            return cls()
        out = cls()
        for term in s.split("+"):
            out = out + _parse_term(term.strip())
        return out


_TERM_PATTERNS = [
    (re.compile(r"^Z(?:\^(\d+))?$"), lambda n: KExpr(free_rank=n)),
    (re.compile(r"^\(?Z/2\)?(?:\^(\d+))?$"), lambda n: KExpr(z2=n)),
    (re.compile(r"^\(?Z/4\)?(?:\^(\d+))?$"), lambda n: KExpr(z4=n)),
    (re.compile(r"^(\d+)?\*?NK1\(ZD4\)$"), lambda n: KExpr(nk_d4=n)),
    (re.compile(r"^(\d+)?\*?NK1\(ZD6\)$"), lambda n: KExpr(nk_d6=n)),
]


def _parse_term(term: str) -> KExpr:
    t = term.replace(" ", "")
    if t == "inf(Z/2)":
        return KExpr(inf_z2=True)
    if t == "inf(Z/4)":
        return KExpr(inf_z4=True)
    for pat, build in _TERM_PATTERNS:
        m = pat.match(t)
        if m:
            return build(int(m.group(1)) if m.group(1) else 1)
    if re.match(r"^\(?Z/\d+\)?", t):
        raise UnsupportedTorsion(term)
    raise ValueError(f"cannot parse K-group term {term!r}")


Z = KExpr(free_rank=1)

# Nonzero lower K-groups of the finite cell stabilizers, by isomorphism type.
# Wh vanishes for all of them and every group vanishes in degrees <= -2.
FINITE_K_GROUPS: dict[str, dict[int, KExpr]] = {
    "Z/6": {-1: KExpr(free_rank=1)},
    "Z/4xZ/2": {0: KExpr(z2=1)},
    "Z/6xZ/2": {-1: KExpr(free_rank=3), 0: KExpr(z2=2)},
    "D2xZ/2": {0: KExpr(z2=1)},
    "D6": {-1: KExpr(free_rank=1)},
    "D4xZ/2": {0: KExpr(z4=1)},
    "D6xZ/2": {-1: KExpr(free_rank=3), 0: KExpr(z2=2)},
    "A4xZ/2": {-1: KExpr(free_rank=1), 0: KExpr(z2=1)},
    "S4xZ/2": {-1: KExpr(free_rank=1), 0: KExpr(z4=1)},
}


def wh_table(t: str, q: int, table: Mapping[str, Mapping[int, KExpr]] | None = None) -> KExpr:
    """Wh_q of a finite stabilizer type (K_-1, K0~ and Wh for q = -1, 0, 1)."""
    try:
        tag = canonical_type(t)
    except UnrecognizedType:
        raise UnknownType(t) from None
    if q > 1:
        raise ValueError("only q <= 1 is tabulated")
    data = FINITE_K_GROUPS if table is None else table
    return data.get(tag, {}).get(q, KExpr())


def _check_types(types: Sequence[str]) -> None:
    for t in types:
        if t not in FIN_TYPES:
            raise UnknownType(t)


# K_{-1} maps induced by the stabilizer inclusions that occur along edges.
# Each Z summand of the edge group goes onto one coordinate of the vertex
# group (a split injection; for the Z^3 targets the other two coordinates are
# untouched).
K_MINUS1_INCLUSIONS: dict[tuple[str, str], list[list[int]]] = {
    ("D6", "D6xZ/2"): [[1], [0], [0]],
    ("Z/6", "Z/6xZ/2"): [[1], [0], [0]],
    ("Z/6", "D6"): [[1]],
}


def induced_map(src: str, dst: str, q: int, table=None) -> list[list[int]]:
    """Matrix (rows = rank of target) of Wh_q(src) -> Wh_q(dst) on free parts."""
    rs = wh_table(src, q, table).free_rank
    rd = wh_table(dst, q, table).free_rank
    if rs == 0 or rd == 0:
        return [[0] * rs for _ in range(rd)]
    if src == dst:
        return [[int(i == j) for j in range(rs)] for i in range(rd)]
    if (src, dst) not in K_MINUS1_INCLUSIONS or q != -1:
        raise MissingCellData(f"no induced map recorded for {src} -> {dst} in degree {q}")
    m = K_MINUS1_INCLUSIONS[(src, dst)]
    if len(m) != rd or any(len(r) != rs for r in m):
        raise DimensionMismatch(f"{src} -> {dst}: recorded map has the wrong shape for the table")
    return [list(r) for r in m]


def chain_homology(boundary: Sequence[Sequence[int]], rows: int, cols: int) -> tuple[KExpr, KExpr]:
    """(cokernel, kernel) of a map Z^cols -> Z^rows given as a rows x cols matrix."""
    if len(boundary) != rows or any(len(r) != cols for r in boundary):
        raise DimensionMismatch(f"expected a {rows}x{cols} matrix")
    if rows == 0 or cols == 0:
        return KExpr(free_rank=rows), KExpr(free_rank=cols)
    factors, rank = smith_normal_form(boundary)
    coker = KExpr.from_invariants(factors, rows - rank)
    ker = KExpr(free_rank=len(integer_kernel(boundary, cols)))
    return coker, ker


@dataclass(frozen=True)
class QuinnComplex:
    """Vertex and edge orbits with their stabilizer types, plus the edge-to-vertex incidences."""

    group_label: str
    vertex_types: tuple[str, ...]
    edge_types: tuple[str, ...]
    # for each edge: ((vertex index, sign), ...), one pair per endpoint
    incidences: tuple[tuple[tuple[int, int], ...], ...]

    def ranks(self, q: int, table=None) -> tuple[list[int], list[int]]:
        return (
            [wh_table(t, q, table).free_rank for t in self.vertex_types],
            [wh_table(t, q, table).free_rank for t in self.edge_types],
        )

    def boundary(self, q: int, table=None) -> list[list[int]]:
        vr, er = self.ranks(q, table)
        voff = [sum(vr[:i]) for i in range(len(vr))]
        eoff = [sum(er[:i]) for i in range(len(er))]
        M = [[0] * sum(er) for _ in range(sum(vr))]
        for e, inc in enumerate(self.incidences):
            for v, sign in inc:
                block = induced_map(self.edge_types[e], self.vertex_types[v], q, table)
                for i, row in enumerate(block):
                    for j, x in enumerate(row):
                        M[voff[v] + i][eoff[e] + j] += sign * x
        return M

    def homology(self, q: int, table=None) -> tuple[KExpr, KExpr]:
        vr, er = self.ranks(q, table)
        return chain_homology(self.boundary(q, table), sum(vr), sum(er))


def quinn_complex(G: CrystGroup | str, cells: CellComplex | None = None) -> QuinnComplex:
    G = lookup(G) if isinstance(G, str) else G
    cells = cells if cells is not None else cell_complex(G.label)
    verts = cells.of_dim(0)
    edges = cells.of_dim(1)
    incidences = []
    for e in edges:
        inc = []
        for sign, p in ((-1, e.cell.points[0]), (1, e.cell.points[1])):
            hit = [k for k, v in enumerate(verts) if same_orbit(G, v.cell, Cell.vertex(p))]
            if len(hit) != 1:
                raise MissingCellData(f"{G.label}: endpoint of edge {e.cell} has no vertex orbit")
            inc.append((hit[0], sign))
        incidences.append(tuple(inc))
    return QuinnComplex(
        G.label,
        tuple(v.iso_type for v in verts),
        tuple(e.iso_type for e in edges),
        tuple(incidences),
    )


def _direct_sum(types: Sequence[str], q: int, table=None) -> KExpr:
    out = KExpr()
    for t in types:
        out = out + wh_table(t, q, table)
    return out


def assemble_hfin(G: CrystGroup | str, table=None) -> tuple[KExpr, KExpr, KExpr]:
    """Equivariant homology of the proper part: (H_-1, H_0, H_1)."""
    C = quinn_complex(G)
    _check_types(C.vertex_types + C.edge_types)
    if not C.edge_types:
        return _direct_sum(C.vertex_types, -1, table), _direct_sum(C.vertex_types, 0, table), KExpr()
    e0m1, e1m1 = C.homology(-1, table)
    if not _direct_sum(C.edge_types, 0, table).is_zero():
        raise MissingCellData(f"{C.group_label}: an edge stabilizer has nonzero K0~")
    e00 = _direct_sum(C.vertex_types, 0, table)
    if not e00.is_zero() and not e1m1.is_zero():
        raise SpectralSequenceConflict(f"{C.group_label}: E2_00 = {e00} and E2_1,-1 = {e1m1}")
    return e0m1, e00 + e1m1, KExpr()


__all__ = [
    "DimensionMismatch",
    "KExpr",
    "MissingCellData",
    "QuinnComplex",
    "SpectralSequenceConflict",
    "FINITE_K_GROUPS",
    "UnknownType",
    "UnsupportedTorsion",
    "assemble_hfin",
    "chain_homology",
    "induced_map",
    "quinn_complex",
    "smith_normal_form",
    "wh_table",
]
