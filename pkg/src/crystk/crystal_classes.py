"""The seven lattices and the 73 split crystallographic groups, with validity checks."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from crystk.exact import (
    Lattice,
    Mat3,
    dot,
    inverse,
    is_integral,
    matmul,
    primitive_integer,
    vec,
)
from crystk.point_groups import (
    PointGroup,
    canonical_group_name,
    finite_iso_type,
    pole_data,
    preserves_lattice,
    standard_point_group,
)
from crystk.exact import MINUS_IDENTITY


class NonIntegralResult(ValueError):
    pass


class CatalogInconsistent(AssertionError):
    pass


class NotInCatalog(KeyError):
    pass


H = Fraction(1, 2)
T3 = Fraction(1, 3)

LATTICES: dict[int, Lattice] = {
    1: Lattice([vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1)], "L1"),
    2: Lattice([vec(H, H, H), vec(0, 1, 0), vec(0, 0, 1)], "L2"),
    3: Lattice([vec(H, H, 0), vec(H, 0, H), vec(0, H, H)], "L3"),
    4: Lattice([vec(H, 0, H), vec(0, 1, 0), vec(0, 0, 1)], "L4"),
    5: Lattice([vec(1, 1, 1), vec(1, -1, 0), vec(0, -1, 1)], "L5"),
    6: Lattice([vec(2 * T3, -T3, 2 * T3), vec(1, -1, 0), vec(0, -1, 1)], "L6"),
    7: Lattice([vec(1, 1, 1), vec(T3, -2 * T3, T3), vec(0, -1, 1)], "L7"),
}

_CUBIC_BLOCK = [
    "S4+x(-1)", "S4+", "S'_4", "A4+x(-1)", "A4+", "D''_4",
    "D4+x(-1)", "D4+", "C'_2", "D2+x(-1)", "D2+", "C'_4",
    "C4+x(-1)", "C4+", "D'_2", "C2+x(-1)", "C2+", "D'_4",
]  # fmt: skip

PAIRINGS: dict[int, list[str]] = {
    1: _CUBIC_BLOCK + ["C1+x(-1)", "C1+", "Dhat'_4"],
    2: _CUBIC_BLOCK + ["Dhat'_4"],
    3: ["S4+x(-1)", "S4+", "S'_4", "A4+x(-1)", "A4+", "D'_2", "D2+x(-1)", "D2+"],
    4: ["D2+x(-1)", "D2+", "D'_2", "D'_2_2"],
    5: [
        "D6+x(-1)", "D6+", "C'_6", "C6+x(-1)", "D'_6", "C6+",
        "D3+x(-1)", "Dhat'_6", "C3+", "C3+x(-1)", "D'_3", "D3+", "D''_6",
    ],  # fmt: skip
    6: ["D3+x(-1)", "D3+", "D'_3", "C3+x(-1)", "C3+"],
    7: ["D3+x(-1)", "D3+", "D'_3"],
}

MAXIMAL = {1: "S4+x(-1)", 2: "S4+x(-1)", 3: "S4+x(-1)", 4: "D2+x(-1)", 5: "D6+x(-1)", 6: "D3+x(-1)", 7: "D3+x(-1)"}


@dataclass(frozen=True)
class CrystGroup:
    lattice: Lattice
    point_group: PointGroup
    label: str
    lattice_index: int

    @property
    def name(self) -> str:
        return self.point_group.name or ""

    def __repr__(self) -> str:
        return f"CrystGroup({self.label})"

    def to_json(self) -> dict:
        from crystk.exact import mat_to_json

        return {
            "label": self.label,
            "lattice_basis": self.lattice.to_json(),
            "point_group_name": self.name,
            "point_group_elements": [mat_to_json(h) for h in sorted(self.point_group.elements)],
        }


def make_label(name: str, index: int) -> str:
    return f"{name}_{index}"


@lru_cache(maxsize=None)
def catalog() -> tuple[CrystGroup, ...]:
    out = []
    for i, names in PAIRINGS.items():
        L = LATTICES[i]
        for n in names:
            H_ = standard_point_group(n)
            assert preserves_lattice(H_, L), f"{n} does not preserve {L!r}"
            out.append(CrystGroup(L, H_, make_label(n, i), i))
    return tuple(out)


@lru_cache(maxsize=None)
def _by_label() -> dict[str, CrystGroup]:
    return {g.label: g for g in catalog()}


def maximal_group(i: int) -> CrystGroup:
    return _by_label()[make_label(MAXIMAL[i], i)]


def lookup(label: str) -> CrystGroup:
    """Find a catalog entry by label; accepts "Gamma_i" and loose point-group spellings."""
    s = label.strip()
    table = _by_label()
    if s in table:
        return table[s]
    low = s.lower().replace("γ", "gamma")
    for prefix in ("gamma_", "gamma"):
        if low.startswith(prefix) and low[len(prefix):].isdigit():
            i = int(low[len(prefix):])
            if i in MAXIMAL:
                return maximal_group(i)
    head, sep, tail = s.rpartition("_")
    if sep and tail.isdigit():
        try:
            key = make_label(canonical_group_name(head), int(tail))
        except KeyError:
            raise NotInCatalog(label) from None
        if key in table:
            return table[key]
    raise NotInCatalog(label)


def parent_of(G: CrystGroup) -> CrystGroup:
    return maximal_group(G.lattice_index)


IntMat = tuple[tuple[int, int, int], tuple[int, int, int], tuple[int, int, int]]


@dataclass(frozen=True)
class IntegralRep:
    matrices: frozenset[IntMat]


def _to_int(m: Mat3) -> IntMat:
    if not all(is_integral(row) for row in m):
        raise NonIntegralResult(f"non-integral matrix {m}")
    return tuple(tuple(int(x) for x in row) for row in m)  # type: ignore[return-value]


def integral_representation(G: CrystGroup) -> IntegralRep:
    B = G.lattice.matrix
    Bi = inverse(B)
    return IntegralRep(frozenset(_to_int(matmul(matmul(Bi, h), B)) for h in G.point_group.elements))


@lru_cache(maxsize=None)
def _unimodular_candidates(bound: int):
    import numpy as np

    r = np.arange(-bound, bound + 1)
    grid = np.stack(np.meshgrid(*([r] * 9), indexing="ij"), axis=-1).reshape(-1, 9)
    m = grid.reshape(-1, 3, 3)
    d = np.rint(np.linalg.det(m.astype(float))).astype(int)
    return m[np.abs(d) == 1]


def bounded_conjugacy(rep1: IntegralRep, rep2: IntegralRep, bound: int = 2) -> IntMat | None:
    """Search unimodular P with entries in [-bound, bound] and P rep1 P^-1 = rep2."""
    import numpy as np

    if len(rep1.matrices) != len(rep2.matrices):
        return None
    if rep1 == rep2:
        return ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    P = _unimodular_candidates(bound)
    targets = np.array(sorted(rep2.matrices))
    alive = np.ones(len(P), dtype=bool)
    for g in sorted(rep1.matrices):
        ga = np.array(g)
        left = P @ ga  # P g
        ok = np.zeros(len(P), dtype=bool)
        for t in targets:
            ok |= np.all(np.einsum("ij,njk->nik", t, P) == left, axis=(1, 2))
        alive &= ok
        if not alive.any():
            return None
    hit = P[alive][0]
    return tuple(tuple(int(x) for x in row) for row in hit)  # type: ignore[return-value]


def invariant_tuple(G: CrystGroup) -> tuple:
    """Cheap arithmetic-class invariants used to separate catalog entries."""
    H_ = G.point_group
    signature = []
    for rep, alpha in pole_data(H_).orbits:
        v = vec(*rep)
        c = primitive_integer(G.lattice.coords(v))
        w = G.lattice.point(c)
        signature.append((alpha, dot(w, w)))
    return (
        finite_iso_type(H_),
        len(H_),
        MINUS_IDENTITY in H_,
        G.lattice.covolume,
        tuple(sorted(signature)),
    )


def verify_catalog(bound: int = 2) -> dict:
    groups = catalog()
    for G in groups:
        if not preserves_lattice(G.point_group, G.lattice):
            raise CatalogInconsistent(f"{G.label}: point group does not preserve lattice")
        integral_representation(G)
    labels = [g.label for g in groups]
    if len(set(labels)) != len(labels):
        raise CatalogInconsistent("duplicate labels")
    buckets: dict[tuple, list[CrystGroup]] = {}
    for G in groups:
        buckets.setdefault(invariant_tuple(G), []).append(G)
    collisions = []
    for members in buckets.values():
        for a, b in combinations(members, 2):
            w = bounded_conjugacy(integral_representation(a), integral_representation(b), bound)
            if w is not None:
                raise CatalogInconsistent(f"{a.label} and {b.label} are conjugate via {w}")
            collisions.append((a.label, b.label))
    return {"valid": len(groups), "collisions": collisions, "distinct_at_bound": bound, "unresolved": 0}
