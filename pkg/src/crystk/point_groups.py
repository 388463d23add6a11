"""Finite orthogonal matrix groups: closure, the named point groups, poles and iso types."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Callable, Hashable, Iterable, Sequence, TypeVar

from crystk.exact import (
    IDENTITY,
    MINUS_IDENTITY,
    Lattice,
    Mat3,
    NotOrthogonal,
    Vec3,
    cross,
    det,
    is_orthogonal,
    mat,
    matmul,
    matvec,
    primitive_integer,
    transpose,
    vec,
)

CLOSURE_BOUND = 96


class ClosureBoundExceeded(RuntimeError):
    pass


class UnknownName(KeyError):
    pass


class UnrecognizedType(ValueError):
    pass


class PointGroup:
    """A finite group of orthogonal 3x3 rational matrices, stored by its elements."""

    def __init__(self, elements: Iterable[Mat3], name: str | None = None):
        self.elements: frozenset[Mat3] = frozenset(elements)
        self.name = name

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(sorted(self.elements))

    def __contains__(self, m: Mat3) -> bool:
        return m in self.elements

    def __eq__(self, other: object) -> bool:
        return isinstance(other, PointGroup) and self.elements == other.elements

    def __hash__(self) -> int:
        return hash(self.elements)

    def __repr__(self) -> str:
        return f"PointGroup({self.name or '?'}, order={len(self)})"

    @property
    def order(self) -> int:
        return len(self.elements)

    def issubgroup(self, other: "PointGroup") -> bool:
        return self.elements <= other.elements

    def intersection(self, other: "PointGroup") -> "PointGroup":
        return PointGroup(self.elements & other.elements)

    def rotations(self) -> "PointGroup":
        if "_rotations" not in self.__dict__:
            self._rotations = PointGroup(h for h in self.elements if det(h) == 1)
        return self._rotations

    def stabilizer_of_vector(self, v: Vec3) -> "PointGroup":
        return PointGroup(h for h in self.elements if matvec(h, v) == v)

    def conjugate(self, g: Mat3) -> "PointGroup":
        gi = transpose(g)
        return PointGroup(matmul(matmul(g, h), gi) for h in self.elements)

    def to_json(self) -> dict:
        from crystk.exact import mat_to_json

        return {"name": self.name, "elements": [mat_to_json(h) for h in sorted(self.elements)]}


def generate_group(gens: Sequence[Mat3], name: str | None = None) -> PointGroup:
    for g in gens:
        if not is_orthogonal(g):
            raise NotOrthogonal(f"generator is not orthogonal: {g}")
    elements = {IDENTITY}
    frontier = [IDENTITY]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = matmul(x, g)
                if y not in elements:
                    elements.add(y)
                    nxt.append(y)
                    if len(elements) > CLOSURE_BOUND:
                        raise ClosureBoundExceeded(f"closure exceeds {CLOSURE_BOUND} elements")
        frontier = nxt
    return PointGroup(elements, name)


def element_order(m: Mat3) -> int:
    x, n = m, 1
    while x != IDENTITY:
        x = matmul(x, m)
        n += 1
        if n > CLOSURE_BOUND:
            raise ClosureBoundExceeded("element of unbounded order")
    return n


# --- named matrices ---------------------------------------------------------

P3 = mat([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
SWAP_XY = mat([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
SWAP_YZ = mat([[1, 0, 0], [0, 0, 1], [0, 1, 0]])
SWAP_XZ = mat([[0, 0, 1], [0, 1, 0], [1, 0, 0]])
HEX6 = mat([[2, 2, -1], [-1, 2, 2], [2, -1, 2]], Fraction(1, 3))
ANTI_XY = mat([[0, -1, 0], [-1, 0, 0], [0, 0, -1]])

MATRIX_A = SWAP_XY
MATRIX_B = mat([[1, 0, 0], [0, 1, 0], [0, 0, -1]])
MATRIX_C = mat([[-1, 0, 0], [0, -1, 0], [0, 0, 1]])
MATRIX_D = mat([[2, -1, 2], [-1, 2, 2], [2, 2, -1]], Fraction(1, 3))
MATRIX_E = mat([[1, -2, -2], [-2, 1, -2], [-2, -2, 1]], Fraction(1, 3))
MATRIX_F = SWAP_XZ


def diag(a: int, b: int, c: int) -> Mat3:
    return mat([[a, 0, 0], [0, b, 0], [0, 0, c]])


_ROTATION_GENS: dict[str, list[Mat3]] = {
    "C1+": [IDENTITY],
    "C2+": [diag(-1, -1, 1)],
    "C3+": [P3],
    "C4+": [mat([[0, -1, 0], [1, 0, 0], [0, 0, 1]])],
    "C6+": [HEX6],
    "D2+": [diag(-1, 1, -1), diag(-1, -1, 1)],
    "D3+": [P3, ANTI_XY],
    "D4+": [mat([[0, 1, 0], [-1, 0, 0], [0, 0, 1]]), diag(1, -1, -1)],
    "D6+": [HEX6, ANTI_XY],
    "A4+": [diag(1, -1, -1), P3],
    "S4+": [mat([[1, 0, 0], [0, 0, 1], [0, -1, 0]]), P3],
}

_PRIMED_GENS: dict[str, list[Mat3]] = {
    "C'_2": [diag(1, 1, -1)],
    "C'_4": [mat([[0, 1, 0], [-1, 0, 0], [0, 0, -1]])],
    "C'_6": [mat([[-2, -2, 1], [1, -2, -2], [-2, 1, -2]], Fraction(1, 3))],
    "D'_2": [diag(-1, 1, 1), diag(1, -1, 1)],
    "D'_3": [P3, SWAP_XY],
    "D'_4": [mat([[0, -1, 0], [-1, 0, 0], [0, 0, 1]]), diag(1, -1, -1)],
    "D''_4": [mat([[0, -1, 0], [-1, 0, 0], [0, 0, 1]]), diag(-1, 1, 1)],
    "D'_6": [mat([[1, -2, -2], [-2, -2, 1], [-2, 1, -2]], Fraction(1, 3)), SWAP_XY],
    "D''_6": [mat([[-1, 2, 2], [2, 2, -1], [2, -1, 2]], Fraction(1, 3)), SWAP_XY],
    "S'_4": [P3, mat([[0, 0, -1], [0, 1, 0], [-1, 0, 0]])],
}


def _signed(perm: Mat3, want_det: int | None) -> list[Mat3]:
    out = []
    for signs in product((1, -1), repeat=3):
        m = matmul(diag(*signs), perm)
        if want_det is None or det(m) == want_det:
            out.append(m)
    return out


_EXTRA_GENS: dict[str, list[Mat3]] = {
    "Dhat'_4": [mat([[0, 1, 0], [1, 0, 0], [0, 0, -1]]), diag(-1, 1, 1)],
    "Dhat'_6": [mat([[-1, 2, 2], [2, 2, -1], [2, -1, 2]], Fraction(1, 3)), ANTI_XY],
    "D+_4_1": _signed(IDENTITY, 1) + _signed(SWAP_YZ, 1),
    "D+_4_2": _signed(IDENTITY, 1) + _signed(SWAP_XZ, 1),
    "D'_2_1": [diag(1, -1, 1), diag(1, 1, -1)],
    "D'_2_2": [diag(-1, 1, 1), diag(1, 1, -1)],
    "<A,B>": [MATRIX_A, MATRIX_B],
    "<A,C>": [MATRIX_A, MATRIX_C],
    "<A,D>": [MATRIX_A, MATRIX_D],
    "<D,E>": [MATRIX_D, MATRIX_E],
    "<E,F>": [MATRIX_E, MATRIX_F],
    "D2x(-1)": [MATRIX_A, MATRIX_C, MINUS_IDENTITY],
}
_EXTRA_GENS["D+_4_1x(-1)"] = _EXTRA_GENS["D+_4_1"] + [MINUS_IDENTITY]
_EXTRA_GENS["D+_4_2x(-1)"] = _EXTRA_GENS["D+_4_2"] + [MINUS_IDENTITY]

ORIENTATION_PRESERVING = list(_ROTATION_GENS)
WITH_INVERSION = [f"{n}x(-1)" for n in ORIENTATION_PRESERVING]
PRIMED = list(_PRIMED_GENS)
STANDARD_NAMES = ORIENTATION_PRESERVING + WITH_INVERSION + PRIMED
NONSTANDARD_NAMES = list(_EXTRA_GENS)

_GENERATORS: dict[str, list[Mat3]] = {}
_GENERATORS.update(_ROTATION_GENS)
_GENERATORS.update({f"{n}x(-1)": g + [MINUS_IDENTITY] for n, g in _ROTATION_GENS.items()})
_GENERATORS.update(_PRIMED_GENS)
_GENERATORS.update(_EXTRA_GENS)


def canonical_group_name(name: str) -> str:
    """Map loose spellings ("D4''", "D''4", "D'3", "Dhat'4") to the registry name."""
    s = name.strip().replace(" ", "").replace("×", "x")
    if s in _GENERATORS:
        return s
    m = re.fullmatch(r"(Dhat|[CDS])(\d)('+)((?:_\d)?)", s)  # D4'', C2', D4''
    if m is None:
        m2 = re.fullmatch(r"(Dhat|[CDS])('+)_?(\d)((?:_\d)?)", s)  # D''4, D'_3, D'2_2
        if m2 is not None:
            letter, primes, digit, sub = m2.groups()
            cand = f"{letter}{primes}_{digit}{sub}"
            if cand in _GENERATORS:
                return cand
    else:
        letter, digit, primes, sub = m.groups()
        cand = f"{letter}{primes}_{digit}{sub}"
        if cand in _GENERATORS:
            return cand
    raise UnknownName(name)


@lru_cache(maxsize=None)
def standard_point_group(name: str) -> PointGroup:
    key = canonical_group_name(name)
    return generate_group(_GENERATORS[key], key)


def named_group(name: str) -> PointGroup:
    return standard_point_group(name)


def all_named_groups() -> list[str]:
    return list(_GENERATORS)


def identify_named(G: PointGroup, candidates: Iterable[str] | None = None) -> str | None:
    """Registry name whose element set equals G exactly, if any."""
    for n in candidates if candidates is not None else _GENERATORS:
        if standard_point_group(n).elements == G.elements:
            return n
    return None


def preserves_lattice(H: PointGroup, L: Lattice) -> bool:
    return all(L.contains(matvec(h, b)) for h in H.elements for b in L.basis)


# --- poles --------------------------------------------------------------------


@dataclass(frozen=True)
class PoleData:
    orbits: tuple[tuple[tuple[int, int, int], int], ...]

    @property
    def orders(self) -> tuple[int, ...]:
        return tuple(a for _, a in self.orbits)


def rotation_axis(h: Mat3) -> tuple[int, int, int]:
    """Primitive integer direction of the fixed line of a nontrivial rotation."""
    m = tuple(tuple(h[i][j] - IDENTITY[i][j] for j in range(3)) for i in range(3))
    for i in range(3):
        for j in range(i + 1, 3):
            c = cross(m[i], m[j])  # type: ignore[arg-type]
            if any(c):
                return primitive_integer(c)
    raise ValueError("identity has no axis")


def _act_direction(h: Mat3, d: tuple[int, int, int]) -> tuple[int, int, int]:
    return primitive_integer(matvec(h, vec(*d)))


def _canonical_rep(orbit: Iterable[tuple[int, int, int]]) -> tuple[int, int, int]:
    pts = list(orbit)
    pos = [p for p in pts if p[0] > 0]
    if not pos:
        pos = [p for p in pts if next(x for x in p if x != 0) > 0] or pts
    return min(pos)


def pole_data(H: PointGroup) -> PoleData:
    rot = H.rotations()
    poles: set[tuple[int, int, int]] = set()
    for h in rot.elements:
        if h != IDENTITY:
            a = rotation_axis(h)
            poles.add(a)
            poles.add((-a[0], -a[1], -a[2]))
    seen: set[tuple[int, int, int]] = set()
    orbits = []
    for p in sorted(poles):
        if p in seen:
            continue
        orbit = {_act_direction(h, p) for h in rot.elements}
        seen |= orbit
        alpha = sum(1 for h in rot.elements if _act_direction(h, p) == p)
        orbits.append((_canonical_rep(orbit), alpha))
    orbits.sort(key=lambda t: (t[1], t[0]))
    lhs = 2 - Fraction(2, len(rot))
    rhs = sum((1 - Fraction(1, a) for _, a in orbits), Fraction(0))
    if lhs != rhs:
        raise AssertionError(f"pole counting identity fails for {H!r}: {lhs} != {rhs}")
    return PoleData(tuple(orbits))


# --- abstract isomorphism types -------------------------------------------------

T = TypeVar("T", bound=Hashable)

FIN_TYPES = [
    "1", "Z/2", "Z/3", "Z/4", "Z/6", "D2", "D3", "D4", "D6",
    "Z/4xZ/2", "Z/6xZ/2", "D2xZ/2", "D4xZ/2", "D6xZ/2",
    "A4", "S4", "A4xZ/2", "S4xZ/2",
]  # fmt: skip

TYPE_ALIASES = {
    "Z/2xZ/2": "D2",
    "Z/3xZ/2": "Z/6",
    "D3xZ/2": "D6",
    "Z/1": "1",
    "C2": "Z/2",
    "C3": "Z/3",
    "C4": "Z/4",
    "C6": "Z/6",
}

NEGLIGIBLE_TYPES = frozenset({"1", "Z/2", "Z/3", "Z/4", "D2", "D3", "D4", "A4", "S4"})


def canonical_type(tag: str) -> str:
    t = tag.replace(" ", "").replace("×", "x")
    t = TYPE_ALIASES.get(t, t)
    if t not in FIN_TYPES:
        raise UnrecognizedType(tag)
    return t


Perm = tuple[int, ...]


def _pmul(a: Perm, b: Perm) -> Perm:
    # (a*b)(i) = a(b(i))
    return tuple(a[i] for i in b)


def _pgen(gens: Sequence[Perm]) -> frozenset[Perm]:
    n = len(gens[0])
    ident = tuple(range(n))
    els = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = _pmul(x, g)
                if y not in els:
                    els.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(els)


def _cycle(n: int, total: int, offset: int = 0) -> Perm:
    p = list(range(total))
    for i in range(n):
        p[offset + i] = offset + (i + 1) % n
    return tuple(p)


def _dihedral_gens(n: int, total: int) -> list[Perm]:
    if n == 2:
        a = list(range(total))
        a[0], a[1], a[2], a[3] = 1, 0, 3, 2
        b = list(range(total))
        b[0], b[1], b[2], b[3] = 2, 3, 0, 1
        return [tuple(a), tuple(b)]
    r = _cycle(n, total)
    s = list(range(total))
    for i in range(n):
        s[i] = (-i) % n
    return [r, tuple(s)]


def _with_z2(gens: list[Perm], base: int) -> list[Perm]:
    total = base + 2
    ext = [tuple(list(g) + [base, base + 1]) for g in gens]
    t = list(range(total))
    t[base], t[base + 1] = base + 1, base
    return ext + [tuple(t)]


@lru_cache(maxsize=None)
def reference_model(tag: str) -> frozenset[Perm]:
    """A permutation group realizing the given iso type, built independently of matrices."""
    tag = canonical_type(tag)
    base_tag, _, z2 = tag.partition("xZ/2")
    if base_tag == "1":
        gens, size = [(0,)], 1
    elif base_tag.startswith("Z/"):
        n = int(base_tag[2:])
        gens, size = [_cycle(n, n)], n
    elif base_tag.startswith("D"):
        n = int(base_tag[1:])
        size = max(n, 4) if n == 2 else n
        gens = _dihedral_gens(n, size)
    elif base_tag == "A4":
        gens, size = [(1, 2, 0, 3), (1, 0, 3, 2)], 4
    elif base_tag == "S4":
        gens, size = [(1, 2, 3, 0), (1, 0, 2, 3)], 4
    else:
        raise UnrecognizedType(tag)
    if z2 == "" and tag.endswith("xZ/2"):
        gens = _with_z2(gens, size)
    return _pgen(gens)


def _order_of(x: T, mul: Callable[[T, T], T], ident: T) -> int:
    y, n = x, 1
    while y != ident:
        y = mul(y, x)
        n += 1
    return n


def fingerprint(elements: Iterable[T], mul: Callable[[T, T], T], ident: T) -> tuple:
    els = list(elements)
    orders = tuple(sorted(_order_of(x, mul, ident) for x in els))
    center = sum(1 for x in els if all(mul(x, y) == mul(y, x) for y in els))
    abelian = center == len(els)
    return (len(els), abelian, orders, center)


@lru_cache(maxsize=None)
def _fingerprint_table() -> dict[tuple, list[str]]:
    table: dict[tuple, list[str]] = {}
    for tag in FIN_TYPES:
        model = reference_model(tag)
        n = len(next(iter(model)))
        fp = fingerprint(model, _pmul, tuple(range(n)))
        table.setdefault(fp, []).append(tag)
    return table


def is_isomorphic(
    g_elems: Iterable[T],
    g_mul: Callable[[T, T], T],
    g_id: T,
    h_elems: Iterable,
    h_mul: Callable,
    h_id,
) -> bool:
    """Brute-force isomorphism test by extending generator images (small groups only)."""
    G = list(g_elems)
    Hs = list(h_elems)
    if len(G) != len(Hs):
        return False
    order_g = {x: _order_of(x, g_mul, g_id) for x in G}
    order_h = {y: _order_of(y, h_mul, h_id) for y in Hs}
    if sorted(order_g.values()) != sorted(order_h.values()):
        return False
    # greedy generating set
    gens: list = []
    span = {g_id}
    for x in sorted(G, key=lambda x: -order_g[x]):
        if x not in span:
            gens.append(x)
            span = set(_close(span | {x}, g_mul, gens))
    if not gens:
        return True

    def extend(k: int, images: list) -> bool:
        if k == len(gens):
            hom = _extend_hom(gens, images, g_mul, g_id, h_mul, h_id)
            return hom is not None and len(set(hom.values())) == len(G)
        for y in Hs:
            if order_h[y] != order_g[gens[k]]:
                continue
            if _extend_hom(gens[: k + 1], images + [y], g_mul, g_id, h_mul, h_id) is None:
                continue
            if extend(k + 1, images + [y]):
                return True
        return False

    return extend(0, [])


def _close(seed: set, mul: Callable, gens: list) -> set:
    els = set(seed)
    frontier = list(els)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = mul(x, g)
                if y not in els:
                    els.add(y)
                    nxt.append(y)
        frontier = nxt
    return els


def _extend_hom(gens, images, g_mul, g_id, h_mul, h_id) -> dict | None:
    hom = {g_id: h_id}
    frontier = [g_id]
    while frontier:
        nxt = []
        for x in frontier:
            for g, im in zip(gens, images):
                y = g_mul(x, g)
                iy = h_mul(hom[x], im)
                if y in hom:
                    if hom[y] != iy:
                        return None
                else:
                    hom[y] = iy
                    nxt.append(y)
        frontier = nxt
    return hom


def _as_group(G) -> tuple[list, Callable, object]:
    if isinstance(G, PointGroup):
        return list(G.elements), matmul, IDENTITY
    elements, mul = G
    els = list(elements)
    ident = next(e for e in els if all(mul(e, x) == x for x in els))
    return els, mul, ident


def finite_iso_type(G) -> str:
    """Iso type of a PointGroup, or of an (elements, multiplication) pair."""
    els, mul, ident = _as_group(G)
    if len(els) > 48:
        raise UnrecognizedType(f"group of order {len(els)} is too large")
    fp = fingerprint(els, mul, ident)
    tags = _fingerprint_table().get(fp)
    if not tags:
        raise UnrecognizedType(f"no known type with fingerprint {fp[:2]}, orders {fp[2]}")
    if len(tags) == 1:
        return tags[0]
    for tag in tags:
        model = reference_model(tag)
        n = len(next(iter(model)))
        if is_isomorphic(els, mul, ident, model, _pmul, tuple(range(n))):
            return tag
    raise UnrecognizedType(f"fingerprint {fp[:2]} matched {tags} but no isomorphism found")


def is_negligible_finite(G) -> bool:
    tag = canonical_type(G) if isinstance(G, str) else finite_iso_type(G)
    return tag in NEGLIGIBLE_TYPES


def subgroups(G: PointGroup) -> list[PointGroup]:
    """All subgroups, found by repeatedly joining cyclic subgroups."""
    els = sorted(G.elements)
    index = {h: i for i, h in enumerate(els)}
    table = [[index[matmul(a, b)] for b in els] for a in els]
    e = index[IDENTITY]

    def close(gens: list[int]) -> frozenset[int]:
        return frozenset(_close({e}, lambda x, y: table[x][y], gens))

    cyclic = {close([i]): i for i in range(len(els))}
    found: dict[frozenset, list[int]] = {S: [i] for S, i in cyclic.items()}
    frontier = dict(found)
    while frontier:
        nxt = {}
        for S, gens in frontier.items():
            for C, c in cyclic.items():
                if C <= S:
                    continue
                J = close(gens + [c])
                if J not in found:
                    found[J] = nxt[J] = gens + [c]
        frontier = nxt
    return [PointGroup(els[i] for i in S) for S in sorted(found, key=len)]


def embeds_in_s4(tag: str) -> bool:
    """Brute force: is some subgroup of S4 isomorphic to the reference model of tag?"""
    model = reference_model(tag)
    n = len(next(iter(model)))
    s4 = _pgen([(1, 2, 3, 0), (1, 0, 2, 3)])
    target = len(model)
    if 24 % target:
        return False
    subs = {frozenset(_close({(0, 1, 2, 3)}, _pmul, [x])) for x in s4}
    frontier = set(subs)
    cyc = set(subs)
    while frontier:
        nxt = set()
        for S in frontier:
            for C in cyc:
                if not C <= S:
                    J = frozenset(_close(set(S), _pmul, list(S | C)))
                    if J not in subs:
                        subs.add(J)
                        nxt.add(J)
        frontier = nxt
    return any(
        len(S) == target and is_isomorphic(model, _pmul, tuple(range(n)), S, _pmul, (0, 1, 2, 3))
        for S in subs
    )


def all_permutation_matrices() -> list[Mat3]:
    out = []
    for p in permutations(range(3)):
        out.append(mat([[int(p[i] == j) for j in range(3)] for i in range(3)]))
    return out
