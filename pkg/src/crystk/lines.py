"""Lines in R^3 with large stabilizers, and the virtually cyclic groups fixing them.

A line is stored as ``t + alpha * v`` with ``v`` a primitive lattice vector and
``t`` perpendicular to ``v``.  Its strict stabilizer is the finite group fixing
it pointwise; the full stabilizer is infinite virtually cyclic, and its
structure decides which Nil-type cokernel the line contributes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm

from crystk.cell_geometry import right_transversal
from crystk.crystal_classes import CrystGroup, catalog, lookup, maximal_group
from crystk.exact import (
    IDENTITY,
    AffineIsometry,
    Mat3,
    Vec3,
    add,
    dot,
    fmt_scalar,
    is_integral,
    matmul,
    matvec,
    neg,
    scale,
    sub,
    transpose,
    vec,
    vec_to_json,
)
from crystk.intlinalg import integer_kernel
from crystk.kgroups import KExpr
from crystk.point_groups import (
    PointGroup,
    finite_iso_type,
    generate_group,
    identify_named,
    rotation_axis,
)

MAX_LINES = 20


class UnknownVCType(ValueError):
    pass


class NoTranslation(RuntimeError):
    pass


# --- lines ---------------------------------------------------------------------


def _sign_normalized(v: Vec3) -> Vec3:
    first = next(x for x in v if x != 0)
    return v if first > 0 else neg(v)


def _project(t: Vec3, v: Vec3) -> Vec3:
    return sub(t, scale(dot(t, v) / dot(v, v), v))


@dataclass(frozen=True)
class ParamLine:
    offset: Vec3  # t, perpendicular to direction
    direction: Vec3  # v, primitive in the lattice

    @classmethod
    def make(cls, G: CrystGroup, t: Vec3, v: Vec3) -> "ParamLine":
        v = _sign_normalized(G.lattice.primitive(v))
        return cls(_project(t, v), v)

    def at(self, alpha) -> Vec3:
        return add(self.offset, scale(alpha, self.direction))

    def moved(self, G: CrystGroup, h: Mat3) -> "ParamLine":
        return ParamLine.make(G, matvec(h, self.offset), matvec(h, self.direction))

    def key(self):
        t, v = self.offset, self.direction
        return (
            dot(v, v),
            tuple(-abs(x) for x in v),
            tuple(-x for x in v),
            sum(abs(x) for x in t),
            tuple(-x for x in t),
        )

    def __str__(self) -> str:
        parts = []
        for t, v in zip(self.offset, self.direction):
            if v == 0:
                parts.append(fmt_scalar(t))
                continue
            a = "a" if v == 1 else "-a" if v == -1 else f"{fmt_scalar(v)}a"
            if t == 0:
                parts.append(a)
            else:
                parts.append(f"{a}{'+' if t > 0 else '-'}{fmt_scalar(abs(t))}")
        return "(" + ", ".join(parts) + ")"

    def to_json(self) -> dict:
        return {"t": vec_to_json(self.offset), "v": vec_to_json(self.direction)}


def _solve_along(G: CrystGroup, x: Vec3, v: Vec3) -> list[Fraction]:
    """All s in [0, 1) with x + s*v in the lattice (v primitive in the lattice)."""
    c = G.lattice.coords(x)
    d = G.lattice.coords(v)
    i = next(k for k in range(3) if d[k] != 0)
    n = abs(int(d[i]))
    out = []
    for k in range(n):
        s = (k - c[i]) / d[i]
        s -= s.numerator // s.denominator
        if is_integral(add(c, scale(s, d))):
            out.append(s)
    return sorted(set(out))


def translation_equivalent(G: CrystGroup, l1: ParamLine, l2: ParamLine) -> bool:
    if l1.direction != l2.direction:
        return False
    return bool(_solve_along(G, sub(l1.offset, l2.offset), l2.direction))


def line_orbit(G: CrystGroup, line: ParamLine) -> set[ParamLine]:
    """Images of the line under the point group (one per distinct image, before translations)."""
    return set(_orbit(G.label, line))


@lru_cache(maxsize=None)
def _orbit(label: str, line: ParamLine) -> frozenset[ParamLine]:
    G = lookup(label)
    return frozenset(line.moved(G, h) for h in G.point_group.elements)


def same_line_orbit(G: CrystGroup, l1: ParamLine, l2: ParamLine) -> bool:
    return any(translation_equivalent(G, m, l2) for m in line_orbit(G, l1))


@lru_cache(maxsize=None)
def _perp_basis(basis: tuple, v: Vec3) -> tuple[Vec3, Vec3]:
    from crystk.exact import Lattice

    L = Lattice(basis)
    vals = [dot(b, v) for b in basis]
    den = lcm(*(x.denominator for x in vals))
    row = [int(x * den) for x in vals]
    m1, m2 = (L.point(k) for k in integer_kernel([row], 3))
    return m1, m2


def perpendicular_lattice(G: CrystGroup, v: Vec3) -> tuple[Vec3, Vec3]:
    """A basis of the lattice vectors perpendicular to v."""
    return _perp_basis(G.lattice.basis, v)


def half_lattice_offsets(G: CrystGroup, v: Vec3) -> list[Vec3]:
    """The four offsets t with 2t in the lattice, t perpendicular to v, modulo that plane lattice."""
    m1, m2 = perpendicular_lattice(G, v)
    h = Fraction(1, 2)
    return [add(scale(a * h, m1), scale(b * h, m2)) for a in (0, 1) for b in (0, 1)]


@lru_cache(maxsize=None)
def _small_offsets(basis: tuple, v: Vec3) -> list[Vec3]:
    m1, m2 = _perp_basis(basis, v)
    steps = [Fraction(k, 2) for k in range(-2, 3)]
    return sorted(
        (add(scale(a, m1), scale(b, m2)) for a in steps for b in steps),
        key=lambda t: (sum(abs(x) for x in t), tuple(-x for x in t)),
    )


def canonical_line(G: CrystGroup, line: ParamLine) -> ParamLine:
    """Least representative of the orbit among offsets that are small combinations of half lattice vectors."""
    best = None
    for m in line_orbit(G, line):
        for cand in _small_offsets(G.lattice.basis, m.direction):
            c = ParamLine(cand, m.direction)
            if best is not None and c.key() >= best.key():
                break
            if translation_equivalent(G, c, m):
                best = c
                break
    return best if best is not None else line


# --- strict stabilizers and negligibility --------------------------------------


def strict_stabilizer(G: CrystGroup, line: ParamLine) -> PointGroup:
    """Point-group image of the elements fixing the line pointwise."""
    t, v = line.offset, line.direction
    return PointGroup(
        h for h in G.point_group.elements if matvec(h, v) == v and G.lattice.contains(sub(t, matvec(h, t)))
    )


def strict_stabilizer_lifts(G: CrystGroup, line: ParamLine) -> list[AffineIsometry]:
    t = line.offset
    return [AffineIsometry(sub(t, matvec(h, t)), h) for h in sorted(strict_stabilizer(G, line).elements)]


def _square_free(n: int) -> bool:
    return all(n % (p * p) for p in range(2, int(n**0.5) + 1))


def is_pole_direction(G: CrystGroup, v: Vec3) -> bool:
    d = G.lattice.primitive(v)
    return any(h != IDENTITY and matvec(h, d) == d for h in G.point_group.rotations().elements)


def is_negligible_line(G: CrystGroup, line: ParamLine) -> bool:
    v = G.lattice.primitive(line.direction)
    fixers = G.point_group.stabilizer_of_vector(v)
    if not any(h != IDENTITY for h in fixers.rotations().elements):
        return True  # not a pole
    if _square_free(len(fixers)):
        return True
    return _square_free(len(strict_stabilizer(G, line)))


# --- enumeration of the non-negligible lines ------------------------------------


def pole_directions(G: CrystGroup) -> list[Vec3]:
    out = set()
    for h in G.point_group.rotations().elements:
        if h != IDENTITY:
            out.add(_sign_normalized(G.lattice.primitive(vec(*rotation_axis(h)))))
    return sorted(out)


def _merge_orbits(G: CrystGroup, lines) -> list[ParamLine]:
    reps: list[tuple[ParamLine, set[ParamLine]]] = []
    for ln in lines:
        if not any(translation_equivalent(G, m, ln) for _, orb in reps for m in orb):
            reps.append((ln, line_orbit(G, ln)))
    return sorted((canonical_line(G, r) for r, _ in reps), key=ParamLine.key)


def enumerate_lines(G: CrystGroup | str) -> list[ParamLine]:
    """Brute force: every pole direction with every half-lattice offset, merged into orbits.

    A non-negligible strict stabilizer has order 4, 8 or 12, so it contains the
    half-turn about the line, which forces twice the offset into the lattice.
    """
    G = lookup(G) if isinstance(G, str) else G
    cands = []
    for v in pole_directions(G):
        for t in half_lattice_offsets(G, v):
            ln = ParamLine(t, v)
            if not is_negligible_line(G, ln):
                cands.append(ln)
    return _merge_orbits(G, cands)


def refine_lines(G: CrystGroup, G_sub: CrystGroup, lines) -> list[ParamLine]:
    """Non-negligible line orbits of a subgroup, from those of the bigger group."""
    T = right_transversal(G.point_group, G_sub.point_group)
    moved = [ln.moved(G_sub, t) for t in T for ln in lines]
    return _merge_orbits(G_sub, [ln for ln in moved if not is_negligible_line(G_sub, ln)])


@lru_cache(maxsize=None)
def t_double_prime(label: str) -> tuple[ParamLine, ...]:
    """One line per orbit of non-negligible lines."""
    G = lookup(label)
    top = maximal_group(G.lattice_index)
    base = enumerate_lines(top)
    out = base if G.label == top.label else refine_lines(top, G, base)
    if len(out) > MAX_LINES:
        raise AssertionError(f"{G.label}: {len(out)} line orbits")
    return tuple(out)


# --- the stabilizer of a line ---------------------------------------------------


def translation_generator(G: CrystGroup, v: Vec3) -> Fraction:
    """Positive generator of the group of values (w . v)/(v . v), w in the lattice."""
    vals = [dot(b, v) / dot(v, v) for b in G.lattice.basis]
    den = lcm(*(x.denominator for x in vals))
    g = 0
    for x in vals:
        g = gcd(g, int(x * den))
    return Fraction(g, den)


def minimal_translation(G: CrystGroup, line: ParamLine) -> tuple[Fraction, AffineIsometry]:
    """Smallest C > 0 and an element acting on the line as r(a) -> r(a + C)."""
    t, v = line.offset, line.direction
    step = translation_generator(G, v)
    fixers = sorted(h for h in G.point_group.elements if matvec(h, v) == v)
    k = 1
    while k * step <= 1:
        C = k * step
        for h in fixers:
            w = add(sub(t, matvec(h, t)), scale(C, v))
            if G.lattice.contains(w):
                return C, AffineIsometry(w, h)
        k += 1
    raise NoTranslation(f"no translation along {line} up to C = 1")


def find_reflection(G: CrystGroup, line: ParamLine) -> tuple[Fraction, AffineIsometry] | None:
    """An element acting as r(a) -> r(D - a), with its D in [0, 1), if one exists."""
    t, v = line.offset, line.direction
    for h in sorted(G.point_group.elements):
        if matvec(h, v) != neg(v):
            continue
        x = sub(t, matvec(h, t))
        sols = _solve_along(G, x, v)
        if sols:
            D = sols[0]
            return D, AffineIsometry(add(x, scale(D, v)), h)
    return None


@dataclass(frozen=True)
class SemiDirect:
    fiber: str
    twisted: bool

    @property
    def name(self) -> str:
        return f"{_disp(self.fiber)} x{'|' if self.twisted else ''} Z"


@dataclass(frozen=True)
class Amalgam:
    left: str
    amalgamated: str
    right: str

    @property
    def name(self) -> str:
        F = self.amalgamated
        if self.left == self.right == f"{F}xZ/2":
            return f"{_disp(F)} x Dinf"
        return f"{_disp(self.left)} *_{_disp(F)} {_disp(self.right)}"


VCStructure = SemiDirect | Amalgam

_DISPLAY = {"Z/4": "C4", "Z/2": "C2", "Z/3": "C3", "Z/6": "C6"}


def _disp(tag: str) -> str:
    if tag in _DISPLAY:
        return _DISPLAY[tag]
    if "x" in tag:
        a, b = tag.split("x", 1)
        return f"({_disp(a)} x {b})"
    return tag


def _conjugation_is_inner(S: PointGroup, h: Mat3) -> bool:
    hi = transpose(h)
    target = {x: matmul(matmul(h, x), hi) for x in S.elements}
    for s in S.elements:
        si = transpose(s)
        if all(matmul(matmul(s, x), si) == y for x, y in target.items()):
            return True
    return False


def vc_structure(G: CrystGroup, line: ParamLine) -> VCStructure:
    S = strict_stabilizer(G, line)
    _, gT = minimal_translation(G, line)
    refl = find_reflection(G, line)
    fiber = finite_iso_type(S)
    if refl is None:
        return SemiDirect(fiber, not _conjugation_is_inner(S, gT.linear))
    _, gR = refl
    left = generate_group(sorted(S.elements) + [gR.linear])
    right = generate_group(sorted(S.elements) + [matmul(gT.linear, gR.linear)])
    a, b = sorted((finite_iso_type(left), finite_iso_type(right)))
    return Amalgam(a, fiber, b)


# --- cokernels of the relative assembly maps -------------------------------------

_INF2 = KExpr(inf_z2=True)
_INF24 = KExpr(inf_z2=True, inf_z4=True)

COKERNELS: dict[str, dict[int, KExpr]] = {
    "C4 x Z": {0: _INF2, 1: _INF2},
    "D2 x Z": {0: _INF2, 1: _INF2},
    "D2 x| Z": {0: _INF2, 1: _INF2},
    "D4 x Z": {0: _INF24, 1: KExpr(nk_d4=2)},
    "D6 x Z": {0: _INF2, 1: KExpr(nk_d6=2)},
    "C4 x Dinf": {0: _INF2, 1: _INF2},
    "D2 x Dinf": {0: _INF2, 1: _INF2},
    "D4 *_D2 D4": {0: _INF2, 1: _INF2},
    "D4 *_C4 D4": {0: _INF2, 1: _INF2},
    "(D2 x Z/2) *_D2 D4": {0: _INF2, 1: _INF2},
    "D4 x Dinf": {0: _INF24, 1: KExpr(nk_d4=1)},
    "D6 x Dinf": {0: _INF2, 1: KExpr(nk_d6=1)},
}


def _negligible_structure(s: VCStructure) -> bool:
    fiber = s.fiber if isinstance(s, SemiDirect) else s.amalgamated
    return fiber in ("1", "Z/2", "Z/3", "Z/6")


def cokernel(s: VCStructure | str, n: int) -> KExpr:
    if not isinstance(s, str) and _negligible_structure(s):
        return KExpr()
    name = s if isinstance(s, str) else s.name
    if name not in COKERNELS:
        raise UnknownVCType(name)
    if n not in (-1, 0, 1):
        raise ValueError("cokernels are only recorded for n = -1, 0, 1")
    return COKERNELS[name].get(n, KExpr())


@dataclass(frozen=True)
class LineEntry:
    line: ParamLine
    strict_stabilizer: PointGroup
    stabilizer_name: str | None
    structure: VCStructure

    def to_json(self) -> dict:
        return {
            "line": self.line.to_json(),
            "strict_stabilizer_name": self.stabilizer_name,
            "structure": self.structure.name,
            "cokernel_n0": str(cokernel(self.structure, 0)),
            "cokernel_n1": str(cokernel(self.structure, 1)),
        }


@lru_cache(maxsize=None)
def line_entries(label: str) -> tuple[LineEntry, ...]:
    G = lookup(label)
    out = []
    for ln in t_double_prime(G.label):
        S = strict_stabilizer(G, ln)
        out.append(LineEntry(ln, S, identify_named(S), vc_structure(G, ln)))
    return tuple(out)


def lines_json(label: str) -> list[dict]:
    return [e.to_json() for e in line_entries(label)]


def all_structures() -> dict[str, list[str]]:
    return {G.label: [e.structure.name for e in line_entries(G.label)] for G in catalog()}


__all__ = [
    "Amalgam",
    "COKERNELS",
    "LineEntry",
    "ParamLine",
    "SemiDirect",
    "UnknownVCType",
    "canonical_line",
    "cokernel",
    "enumerate_lines",
    "find_reflection",
    "is_negligible_line",
    "line_entries",
    "lines_json",
    "minimal_translation",
    "refine_lines",
    "same_line_orbit",
    "strict_stabilizer",
    "t_double_prime",
    "translation_generator",
    "vc_structure",
]
