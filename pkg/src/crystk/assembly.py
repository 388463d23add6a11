"""Final lower K-groups of the split crystallographic groups, and regression against stored tables."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from crystk.cell_geometry import Cell, cell_complex, point_stabilizer, same_orbit
from crystk.crystal_classes import CrystGroup, catalog, lookup
from crystk.exact import vec
from crystk.kgroups import FINITE_K_GROUPS, KExpr, assemble_hfin, wh_table
from crystk.lines import (
    COKERNELS,
    ParamLine,
    cokernel,
    line_entries,
    line_orbit,
    strict_stabilizer,
    t_double_prime,
    translation_equivalent,
)
from crystk.point_groups import finite_iso_type, identify_named, standard_point_group


class GoldenMismatch(AssertionError):
    def __init__(self, mismatches: list[str]):
        super().__init__(f"{len(mismatches)} golden mismatches:\n" + "\n".join(mismatches))
        self.mismatches = mismatches


@dataclass(frozen=True)
class KTheoryResult:
    group_label: str
    k_minus1: KExpr
    k0_tilde: KExpr
    wh: KExpr

    def __str__(self) -> str:
        return f"K_-1 = {self.k_minus1}; K0~ = {self.k0_tilde}; Wh = {self.wh}"

    def to_json(self) -> dict:
        return {
            "label": self.group_label,
            "K_minus1": self.k_minus1.to_json(),
            "K0_tilde": self.k0_tilde.to_json(),
            "Wh": self.wh.to_json(),
        }


def k_theory(G: CrystGroup | str, table=None) -> KTheoryResult:
    """Proper-action homology plus the cokernels contributed by the line orbits."""
    G = lookup(G) if isinstance(G, str) else G
    h_m1, h_0, h_1 = assemble_hfin(G, table)
    k0, wh = h_0, h_1
    for e in line_entries(G.label):
        h_m1 = h_m1 + cokernel(e.structure, -1)
        k0 = k0 + cokernel(e.structure, 0)
        wh = wh + cokernel(e.structure, 1)
    return KTheoryResult(G.label, h_m1, k0, wh)


def all_k_theory(table=None) -> list[KTheoryResult]:
    return [k_theory(G, table) for G in catalog()]


# --- goldens --------------------------------------------------------------------


@lru_cache(maxsize=None)
def load_goldens() -> dict:
    path = resources.files("crystk") / "data" / "goldens" / "tables.json"
    return json.loads(path.read_text())


def parse_line_text(G: CrystGroup, text: str) -> ParamLine:
    """Read "(a+1/2, -2a, 1/4)" style coordinates into a line of G."""
    t, v = [], []
    for part in text.strip().strip("()").split(","):
        s = part.replace(" ", "")
        m = re.fullmatch(r"([+-]?\d*)a([+-]\d+(?:/\d+)?)?", s)
        if m:
            c = m.group(1)
            v.append(Fraction(int(c + "1") if c in ("", "+", "-") else int(c)))
            t.append(Fraction(m.group(2)) if m.group(2) else Fraction(0))
        else:
            v.append(Fraction(0))
            t.append(Fraction(s))
    return ParamLine.make(G, vec(*t), vec(*v))


def check_finite_k(table=None) -> list[str]:
    bad = []
    for tag, vals in load_goldens()["finite_k"].items():
        for q, want in zip((-1, 0, 1), vals):
            got = wh_table(tag, q, table)
            if got != KExpr.parse(want):
                bad.append(f"finite_k {tag} q={q}: got {got}, want {want}")
    return bad


def check_cells() -> list[str]:
    bad = []
    gold = load_goldens()["cells"]
    for G in catalog():
        want = gold.get(G.label, [])
        got = cell_complex(G.label)
        for d in (0, 1):
            n_want = sum(1 for w in want if w["dim"] == d)
            if len(got.of_dim(d)) != n_want:
                bad.append(f"cells {G.label}: {len(got.of_dim(d))} cells of dim {d}, want {n_want}")
        for w in want:
            p = vec(*w["position"])
            hits = [
                e for e in got.of_dim(w["dim"]) if same_orbit(G, Cell.vertex(e.cell.position), Cell.vertex(p))
            ]
            if len(hits) != 1:
                bad.append(f"cells {G.label}: no unique computed cell at {w['position']}")
                continue
            if w["stabilizer"] is None:
                ok = hits[0].iso_type == w["iso_type"]
            else:
                named = standard_point_group(w["stabilizer"])
                if w["dim"] == 0:
                    ok = point_stabilizer(G, p) == named
                else:
                    ok = named.issubgroup(point_stabilizer(G, p)) and finite_iso_type(named) == hits[0].iso_type
            if not ok:
                bad.append(f"cells {G.label}: stabilizer at {w['position']} is not {w['stabilizer'] or w['iso_type']}")
    return bad


def check_hfin(table=None) -> list[str]:
    bad = []
    gold = load_goldens()["hfin"]
    for G in catalog():
        want = gold.get(G.label, ["0", "0"])
        try:
            h = assemble_hfin(G, table)
        except Exception as exc:  # a corrupted table can break the boundary maps
            bad.append(f"hfin {G.label}: {type(exc).__name__}: {exc}")
            continue
        for name, got, w in (("H_-1", h[0], want[0]), ("H_0", h[1], want[1]), ("H_1", h[2], "0")):
            if got != KExpr.parse(w):
                bad.append(f"hfin {G.label} {name}: got {got}, want {w}")
    return bad


def check_lines() -> list[str]:
    bad = []
    gold = load_goldens()["lines"]
    for G in catalog():
        mine = list(t_double_prime(G.label))
        want = gold.get(G.label, [])
        if len(mine) != len(want):
            bad.append(f"lines {G.label}: {len(mine)} orbits, want {len(want)}")
        matched = set()
        for text, name in want:
            ln = parse_line_text(G, text)
            S = strict_stabilizer(G, ln)
            if identify_named(S) != name:
                bad.append(f"lines {G.label} {text}: strict stabilizer {identify_named(S)}, want {name}")
            hits = [k for k, m in enumerate(mine) if any(translation_equivalent(G, x, ln) for x in line_orbit(G, m))]
            if len(hits) != 1:
                bad.append(f"lines {G.label} {text}: matches {len(hits)} computed orbits")
            else:
                matched.add(hits[0])
        if len(matched) != len(want):
            bad.append(f"lines {G.label}: golden lines cover {len(matched)} computed orbits")
    return bad


def check_structures() -> list[str]:
    bad = []
    gold = load_goldens()["structures"]
    for G in catalog():
        got: dict[str, int] = {}
        for e in line_entries(G.label):
            got[e.structure.name] = got.get(e.structure.name, 0) + 1
        want = gold.get(G.label, {})
        if got != want:
            bad.append(f"structures {G.label}: got {got}, want {want}")
    return bad


def check_cokernels() -> list[str]:
    bad = []
    gold = load_goldens()["cokernels"]
    if set(gold) != set(COKERNELS):
        bad.append(f"cokernels: structure list differs {sorted(set(gold) ^ set(COKERNELS))}")
    for name, (n0, n1) in gold.items():
        for n, w in ((0, n0), (1, n1)):
            if name in COKERNELS and cokernel(name, n) != KExpr.parse(w):
                bad.append(f"cokernels {name} n={n}: got {cokernel(name, n)}, want {w}")
    return bad


def check_ktheory(table=None) -> list[str]:
    bad = []
    gold = load_goldens()["ktheory"]
    for G in catalog():
        want = gold.get(G.label, ["0", "0", "0"])
        try:
            r = k_theory(G, table)
        except Exception as exc:
            bad.append(f"ktheory {G.label}: {type(exc).__name__}: {exc}")
            continue
        for name, got, w in (("K_-1", r.k_minus1, want[0]), ("K0~", r.k0_tilde, want[1]), ("Wh", r.wh, want[2])):
            if got != KExpr.parse(w):
                bad.append(f"ktheory {G.label} {name}: got {got}, want {w}")
    return bad


@dataclass
class GoldenReport:
    sections: dict[str, list[str]] = field(default_factory=dict)

    @property
    def mismatches(self) -> list[str]:
        return [m for ms in self.sections.values() for m in ms]

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def lines(self) -> list[str]:
        out = [f"{name}: {'ok' if not ms else f'{len(ms)} mismatches'}" for name, ms in self.sections.items()]
        return out + self.mismatches


def run_goldens(table=None, raise_on_mismatch: bool = False) -> GoldenReport:
    """Recompute every stored table; ``table`` overrides the finite-group K-theory lookup."""
    rep = GoldenReport()
    rep.sections["catalog"] = (
        [] if len(catalog()) == load_goldens()["catalog_size"] else [f"catalog has {len(catalog())} groups"]
    )
    rep.sections["finite_k"] = check_finite_k(table)
    rep.sections["cells"] = check_cells()
    rep.sections["hfin"] = check_hfin(table)
    rep.sections["lines"] = check_lines()
    rep.sections["structures"] = check_structures()
    rep.sections["cokernels"] = check_cokernels()
    rep.sections["ktheory"] = check_ktheory(table)
    if raise_on_mismatch and not rep.ok:
        raise GoldenMismatch(rep.mismatches)
    return rep


def corrupted_table(tag: str, q: int, value: KExpr) -> dict:
    """A copy of the finite-group table with one entry replaced, for fault injection."""
    t = {k: dict(v) for k, v in FINITE_K_GROUPS.items()}
    t.setdefault(tag, {})[q] = value
    return t


__all__ = [
    "GoldenMismatch",
    "GoldenReport",
    "KTheoryResult",
    "all_k_theory",
    "corrupted_table",
    "k_theory",
    "load_goldens",
    "parse_line_text",
    "run_goldens",
]
