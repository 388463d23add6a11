from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crystk.cell_geometry import (
    Angle,
    NotASubgroup,
    PreconditionViolated,
    cell_complex,
    dihedral_angle,
    domain_cells,
    domain_report,
    load_domain,
    negligibility_shortcut,
    point_stabilizer,
    refine_stabilizers,
    same_orbit,
    verify_subproper,
)
from crystk.crystal_classes import catalog, lookup, maximal_group
from crystk.exact import AffineIsometry, matvec, sub, vec
from crystk.point_groups import finite_iso_type, identify_named, standard_point_group

F = Fraction


def _stabilizer_by_search(G, v):
    """Oracle: test every point-group element directly."""
    return {h for h in G.point_group.elements if G.lattice.contains(sub(v, matvec(h, v)))}


def test_dihedral_angles():
    s = load_domain(1).polyhedron.sides
    assert dihedral_angle(s[0].normal, s[1].normal) == Angle(F(1, 4))
    assert dihedral_angle(vec(1, 0, 0), vec(0, 1, 0)) == Angle(F(1, 2))
    s = load_domain(2).polyhedron.sides
    a = dihedral_angle(s[1].normal, s[4].normal)
    assert str(a) == "arccos(1/sqrt(3))"
    assert a.to_float() == pytest.approx(0.9553166181245093)


def test_subproper_examples():
    rep = verify_subproper(load_domain(1).polyhedron, load_domain(1).pairing)
    assert all(len(c.ridges) == 1 and c.kind == "dihedral" for c in rep.cycles)
    assert all(F(1) / c.angle_sum.pi_coeff == int(F(1) / c.angle_sum.pi_coeff) for c in rep.cycles)
    rep = verify_subproper(load_domain(2).polyhedron, load_domain(2).pairing)
    pairs = [c for c in rep.cycles if len(c.ridges) == 2]
    assert len(pairs) == 2 and all(c.angle_sum == Angle(F(1)) for c in pairs)
    rep = verify_subproper(load_domain(7).polyhedron, load_domain(7).pairing)
    (c,) = [c for c in rep.cycles if c.ridges == ((0, 3), (0, 3))]
    assert c.kind == "cyclic" and c.angle_sum == Angle(F(2, 3))


def test_all_domains_generate_their_group():
    for i in range(1, 8):
        rep = domain_report(i)
        assert rep["generates_group"] and all(c["ok"] for c in rep["cycles"])


def test_point_stabilizer_examples():
    G1 = maximal_group(1)
    S = point_stabilizer(G1, vec(F(1, 2), F(1, 2), F(1, 2)))
    assert S == standard_point_group("S4+x(-1)")
    # (1/7, 0, 0) sits on a 4-fold axis, so it is not generic
    v = vec(F(1, 7), 0, 0)
    assert point_stabilizer(G1, v).elements == _stabilizer_by_search(G1, v)
    assert len(point_stabilizer(G1, v)) == 8
    generic = vec(F(1, 7), F(2, 7), F(3, 11))
    assert len(point_stabilizer(G1, generic)) == 1
    S = point_stabilizer(maximal_group(3), vec(F(1, 4), F(1, 4), 0))
    assert len(S) == 8 and finite_iso_type(S) == "D2xZ/2"


def test_negligibility_shortcut():
    assert negligibility_shortcut(maximal_group(1), vec(F(1, 4), F(1, 4), F(1, 4))) is True
    assert negligibility_shortcut(maximal_group(1), vec(F(1, 2), 0, 0)) is None
    assert negligibility_shortcut(maximal_group(2), vec(F(3, 8), F(3, 8), 0)) is True
    with pytest.raises(PreconditionViolated):
        negligibility_shortcut(maximal_group(5), vec(0, 0, 0))


def _names(label):
    return sorted(e.stabilizer_name for e in cell_complex(label).of_dim(0))


def test_refine_stabilizers():
    assert _names("A4+x(-1)_1") == ["A4+x(-1)", "A4+x(-1)", "D2+x(-1)", "D2+x(-1)"]
    assert _names("D2+x(-1)_1") == ["D2+x(-1)"] * 8
    G = maximal_group(1)
    cells = domain_cells(1).non_negligible()
    same = refine_stabilizers(G, G, cells)
    # representatives may be renamed, orbits and stabilizer types may not
    assert len(same.cells) == len(cells.cells)
    for a in same.cells:
        (b,) = [b for b in cells.cells if same_orbit(G, a.cell, b.cell)]
        assert a.iso_type == b.iso_type
    with pytest.raises(NotASubgroup):
        refine_stabilizers(lookup("D2+x(-1)_1"), lookup("S4+_1"), cells)


def test_edges():
    with_edges = {G.label: len(cell_complex(G.label).of_dim(1)) for G in catalog()}
    with_edges = {k: n for k, n in with_edges.items() if n}
    assert set(with_edges) == {"D6+x(-1)_5", "D6+_5", "C6+x(-1)_5", "C6+_5", "D''_6_5"}
    assert sum(with_edges.values()) == 7
    for i in (1, 2, 3, 4, 6, 7):
        assert all(e.negligible for e in domain_cells(i).of_dim(1))


def test_cells_fix_their_stabilizer_pointwise():
    for G in catalog():
        for e in cell_complex(G.label).cells:
            for p in e.cell.points:
                S = point_stabilizer(G, p)
                assert e.cell.dim == 1 or S == point_stabilizer(G, e.cell.position)


coords = st.fractions(min_value=-2, max_value=2, max_denominator=8)


@pytest.mark.parametrize("i", range(1, 8))
@settings(max_examples=200, deadline=None)
@given(data=st.data())
def test_stabilizer_equivariance(i, data):
    G = maximal_group(i)
    v = vec(*(data.draw(coords) for _ in range(3)))
    h = data.draw(st.sampled_from(sorted(G.point_group.elements)))
    t = G.lattice.point([data.draw(st.integers(-2, 2)) for _ in range(3)])
    g = AffineIsometry(t, h)
    assert point_stabilizer(G, g(v)) == point_stabilizer(G, v).conjugate(h)
