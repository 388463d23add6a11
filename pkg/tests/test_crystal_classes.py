import time
from collections import Counter
from fractions import Fraction

import pytest

from crystk.exact import Lattice, det, vec
from crystk.crystal_classes import (
    CatalogInconsistent,
    IntegralRep,
    NotInCatalog,
    bounded_conjugacy,
    catalog,
    integral_representation,
    invariant_tuple,
    lookup,
    maximal_group,
    verify_catalog,
)
from crystk.point_groups import preserves_lattice, standard_point_group

T = Fraction(1, 3)


def test_catalog_size_and_speed():
    t = time.perf_counter()
    groups = catalog()
    assert time.perf_counter() - t < 1
    assert len(groups) == 73
    assert len({G.label for G in groups}) == 73


def test_catalog_entries():
    G = lookup("S4+x(-1)_1")
    assert G.lattice.basis == (vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1))
    G = lookup("D'_3_7")
    v1, v2, v3 = vec(1, 1, 1), vec(1, -1, 0), vec(0, -1, 1)
    assert G.lattice.basis == (v1, tuple(T * (a + b) for a, b in zip(v2, v3)), v3)
    with pytest.raises(NotInCatalog):
        lookup("S4+x(-1)_9")


def test_per_lattice_counts():
    counts = Counter(G.lattice_index for G in catalog())
    assert [counts[i] for i in range(1, 8)] == [21, 19, 8, 4, 13, 5, 3]


def test_every_entry_preserves_its_lattice():
    for G in catalog():
        assert preserves_lattice(G.point_group, G.lattice)
        for h in G.point_group.elements:
            for b in G.lattice.basis:
                assert G.lattice.contains(tuple(sum(h[i][j] * b[j] for j in range(3)) for i in range(3)))


def test_maximal_groups_contain_their_lattice_mates():
    for G in catalog():
        assert G.point_group.issubgroup(maximal_group(G.lattice_index).point_group)


def test_maximal_labels():
    assert lookup("Gamma_1").label == "S4+x(-1)_1"
    assert lookup("Gamma_5").label == "D6+x(-1)_5"


def test_integral_representation():
    assert integral_representation(lookup("C1+x(-1)_1")).matrices == {
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        ((-1, 0, 0), (0, -1, 0), (0, 0, -1)),
    }
    rep = integral_representation(lookup("S4+_1")).matrices
    assert len(rep) == 24
    assert all(sorted(map(abs, sum(m, ()))) == [0] * 6 + [1] * 3 for m in rep)
    rep = integral_representation(lookup("D3+_5")).matrices
    assert len(rep) == 6 and all(isinstance(x, int) for m in rep for r in m for x in r)


def _conj(P, rep):
    import numpy as np

    P = np.array(P)
    Pi = np.rint(np.linalg.inv(P)).astype(int)
    return IntegralRep(frozenset(tuple(map(tuple, (P @ np.array(m) @ Pi).tolist())) for m in rep.matrices))


def test_bounded_conjugacy():
    rep = integral_representation(lookup("C4+_1"))
    assert bounded_conjugacy(rep, rep) == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    a = integral_representation(lookup("D2+x(-1)_1"))
    b = integral_representation(lookup("D2+x(-1)_3"))
    assert bounded_conjugacy(a, b, 2) is None
    # the same group written in a second basis
    P = ((1, 1, 0), (0, 1, 0), (0, 0, 1))
    moved = _conj(P, rep)
    W = bounded_conjugacy(rep, moved, 2)
    assert W is not None and _conj(W, rep) == moved
    import numpy as np

    assert abs(round(np.linalg.det(np.array(W)))) == 1


def test_verify_catalog():
    report = verify_catalog()
    assert report["valid"] == 73 and report["unresolved"] == 0
    assert invariant_tuple(lookup("D4+x(-1)_1")) != invariant_tuple(lookup("D4+x(-1)_2"))
    assert invariant_tuple(lookup("S4+_1"))[1] != invariant_tuple(lookup("A4+_1"))[1]


def test_lattice_two_presentations_agree():
    # <x, y, (x+z)/2> and the stored <(x+z)/2, y, z> are the same lattice
    stored = lookup("D'_2_2_4").lattice
    other = Lattice([vec(1, 0, 0), vec(0, 1, 0), vec(Fraction(1, 2), 0, Fraction(1, 2))])
    assert all(stored.contains(b) for b in other.basis)
    assert all(other.contains(b) for b in stored.basis)
    assert preserves_lattice(standard_point_group("D'_2_2"), other)
