from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from crystk.exact import (
    IDENTITY,
    AffineIsometry,
    GeneratorNotInLattice,
    Lattice,
    NotASublattice,
    NotOrthogonal,
    apply_isometry,
    dot,
    is_full_subgroup,
    lattice_contains,
    mat,
    neg,
    sub,
    sublattice_index,
    vec,
)

H = Fraction(1, 2)
T = Fraction(1, 3)
X, Y, Z = vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1)
V1, V2, V3 = vec(1, 1, 1), vec(1, -1, 0), vec(0, 1, -1)
CUBIC = Lattice([X, Y, Z])
FCC = Lattice([vec(H, H, 0), vec(H, 0, H), vec(0, H, H)])

fractions = st.fractions(min_value=-10, max_value=10, max_denominator=12)
vectors = st.tuples(fractions, fractions, fractions).map(lambda t: vec(*t))


def test_lattice_contains():
    assert lattice_contains(CUBIC, vec(1, 0, 0))
    assert lattice_contains(FCC, vec(H, H, 0))
    assert not lattice_contains(CUBIC, vec(H, 0, 0))


def test_sublattice_index():
    assert sublattice_index(Lattice([vec(H, H, H), Y, Z]), CUBIC) == 2
    assert sublattice_index(CUBIC, CUBIC) == 1
    big = Lattice([V1, tuple(T * (a + b) for a, b in zip(V2, V3)), V3])
    assert sublattice_index(big, Lattice([V1, V2, V3])) == 3
    with pytest.raises(NotASublattice):
        sublattice_index(CUBIC, FCC)


def _full_by_search(L, gens, max_den=6):
    """Oracle: look for a lattice point sum(c_i g_i) with some c_i non-integral."""
    import itertools

    for den in range(2, max_den + 1):
        for nums in itertools.product(range(den), repeat=len(gens)):
            if not any(nums):
                continue
            p = vec(0, 0, 0)
            for n, g in zip(nums, gens):
                p = tuple(a + Fraction(n, den) * b for a, b in zip(p, g))
            if L.contains(p):
                return False
    return True


def test_is_full_subgroup():
    assert is_full_subgroup(CUBIC, [X])
    L = Lattice([vec(H, 0, H), Y, Z])
    # only integer multiples of x lie in this lattice, so x is full
    assert is_full_subgroup(L, [X]) == _full_by_search(L, [X]) is True
    assert is_full_subgroup(FCC, [vec(1, 1, 0)]) == _full_by_search(FCC, [vec(1, 1, 0)]) is False
    assert is_full_subgroup(Lattice([V1, V2, V3]), [V2, V3])
    with pytest.raises(GeneratorNotInLattice):
        is_full_subgroup(CUBIC, [vec(H, 0, 0)])


def test_apply_isometry():
    assert apply_isometry(AffineIsometry.pure(IDENTITY), vec(Fraction(1, 4), Fraction(1, 4), 0)) == vec(
        Fraction(1, 4), Fraction(1, 4), 0
    )
    minus = mat([[-1, 0, 0], [0, -1, 0], [0, 0, -1]])
    assert apply_isometry(AffineIsometry.pure(minus), vec(H, H, H)) == vec(-H, -H, -H)
    # reflection in the plane x + y + z = 0
    refl = mat([[1, -2, -2], [-2, 1, -2], [-2, -2, 1]], T)
    assert apply_isometry(AffineIsometry(vec(1, 1, 1), refl), vec(0, 0, 0)) == vec(1, 1, 1)


def test_affine_isometry_rejects_non_orthogonal():
    with pytest.raises(NotOrthogonal):
        AffineIsometry(vec(0, 0, 0), mat([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))


def test_composition_law():
    swap = mat([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
    g1 = AffineIsometry(vec(1, H, 0), swap)
    g2 = AffineIsometry(vec(0, 0, T), mat([[-1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    p = vec(Fraction(2, 7), 5, -1)
    assert (g1 @ g2)(p) == g1(g2(p))
    assert (g1.inverse() @ g1)(p) == p


@given(fractions, fractions)
def test_scalars_canonical(a, b):
    c = Fraction(a.numerator, a.denominator) * b
    assert c == a * b and hash(c) == hash(a * b)
    assert c.denominator > 0


@given(vectors, vectors)
def test_isometry_preserves_distance(p, q):
    refl = mat([[1, -2, -2], [-2, 1, -2], [-2, -2, 1]], T)
    g = AffineIsometry(vec(H, 1, -T), refl)
    d = sub(g(p), g(q))
    e = sub(p, q)
    assert dot(d, d) == dot(e, e)
    assert neg(neg(p)) == p


def test_sublattice_index_of_catalog_lattices_with_itself():
    from crystk.crystal_classes import catalog

    for G in catalog():
        assert sublattice_index(G.lattice, G.lattice) == 1
