import pytest

from gerbecalc.covers import (
    Cover, CoverError, EtaleCube, MapCube, SquareCube, admissible_refinement,
    common_refinement, etale_space, etale_split, etale_square,
    intersection_cover, pullback_cover)
from gerbecalc.delta_set import (SimplicialMap, connected_components,
                                 standard_fixture, validate)
from gerbecalc.fixtures import good_cover, s2xs2_square
from gerbecalc.towers import (Tower, bisimplicial_tower, cube_tower,
                              simplicial_tower, verify_two_ways, CapExceeded)


def trivial_cover(X):
    return Cover(X, [[frozenset(range(X.size(k))) for k in range(X.dim + 1)]])


# --- covers -----------------------------------------------------------------

def test_good_covers_validate():
    for name in ("PT", "S1", "S2", "S3", "T2", "RP2", "S2xS2"):
        _, cov = good_cover(name)
        cov.validate()


def test_good_cover_sizes():
    assert len(good_cover("S3")[1]) == 5
    assert len(good_cover("S2")[1]) == 4
    assert len(good_cover("T2")[1]) == 9
    assert len(good_cover("RP2")[1]) == 6
    assert len(good_cover("S2xS2")[1]) == 16


def test_intersection_cover_ell1():
    _, U = good_cover("S3")
    V, tuples = intersection_cover(U, 1)
    assert V is U and len(tuples) == 5


def test_intersection_cover_s3_pairs():
    _, U = good_cover("S3")
    V, tuples = intersection_cover(U, 2)
    assert len(tuples) == 25  # all pairs of omit-vertex tetrahedra meet
    for i in range(5):
        idx = tuples.index((i, i))
        assert V.elements[idx] == U.elements[i]


def test_intersection_cover_s3_five():
    _, U = good_cover("S3")
    V, tuples = intersection_cover(U, 5)
    assert (0, 1, 2, 3, 4) not in tuples  # no simplex avoids all 5 vertices
    assert all(U.intersection_levels(t)[0] for t in tuples)


def test_common_refinement_with_base():
    _o, U = good_cover("S2")
    X = U.base
    W, m1, m2, pairs = common_refinement(U, trivial_cover(X))
    assert len(W) == len(U)
    m1.validate(), m2.validate()


def test_common_refinement_s2():
    _o, U = good_cover("S2")
    X = U.base
    W, _, _, pairs = common_refinement(U, U)
    assert len(W) == 16  # all 16 pairs meet for the omit-vertex cover


def test_et_of_refinement_is_fiber_product():
    _o, U = good_cover("S2")
    X = U.base
    W, _, _, _ = common_refinement(U, U)
    E, _, _, _, _ = etale_space(W)
    lsU = etale_split(U)
    from gerbecalc.delta_set import fiber_product
    P, _, _ = fiber_product(lsU.pi, lsU.pi)
    assert E.levels == P.levels  # Et(U cap V) = Et(U) x_X Et(V), levelwise


def test_pullback_cover_identity():
    _o, U = good_cover("S2")
    X = U.base
    V, lift = pullback_cover(SimplicialMap.identity(X), U)
    assert len(V) == len(U)
    lift.validate()


def test_pullback_cover_vertex():
    _o, U = good_cover("S1")
    X = U.base
    PT, _, _ = standard_fixture("PT").to_delta_set()
    inc = SimplicialMap(PT, X, [[0]])
    V, lift = pullback_cover(inc, U)
    # vertex 0 avoids vertices 1 and 2: it lies in two of the arc pieces
    assert len(V) == 2


def test_pullback_cover_etale():
    _o, U = good_cover("S2")
    ls = etale_split(U)
    V, lift = pullback_cover(ls.pi, U)
    assert len(V) == 4  # f^{-1} U has one element per element of U
    lift.validate()
    # refined by the sheets it falls into the 16 nonempty (sheet, element)
    # pieces of Et(U) x_X Et(U)
    from gerbecalc.covers import etale_sheets_cover
    sheets = etale_sheets_cover(ls)
    W, _, _, _ = common_refinement(sheets, V)
    assert len(W) == 16


def test_etale_split_validates():
    _o, U = good_cover("S3")
    X = U.base
    ls = etale_split(U)
    ls.validate()
    roots, _ = connected_components(ls.total_space)
    assert len(roots) == 5


def test_etale_split_trivial_cover():
    _o, _u = good_cover("S2")
    X = _u.base
    ls = etale_split(trivial_cover(X))
    ls.validate()
    assert ls.total_space.levels == X.levels


def test_admissible_refinement_trivial_v():
    _o, U = good_cover("S3")
    X = U.base
    ls = etale_split(U)
    Y = ls.total_space
    V = trivial_cover(Y)
    Up, Vp, refined, lifts = admissible_refinement(ls, V)
    assert len(Up) == len(U)
    refined.validate()


def test_admissible_refinement_pullback_v():
    _o, U = good_cover("S3")
    X = U.base
    ls = etale_split(U)
    V, _ = pullback_cover(ls.pi, U)
    Up, Vp, refined, lifts = admissible_refinement(ls, V)
    assert len(Vp) <= len(Up) * len(V)
    refined.validate()
    # pi o s = Id on Et(U'), levelwise: section then projection is identity
    for a in range(len(Up)):
        sec = refined.sections[a]
        for k, elt in enumerate(Up.elements[a]):
            for s in elt:
                assert refined.pi.level_maps[k][sec[k][s]] == s


# --- towers -------------------------------------------------------------------

def test_identity_split_tower():
    _o, _u = good_cover("S2")
    X = _u.base
    ls = etale_split(trivial_cover(X))
    tw = simplicial_tower(ls, 3)
    for k in range(4):
        sp = tw.space((k,))
        assert sp.ds.levels == X.levels  # Y^[k] = X for the identity split
        assert validate(sp.ds).valid
    tw.verify_position((3,))
    tw.verify_sections((2,), 1)


def test_s3_tower_components():
    _o, U = good_cover("S3")
    X = U.base
    tw = simplicial_tower(etale_split(U), 4)
    sp = tw.space((2,))
    roots, _ = connected_components(sp.ds)
    assert len(roots) == 25
    assert validate(sp.ds).valid


def test_s3_tower_identities():
    _o, U = good_cover("S3")
    X = U.base
    tw = simplicial_tower(etale_split(U), 4)
    for k in range(1, 5):
        tw.verify_position((k,))
    for k in range(4):
        tw.verify_sections((k,), 1)


def test_tower_cap():
    _o, U = good_cover("S2")
    X = U.base
    tw = simplicial_tower(etale_split(U), 2)
    with pytest.raises(CapExceeded):
        tw.space((3,))


def test_square_tower_small():
    _o, U = good_cover("S1")
    X = U.base
    sq = etale_square(X, U, U)
    sq.validate()
    tw = bisimplicial_tower(sq, 2, 2)
    verify_two_ways(tw, 2, 2)
    for alpha in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        tw.verify_position(alpha)
    tw.verify_sections((1, 1), 1)
    tw.verify_sections((1, 1), 2)
    tw.verify_sections((2, 1), 2)


def test_square_cube_matches_etale_cube():
    """The generic square machinery and the etale fast path agree."""
    _o, U = good_cover("S1")
    X = U.base
    sq = etale_square(X, U, U)
    t1 = Tower(SquareCube(sq), (2, 2))
    t2 = Tower(EtaleCube(X, [U, U]), (2, 2))
    for alpha in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        assert t1.space(alpha).ds.levels == t2.space(alpha).ds.levels
    # identical face map behaviour on (2,2)
    for j, i in [(1, 0), (1, 1), (2, 0), (2, 1)]:
        m1 = t1.axis_face((2, 2), j, i)
        m2 = t2.axis_face((2, 2), j, i)
        assert [len(c) for c in m1.level_maps] == [len(c) for c in m2.level_maps]
    t1.verify_sections((1, 1), 1)
    t2.verify_sections((1, 1), 1)


def test_s2xs2_square_tower():
    sq = s2xs2_square()
    sq.validate()
    tw = bisimplicial_tower(sq, 3, 3)
    sp = tw.space((2, 2))
    roots, _ = connected_components(sp.ds)
    assert len(roots) == 16 * 16
    tw.verify_position((2, 2))
    tw.verify_sections((1, 1), 2)


def test_cube_tower_consistency_n1_n2():
    _o, U = good_cover("S1")
    X = U.base
    c1 = cube_tower(EtaleCube(X, [U]), (3,))
    tw = simplicial_tower(etale_split(U), 3)
    for k in range(1, 4):
        assert c1.space((k,)).ds.levels == tw.space((k,)).ds.levels


def test_cube_tower_n3():
    _o, U = good_cover("S1")
    X = U.base
    cube = EtaleCube(X, [U, U, U])
    tw = cube_tower(cube, (1, 1, 1))
    sp = tw.space((1, 1, 1))
    roots, _ = connected_components(sp.ds)
    # components = triples of arc indices with nonempty triple intersections
    count = 0
    for i in range(3):
        for j in range(3):
            for k in range(3):
                inter = U.intersection_levels([i])
                levels = [a & b & c for a, b, c in zip(
                    U.elements[i], U.elements[j], U.elements[k])]
                if levels[0]:
                    count += 1
    assert len(roots) == count
    tw.verify_position((1, 1, 1))
    tw.verify_sections((1, 1, 0), 3)
