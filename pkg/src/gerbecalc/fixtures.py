"""Standard good covers, split squares and cubes for the fixture spaces.

Good cover constructions:
  * omit-vertex cover of a simplex boundary (and of the 3-cycle): element v
    consists of the simplices avoiding v; iterated intersections are full
    simplices on the complementary vertices, hence contractible.
  * two-arc cover of the circle: two contractible arcs meeting in two
    points (components acyclic); used where small covers matter.
  * product cover: elementwise products on a staircase product; pieces are
    products of the factor pieces.
  * star cover of the barycentric subdivision (any complex, e.g. RP2):
    element v holds the flags of simplices containing v; intersections are
    closed stars of simplices, hence cones, and the nerve is the complex
    itself.
Goodness (acyclicity of all iterated intersections) is verified by the
test suite against the simplicial oracle rather than assumed.
"""

from __future__ import annotations

from .covers import Cover, etale_split, etale_square, EtaleCube
from .delta_set import (OrderedComplex, barycentric_subdivision,
                        standard_fixture)


def _subcomplex_cover(ordered, families):
    """Cover of ordered.to_delta_set() from simplex-set families."""
    X, tables, index = ordered.to_delta_set()
    elements = []
    for fam in families:
        levels = []
        for k in range(X.dim + 1):
            levels.append(frozenset(
                i for i, t in enumerate(tables[k]) if frozenset(t) in fam))
        elements.append(levels)
    return Cover(X, elements)


def omit_vertex_families(ordered):
    out = []
    for v in ordered.vertices:
        out.append({s for s in ordered.simplices if v not in s})
    return out


def omit_vertex_cover(ordered):
    return _subcomplex_cover(ordered, omit_vertex_families(ordered))


def arc_families(ordered):
    """Two-arc cover of the 3-cycle on vertices (a, b, c)."""
    a, b, c = ordered.vertices
    big = {frozenset([a]), frozenset([b]), frozenset([c]),
           frozenset([a, b]), frozenset([b, c])}
    small = {frozenset([a]), frozenset([c]), frozenset([a, c])}
    return [big, small]


def product_families(prod, fams_a, fams_b):
    """Families on osc_product(A, B) from factor families (pairs, ordered)."""
    out = []
    for fa in fams_a:
        for fb in fams_b:
            fam = set()
            for s in prod.simplices:
                pa = frozenset(v[0] for v in s)
                pb = frozenset(v[1] for v in s)
                if pa in fa and pb in fb:
                    fam.add(s)
            if fam:
                out.append(fam)
    return out


def sd_star_families(ordered, sd):
    """Per original vertex v: flags of simplices all containing v."""
    out = []
    for v in ordered.vertices:
        fam = set()
        for s in sd.simplices:
            # sd vertices are tuples of original vertices
            if all(v in set(t) for t in s):
                fam.add(s)
        out.append(fam)
    return out


_SPACES = {}
_COVERS = {}


def fixture_space(name):
    """The complex the named good cover lives on (RP2 uses its subdivision)."""
    if name not in _SPACES:
        if name == "RP2":
            _SPACES[name] = barycentric_subdivision(standard_fixture("RP2"))
        else:
            _SPACES[name] = standard_fixture(name)
    return _SPACES[name]


def _families(name):
    if name in ("S1", "S2", "S3"):
        return omit_vertex_families(standard_fixture(name))
    if name == "S1arc":
        return arc_families(standard_fixture("S1"))
    if name == "PT":
        return [set(standard_fixture("PT").simplices)]
    if name == "T2":
        s1 = standard_fixture("S1")
        return product_families(standard_fixture("T2"),
                                omit_vertex_families(s1),
                                omit_vertex_families(s1))
    if name == "RP2":
        orig = standard_fixture("RP2")
        return sd_star_families(orig, fixture_space("RP2"))
    if name == "S2xS2":
        s2 = standard_fixture("S2")
        return product_families(standard_fixture("S2xS2"),
                                omit_vertex_families(s2),
                                omit_vertex_families(s2))
    if name == "S2xS3":
        return product_families(standard_fixture("S2xS3"),
                                omit_vertex_families(standard_fixture("S2")),
                                omit_vertex_families(standard_fixture("S3")))
    if name == "S1xS1xS2":
        s1 = standard_fixture("S1")
        inner = product_families(
            osc_inner(), arc_families(s1),
            omit_vertex_families(standard_fixture("S2")))
        return product_families(standard_fixture("S1xS1xS2"),
                                arc_families(s1), inner)
    raise KeyError("no good cover defined for %r" % (name,))


def osc_inner():
    from .delta_set import osc_product
    return osc_product(standard_fixture("S1"), standard_fixture("S2"))


def good_cover(name):
    """(space DeltaSet, Cover) for the named fixture; validated once."""
    if name not in _COVERS:
        ordered = fixture_space(name)
        cov = _subcomplex_cover(ordered, _families(name))
        cov.validate()
        _COVERS[name] = (ordered, cov)
    ordered, cov = _COVERS[name]
    return ordered, cov


# ---------------------------------------------------------------------------
# standard split data for the theorem fixtures
# ---------------------------------------------------------------------------

def fixture_split(name):
    """Etale split map over the named good cover (gerbe fixtures)."""
    _, cov = good_cover(name)
    return etale_split(cov)


def s2xs2_square():
    """Etale square over S2 x S2: legs pull the factor covers back."""
    prod = standard_fixture("S2xS2")
    s2 = standard_fixture("S2")
    fams = omit_vertex_families(s2)
    whole_b = set(s2.simplices)
    fam1 = product_families(prod, fams, [whole_b])
    fam2 = product_families(prod, [whole_b], fams)
    X, _, _ = prod.to_delta_set()
    U1 = _subcomplex_cover(prod, fam1)
    U2 = _subcomplex_cover(prod, fam2)
    return etale_square(X, U1, U2)


def s2xs2_cube():
    prod = standard_fixture("S2xS2")
    s2 = standard_fixture("S2")
    fams = omit_vertex_families(s2)
    whole = set(s2.simplices)
    U1 = _subcomplex_cover(prod, product_families(prod, fams, [whole]))
    U2 = _subcomplex_cover(prod, product_families(prod, [whole], fams))
    X, _, _ = prod.to_delta_set()
    return EtaleCube(X, [U1, U2])


def s1xs1xs2_cube():
    """Etale 3-cube over S1 x S1 x S2 (arc covers on the circle legs)."""
    s1 = standard_fixture("S1")
    s2 = standard_fixture("S2")
    inner = osc_inner()
    prod = standard_fixture("S1xS1xS2")
    arcs = arc_families(s1)
    omit = omit_vertex_families(s2)
    whole_s1 = set(s1.simplices)
    whole_inner = set(inner.simplices)
    whole_s2 = set(s2.simplices)
    U1 = _subcomplex_cover(prod, product_families(prod, arcs, [whole_inner]))
    fam2_inner = product_families(inner, arcs, [whole_s2])
    U2 = _subcomplex_cover(prod, product_families(prod, [whole_s1], fam2_inner))
    fam3_inner = product_families(inner, [whole_s1], omit)
    U3 = _subcomplex_cover(prod, product_families(prod, [whole_s1], fam3_inner))
    X, _, _ = prod.to_delta_set()
    return EtaleCube(X, [U1, U2, U3])
