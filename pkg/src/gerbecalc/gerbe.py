"""Bundle gerbes as pure cocycles on Y^[2]; Dixmier-Douady two ways.

A gerbe over a locally split map is stored as a pure cocycle c on Y^[2]
(delta- and d-closed).  The default model keeps integral coefficients in
degree 2 (the Chern cocycle of the defining line bundle); with quotient
coefficients in degree 1 one obtains the torsion part of the theory, and
the final Bockstein is then a genuine connecting map.  Classes live in
H^{p+1}(X; Z) either way.
"""

from __future__ import annotations

from .abelian import Coefficients
from .cech import (CechCochain, cech_cohomology, cech_cup, cech_delta,
                   pullback_cochain, solve_primitive, zero_cochain)
from .covers import CoverError
from .multicomplex import (GridError, MultiComplexGrid, descend,
                           total_primitive, verify_primitive)
from .towers import simplicial_tower


class GerbeError(ValueError):
    pass


def class_to_cochain(H, cls, coefficients=None):
    """An ordered cocycle representing a class, from the generator lifts."""
    out = zero_cochain(H.site, H.degree, coefficients or H.coefficients)
    n_tors = len(cls.group.torsion)
    for i, v in enumerate(cls.torsion):
        if v:
            out = out + H.generator_cochain(i).scale(v)
    for i, v in enumerate(cls.free):
        if v:
            out = out + H.generator_cochain(n_tors + i).scale(v)
    return out


class GerbeCocycle:
    """(tower, c) with c pure of degree p on Y^[2].

    tower is a 1-direction tower of the locally split map; cochains use the
    tower's fixed base cover throughout.
    """

    def __init__(self, tower, c, grid=None):
        self.tower = tower
        self.grid = grid or MultiComplexGrid(tower, c.coefficients)
        if c.site is not self.grid.site((2,)):
            raise GerbeError("cocycle must live on the Y^[2] site of the tower")
        self.c = c

    @property
    def coefficients(self):
        return self.c.coefficients

    @property
    def degree(self):
        return self.c.degree

    def validate(self):
        return validate_gerbe(self)


def gerbe_from_split(split_map, c_values, degree=2, coefficients=None,
                     k_max=4):
    A = coefficients or Coefficients.integers()
    tower = simplicial_tower(split_map, k_max)
    grid = MultiComplexGrid(tower, A)
    c = CechCochain(grid.site((2,)), degree, A, c_values)
    return GerbeCocycle(tower, c, grid)


class GerbeReport:
    def __init__(self, valid, failures):
        self.valid = valid
        self.failures = failures

    def __repr__(self):
        return "valid gerbe" if self.valid else (
            "invalid gerbe: first failure %r" % (self.failures[0],))


def validate_gerbe(g):
    """Both closure conditions; reports the first failing basis pair."""
    failures = []
    dc = g.grid.delta(g.c)
    if not dc.is_zero():
        failures.append(("delta", min(dc.values)))
    dd = g.grid.d(1, (2,), g.c)
    if not dd.is_zero():
        failures.append(("d", min(dd.values)))
    return GerbeReport(not failures, failures)


class DDResult:
    """Class plus the replayable zig-zag that produced it."""

    def __init__(self, cls, trace, base_cochain):
        self.cls = cls
        self.trace = trace
        self.base_cochain = base_cochain


def _integral_class(grid, gamma, bockstein_first=True):
    """Reduce a descended base cocycle to the integral class."""
    from .cech import bockstein as bock
    A = gamma.coefficients
    site = grid.base_site()
    if A.kind == Coefficients.INTEGERS:
        H = cech_cohomology(site, gamma.degree)
        return H.reduce(gamma), H
    integral = bock(gamma, check=False)
    H = cech_cohomology(site, integral.degree)
    return H.reduce(integral), H


def dd_class(g, check=True):
    """Descend the pure cocycle, then pass to the integral class.

    Returns a DDResult: for integral coefficients the class of the
    descended (p+1)-cocycle; for quotient coefficients its Bockstein image
    one degree higher.
    """
    rep = validate_gerbe(g)
    if check and not rep.valid:
        raise GerbeError("not a gerbe: %r" % (rep,))
    gamma, trace = descend(g.grid, (2,), g.c, check=False)
    cls, _H = _integral_class(g.grid, gamma)
    return DDResult(cls, trace, gamma)


def murray_dd(g):
    """The cover-level definition: solve piecewise, push along d, repeat.

    Starting from the restriction of c to the Cech space of the cover, each
    stage solves delta sigma = (current) on the pieces of Y^[k] and pushes
    d sigma one tower level up; after p stages the degree-0 result is read
    off as an X-cochain on the (p+2)-fold intersections.  Must agree with
    dd_class on every valid input.
    """
    grid, A = g.grid, g.coefficients
    cur = g.c
    level = 2
    while cur.degree > 0:
        sigma = solve_primitive(cur, elim_cache=grid.solver_cache)
        if sigma is None:
            raise CoverError("cover not fine enough for the piecewise solve")
        # subtracting D(sigma) leaves -(-1)^l d sigma as the representative
        sign = -grid.dsign(1, sigma.degree, (level,))
        step = grid.d(1, (level,), sigma)
        cur = step if sign == 1 else -step
        level += 1
    alpha = _read_off_base_cochain(g.tower, grid, cur, level)
    site = grid.base_site()
    if not cech_delta(alpha).is_zero():
        raise GridError("assembled cochain is not an X-cocycle")
    cls, _H = _integral_class(grid, alpha)
    return cls


def _read_off_base_cochain(tower, grid, coch, level):
    """Read a degree-0 delta-closed cochain on Y^[level] as an X-cochain.

    The X-value on a window (i_0..i_{level-1}) at a component is the value
    of the cochain on the sheet reached by the sections s_{i_0},...,
    evaluated over the leading index's piece.
    """
    A = coch.coefficients
    base_site = grid.base_site()
    src_site = grid.site((level,))
    sp = tower.space((level,))
    out = {}
    degree = level - 1  # H^0 of the level-k Cech space is C^{k-1} of the base
    bas, _ = base_site.basis(degree)
    cube = tower.cube
    for (w, c) in bas:
        # send the representative vertex through the window's sections
        entries = []
        ok = True
        for idx in w:
            sec = cube.section(frozenset([1]), 1, idx)
            y = sec[0].get(c)
            if y is None:
                ok = False
                break
            entries.append(y)
        if not ok:
            raise GridError("sections do not cover the window region")
        vid = sp.index[0].get(tuple(entries))
        if vid is None:
            raise GridError("section images do not assemble into the tower")
        cu = src_site.comp_of_vertex(frozenset([w[0]]), vid)
        v = coch.values.get(((w[0],), cu))
        if v is not None and not A.is_zero(v):
            out[(w, c)] = v
    res = CechCochain(base_site, degree, A)
    res.values = out
    return res


class GerbeTrivialization:
    """q on Y with delta q = 0 and a witness w with delta w = c - d q."""

    def __init__(self, q, w):
        self.q = q
        self.w = w


def find_trivialization(g):
    """Constructive total primitive in the truncated double complex.

    Returns a GerbeTrivialization or None; None iff the descended class is
    nonzero (cross-checked by the test suite).
    """
    prim = total_primitive(g.grid, (2,), g.c)
    if prim is None:
        return None
    comps, normalized = prim
    if not normalized:
        raise GridError("gerbe primitive failed to normalize")
    if not verify_primitive(g.grid, (2,), g.c, comps):
        raise GridError("gerbe primitive does not reproduce the cocycle")
    p = g.degree
    q_raw = comps.get(((1,), p), g.grid.zero((1,), p))
    w = comps.get(((2,), p - 1), g.grid.zero((2,), p - 1))
    # D(B) = c reads delta w + (-1)^p d q_raw = c; store q with
    # delta w = c - d q exactly
    q = q_raw if p % 2 == 0 else -q_raw
    triv = GerbeTrivialization(q, w)
    check = g.grid.delta(w) + g.grid.d(1, (1,), q)
    if check.values != g.c.values or not g.grid.delta(q).is_zero():
        raise GridError("trivialization identities failed")
    return triv


def is_trivial(g):
    return find_trivialization(g) is not None


def trivialization_torsor(g, check_trivial=True):
    """Im(pi^*: H^p(X; Z) -> H^p(Y; Z)), the group acting on trivializations."""
    if check_trivial and find_trivialization(g) is None:
        raise GerbeError("gerbe is not trivial; no torsor of trivializations")
    return pullback_image_subgroup(g.tower, g.grid, g.degree)


def pullback_image_subgroup(tower, grid, degree):
    HX = cech_cohomology(grid.base_site(), degree)
    HY = cech_cohomology(grid.site((1,)), degree)
    from .abelian import subgroup_presentation
    vm = tower.axis_face((1,), 1, 0).level_maps[0]
    gens = []
    total = HX.group.rank + len(HX.group.torsion)
    for j in range(total):
        gen = HX.generator_cochain(j)
        pulled = pullback_cochain(grid.site((1,)), gen, vm)
        gens.append(HY.reduce(pulled))
    return subgroup_presentation(HY.group, gens)


def representable3(tower, cls, degree, grid=None):
    """True iff the class pulls back to zero on Y (the representability test)."""
    grid = grid or MultiComplexGrid(tower)
    HX = cech_cohomology(grid.base_site(), degree)
    if HX.group != cls.group:
        raise GerbeError("class does not live in the base cohomology supplied")
    rep = class_to_cochain(HX, cls)
    vm = tower.axis_face((1,), 1, 0).level_maps[0]
    pulled = pullback_cochain(grid.site((1,)), rep, vm)
    HY = cech_cohomology(grid.site((1,)), rep.degree)
    return HY.reduce(pulled).is_zero()


def construct_gerbe(tower, cls, degree, grid=None):
    """A gerbe whose class is the given one: solve delta b = pi^* rep,
    set c = -d b.  Integral mode; dd_class round-trips to the input."""
    grid = grid or MultiComplexGrid(tower)
    HX = cech_cohomology(grid.base_site(), degree)
    if HX.group != cls.group:
        raise GerbeError("class is not presented in H^%d of this base" % degree)
    rep = class_to_cochain(HX, cls)
    vm = tower.axis_face((1,), 1, 0).level_maps[0]
    pulled = pullback_cochain(grid.site((1,)), rep, vm)
    b = solve_primitive(pulled, elim_cache=grid.solver_cache)
    if b is None:
        raise GerbeError("class is not representable on this split map")
    c = -grid.d(1, (1,), b)
    return GerbeCocycle(tower, c, grid)


def decomposable_gerbe(tower, alpha2_cls, beta1_cls, grid=None):
    """The gerbe with class alpha u beta for alpha in H^2, beta in H^1.

    chi := d(rho) for a primitive rho of pi^* alpha on Y is the finite
    shift-class on Y^[2]; the cocycle is chi cup (pullback of a beta
    representative), which is pure, and its class is the cup product.
    """
    grid = grid or MultiComplexGrid(tower)
    H2 = cech_cohomology(grid.base_site(), 2)
    H1 = cech_cohomology(grid.base_site(), 1)
    if H2.group != alpha2_cls.group or H1.group != beta1_cls.group:
        raise GerbeError("classes must live in H^2(X), H^1(X)")
    a_rep = class_to_cochain(H2, alpha2_cls)
    b_rep = class_to_cochain(H1, beta1_cls)
    vm1 = tower.axis_face((1,), 1, 0).level_maps[0]
    pulled = pullback_cochain(grid.site((1,)), a_rep, vm1)
    rho = solve_primitive(pulled, elim_cache=grid.solver_cache)
    if rho is None:
        raise GerbeError("no primitive for pi^* alpha on Y")
    chi = grid.d(1, (1,), rho)
    # pull beta to Y^[2] through the base projection
    f1 = tower.axis_face((1,), 1, 0)
    f2 = tower.axis_face((2,), 1, 0)
    vm = [f1.level_maps[0][f2.level_maps[0][v]]
          for v in range(tower.space((2,)).ds.size(0))]
    beta_up = pullback_cochain(grid.site((2,)), b_rep, vm)
    c = cech_cup(chi, beta_up)
    return GerbeCocycle(tower, c, grid)


def gerbe_product(g1, g2):
    """Pointwise sum on a common tower."""
    if g1.tower is not g2.tower:
        raise GerbeError("product needs a common tower; pull back first")
    return GerbeCocycle(g1.tower, g1.c + g2.c, g1.grid)


def gerbe_inverse(g):
    return GerbeCocycle(g.tower, -g.c, g.grid)


def gerbe_pullback(g, tower2, vertex_map, window_map=None, window_fibers=None):
    """Pull the cocycle back along a map of towers (vertex level data)."""
    grid2 = MultiComplexGrid(tower2, g.coefficients)
    c2 = pullback_cochain(grid2.site((2,)), g.c, vertex_map,
                          window_fibers=window_fibers, window_map=window_map)
    return GerbeCocycle(tower2, c2, grid2)
