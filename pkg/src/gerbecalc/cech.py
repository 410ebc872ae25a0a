"""Cech cochains over a fixed admissible cover, and their calculus.

A cochain of degree l on a site assigns one coefficient value to every
pair (ordered (l+1)-tuple of cover indices, connected component of the
corresponding region).  Values are locally constant on intersections; this
replaces the sheaf of continuous functions, and is why the Bockstein below
is a connecting map rather than an isomorphism.

Cohomology groups are computed on the increasing-tuple (alternating)
subcomplex, which has the same cohomology as the full ordered complex
(the classical comparison; also property-tested on the fixtures), and
ordered cocycles are reduced by restriction to increasing tuples, which is
a chain map because subtuples of increasing tuples are increasing.
"""

from __future__ import annotations

from fractions import Fraction

from .abelian import (Coefficients, IntMatrix, cohomology_group,
                      reduce_class, solve_linear_sparse, SparseElimination)


class CechError(ValueError):
    pass


class CechSite:
    """A space mapped to the base, Cech'ed against the base cover.

    space: DeltaSet; base_proj: levelwise arrays to the cover's base (the
    identity when the space is the base itself).
    """

    def __init__(self, space, cover, base_proj=None, name=""):
        self.space = space
        self.cover = cover
        self.n_pieces = len(cover)
        if base_proj is None:
            base_proj = [list(range(space.size(k)))
                         for k in range(space.dim + 1)]
        self.base_proj = base_proj
        self.name = name
        self._regions = {}
        self._components = {}
        self._nonempty = {}
        self._basis = {}
        self._delta_elim = {}

    # -- regions and components ------------------------------------------------
    def region(self, key):
        """Levelwise simplex sets over the intersection of the cover pieces."""
        key = frozenset(key)
        if key in self._regions:
            return self._regions[key]
        inter = self.cover.intersection_levels(sorted(key))
        out = []
        for k in range(self.space.dim + 1):
            bp = self.base_proj[k]
            members = inter[k] if k < len(inter) else frozenset()
            out.append(frozenset(
                s for s in range(self.space.size(k)) if bp[s] in members))
        self._regions[key] = out
        return out

    def nonempty(self, key):
        key = frozenset(key)
        if key not in self._nonempty:
            self._nonempty[key] = bool(self.region(key)[0])
        return self._nonempty[key]

    def components(self, key):
        """(sorted comp ids, vertex->comp dict) for the region's graph.

        Component ids are the minimal vertex id they contain.
        """
        key = frozenset(key)
        if key in self._components:
            return self._components[key]
        reg = self.region(key)
        parent = {v: v for v in reg[0]}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        if self.space.dim >= 1:
            f0, f1 = self.space.faces[1][0], self.space.faces[1][1]
            for e in reg[1]:
                a, b = find(f1[e]), find(f0[e])
                if a != b:
                    if a < b:
                        parent[b] = a
                    else:
                        parent[a] = b
        comp = {v: find(v) for v in reg[0]}
        ids = sorted(set(comp.values()))
        self._components[key] = (ids, comp)
        return self._components[key]

    def comp_of_vertex(self, key, v):
        return self.components(key)[1][v]

    def comp_of_simplex(self, key, k, s):
        return self.comp_of_vertex(key, self.space.vertex_of(k, s))

    # -- ordered-tuple basis ------------------------------------------------------
    def window_sets(self, size):
        """All nonempty index sets of at most `size` distinct indices."""
        out = []
        seen = set()

        def rec(last, key):
            for i in range(last, self.n_pieces):
                nk = key | {i}
                if nk in seen:
                    continue
                if self.nonempty(nk):
                    seen.add(nk)
                    out.append(nk)
                    if len(nk) < size:
                        rec(i + 1, nk)

        rec(0, frozenset())
        return out

    def basis(self, degree):
        """Ordered basis [(tuple, comp)] at the given degree, lexicographic."""
        if degree in self._basis:
            return self._basis[degree]
        out = []

        def rec(prefix, key):
            if len(prefix) == degree + 1:
                for c in self.components(key)[0]:
                    out.append((tuple(prefix), c))
                return
            for i in range(self.n_pieces):
                nk = key | {i}
                if self.nonempty(nk):
                    prefix.append(i)
                    rec(prefix, frozenset(nk))
                    prefix.pop()

        rec([], frozenset())
        index = {bc: n for n, bc in enumerate(out)}
        self._basis[degree] = (out, index)
        return self._basis[degree]

    def increasing_basis(self, degree):
        out = []

        def rec(start, prefix, key):
            if len(prefix) == degree + 1:
                for c in self.components(key)[0]:
                    out.append((tuple(prefix), c))
                return
            for i in range(start, self.n_pieces):
                nk = key | {i}
                if self.nonempty(nk):
                    prefix.append(i)
                    rec(i + 1, prefix, frozenset(nk))
                    prefix.pop()

        rec(0, [], frozenset())
        return out, {bc: n for n, bc in enumerate(out)}

    def comp_down_fibers(self, big, small):
        """For regions of `big` inside `small`: comp-of-big -> comp-of-small,
        and the fibers small-comp -> [big comps]."""
        key = (frozenset(big), frozenset(small))
        ids, comp = self.components(key[0])
        down = {}
        fibers = {}
        for c in ids:
            d = self.comp_of_vertex(key[1], c)
            down[c] = d
            fibers.setdefault(d, []).append(c)
        return down, fibers


class CechCochain:
    """Sparse coefficient-valued function on (window, component) pairs."""

    __slots__ = ("site", "degree", "coefficients", "values")

    def __init__(self, site, degree, coefficients, values=None):
        self.site = site
        self.degree = degree
        self.coefficients = coefficients
        self.values = {}
        if values:
            A = coefficients
            for key, v in values.items():
                cv = A.canon(v)
                if not A.is_zero(cv):
                    self.values[key] = cv

    def copy(self):
        c = CechCochain(self.site, self.degree, self.coefficients)
        c.values = dict(self.values)
        return c

    def get(self, window, comp):
        return self.values.get((window, comp), self.coefficients.zero())

    def is_zero(self):
        return not self.values

    def __add__(self, other):
        self._compat(other)
        A = self.coefficients
        out = dict(self.values)
        for key, v in other.values.items():
            nv = A.add(out.get(key, A.zero()), v)
            if A.is_zero(nv):
                out.pop(key, None)
            else:
                out[key] = nv
        c = CechCochain(self.site, self.degree, A)
        c.values = out
        return c

    def __neg__(self):
        c = CechCochain(self.site, self.degree, self.coefficients)
        c.values = {k: self.coefficients.neg(v) for k, v in self.values.items()}
        return c

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        A = self.coefficients
        c = CechCochain(self.site, self.degree, A)
        for key, v in self.values.items():
            nv = A.scale(k, v)
            if not A.is_zero(nv):
                c.values[key] = nv
        return c

    def __eq__(self, other):
        return (isinstance(other, CechCochain) and self.site is other.site
                and self.degree == other.degree
                and self.coefficients == other.coefficients
                and self.values == other.values)

    def _compat(self, other):
        if self.site is not other.site or self.degree != other.degree \
                or self.coefficients != other.coefficients:
            raise CechError("incompatible cochains")

    def to_rows(self):
        """Canonical sorted [(window, comp, value)] list (golden files)."""
        def keyf(item):
            (w, c), v = item
            return (list(w), c)
        return [[list(w), c, _json_value(v)]
                for (w, c), v in sorted(self.values.items(), key=keyf)]


def _json_value(v):
    if isinstance(v, Fraction):
        return [v.numerator, v.denominator]
    return v


def zero_cochain(site, degree, coefficients):
    return CechCochain(site, degree, coefficients)


# ---------------------------------------------------------------------------
# the Cech differential
# ---------------------------------------------------------------------------

def cech_delta(alpha):
    """(delta a)(i_0..i_{l+1}, c) = sum_j (-1)^j a(drop j, comp below c).

    Computed input-driven: every entry contributes to the windows obtained
    by inserting one index, on the components lying above its component.
    """
    site, A = alpha.site, alpha.coefficients
    out = {}
    n = site.n_pieces
    for (w, c), v in alpha.values.items():
        small = frozenset(w)
        for i in range(n):
            big = small | {i}
            if not site.nonempty(big):
                continue
            down, fibers = site.comp_down_fibers(big, small)
            ups = fibers.get(c)
            if not ups:
                continue
            for j in range(len(w) + 1):
                nw = w[:j] + (i,) + w[j:]
                sign = 1 if j % 2 == 0 else -1
                for cu in ups:
                    key = (nw, cu)
                    nv = A.add(out.get(key, A.zero()), A.scale(sign, v))
                    if A.is_zero(nv):
                        out.pop(key, None)
                    else:
                        out[key] = nv
    res = CechCochain(site, alpha.degree + 1, A)
    res.values = out
    return res


def pullback_cochain(dst_site, alpha, vertex_map, window_fibers=None,
                     window_map=None):
    """Chain-map pullback along a map of spaces covering a map of covers.

    vertex_map: level-0 array dst-space -> src-space.  Windows of the
    destination map to source windows via window_map (identity when None);
    window_fibers(src_window) optionally enumerates the destination windows
    over a source window (identity fibration when None).
    """
    src_site = alpha.site
    A = alpha.coefficients
    out = {}
    for (w, c), v in alpha.values.items():
        dst_windows = window_fibers(w) if window_fibers else [w]
        for nw in dst_windows:
            key = frozenset(nw)
            if not dst_site.nonempty(key):
                continue
            src_w = frozenset(window_map(nw)) if window_map else frozenset(w)
            for cd in dst_site.components(key)[0]:
                up = src_site.comp_of_vertex(src_w, vertex_map[cd])
                if up == c:
                    out[(nw, cd)] = A.add(out.get((nw, cd), A.zero()), v)
    res = CechCochain(dst_site, alpha.degree, A)
    res.values = {k: v for k, v in out.items() if not A.is_zero(v)}
    return res


def cech_cup(alpha, beta, pairing=None):
    """(a u b)(i_0..i_{p+q}, c) = a(front, c|front) * b(back, c|back).

    The coefficient pairing defaults to integer scaling Z x A -> A (alpha
    integral) or Z x Z -> Z.
    """
    if alpha.site is not beta.site:
        raise CechError("cup of cochains on different covers")
    if alpha.coefficients.kind != Coefficients.INTEGERS and pairing is None:
        raise CechError("left cup factor must be integral")
    A = beta.coefficients
    site = alpha.site
    p, q = alpha.degree, beta.degree
    out = {}
    by_head = {}
    for (w, c), v in beta.values.items():
        by_head.setdefault(w[0], []).append((w, c, v))
    for (wa, ca), va in alpha.values.items():
        for wb, cb, vb in by_head.get(wa[-1], ()):
            nw = wa + wb[1:]
            key = frozenset(nw)
            if not site.nonempty(key):
                continue
            seta, setb = frozenset(wa), frozenset(wb)
            for c in site.components(key)[0]:
                rep = c
                if site.comp_of_vertex(seta, rep) != ca:
                    continue
                if site.comp_of_vertex(setb, rep) != cb:
                    continue
                val = pairing(va, vb) if pairing else A.scale(va, vb)
                cur = A.add(out.get((nw, c), A.zero()), val)
                if A.is_zero(cur):
                    out.pop((nw, c), None)
                else:
                    out[(nw, c)] = cur
    res = CechCochain(site, p + q, A)
    res.values = out
    return res


# ---------------------------------------------------------------------------
# matrices, cohomology, reduction
# ---------------------------------------------------------------------------

def delta_matrix(site, degree, increasing=True):
    """Matrix of delta from `degree` to `degree`+1 on the chosen basis."""
    if increasing:
        bsrc, isrc = site.increasing_basis(degree)
        bdst, idst = site.increasing_basis(degree + 1)
    else:
        bsrc, isrc = site.basis(degree)
        bdst, idst = site.basis(degree + 1)
    data = {}
    for col, (w, c) in enumerate(bsrc):
        small = frozenset(w)
        for i in range(site.n_pieces):
            big = small | {i}
            if not site.nonempty(big):
                continue
            if increasing and i in small:
                continue
            down, fibers = site.comp_down_fibers(big, small)
            ups = fibers.get(c)
            if not ups:
                continue
            if increasing:
                j0 = sum(1 for x in w if x < i)
                positions = [(j0, 1 if j0 % 2 == 0 else -1)]
            else:
                positions = [(j, 1 if j % 2 == 0 else -1)
                             for j in range(len(w) + 1)]
            for j, sign in positions:
                nw = w[:j] + (i,) + w[j:]
                for cu in ups:
                    r = idst.get((nw, cu))
                    if r is None:
                        continue
                    key = (r, col)
                    nv = data.get(key, 0) + sign
                    if nv:
                        data[key] = nv
                    elif key in data:
                        del data[key]
    return IntMatrix.from_entries_dict(len(bdst), len(bsrc), data)


class CechCohomology:
    """Presented Cech cohomology at one degree, with reduction of cochains."""

    def __init__(self, site, degree, coefficients):
        self.site = site
        self.degree = degree
        self.coefficients = coefficients
        d_out = delta_matrix(site, degree, increasing=True)
        if degree > 0:
            d_in = delta_matrix(site, degree - 1, increasing=True)
        else:
            d_in = IntMatrix.zero(d_out.cols, 0)
        self.group = cohomology_group(d_in, d_out, coefficients)
        self.basis, self.index = site.increasing_basis(degree)

    def reduce(self, alpha):
        """Class of an ordered cocycle: restrict to increasing windows."""
        if alpha.degree != self.degree:
            raise CechError("degree mismatch")
        vec = {}
        for (w, c), v in alpha.values.items():
            if all(w[i] < w[i + 1] for i in range(len(w) - 1)):
                idx = self.index.get((w, c))
                if idx is None:
                    raise CechError("cochain window outside the cover nerve")
                vec[idx] = v
        return reduce_class(self.group, vec)

    def generator_cochain(self, j, coefficients=None):
        """The j-th generator as an ordered cocycle (skew extension)."""
        A = coefficients or self.coefficients
        lift = self.group.basis_lift
        vals = {}
        for i, bc in enumerate(self.basis):
            v = lift[(i, j)]
            if v:
                vals[bc] = v
        return skew_extend(self.site, self.degree, A, vals)


def cech_cohomology(site, degree, coefficients=None):
    return CechCohomology(site, degree, coefficients or Coefficients.integers())


def skew_extend(site, degree, coefficients, increasing_values):
    """Skew-symmetric extension of an increasing-window cochain.

    Value on a repeated-index window is zero; on distinct indices it is the
    permutation sign times the value on the sorted window.  This is the
    classical inclusion of alternating cochains as a subcomplex of the
    ordered complex: it sends increasing cocycles to ordered cocycles.
    """
    from itertools import permutations
    out = {}
    A = coefficients
    for (w, c), v in increasing_values.items():
        if A.is_zero(v):
            continue
        items = list(enumerate(w))
        for perm in permutations(range(len(w))):
            nw = tuple(w[p] for p in perm)
            # sign of the permutation
            sign = 1
            seen = [False] * len(perm)
            for i in range(len(perm)):
                if seen[i]:
                    continue
                j = i
                clen = 0
                while not seen[j]:
                    seen[j] = True
                    j = perm[j]
                    clen += 1
                if clen % 2 == 0:
                    sign = -sign
            out[(nw, c)] = A.scale(sign, v)
    return CechCochain(site, degree, A, out)


def solve_primitive(beta, elim_cache=None):
    """x with delta x = beta, or None; deterministic via the sparse engine."""
    site, A = beta.site, beta.coefficients
    degree = beta.degree
    if degree == 0:
        return None if beta.values else zero_cochain(site, 0, A)
    bsrc, isrc = site.basis(degree - 1)
    bdst, idst = site.basis(degree)
    key = (id(site), degree)
    if elim_cache is not None and key in elim_cache:
        elim, M = elim_cache[key]
    else:
        M = delta_matrix(site, degree - 1, increasing=False)
        elim = SparseElimination(M.rows, M.cols, M.entries_dict()).eliminate()
        if elim_cache is not None:
            elim_cache[key] = (elim, M)
    b = {}
    for bc, v in beta.values.items():
        idx = idst.get(bc)
        if idx is None:
            raise CechError("cochain window outside the cover nerve")
        b[idx] = v
    sol = solve_linear_sparse(M.rows, M.cols, M.entries_dict(), b, A, elim=elim)
    if sol is None:
        return None
    vals = {bsrc[i]: v for i, v in sol.items()}
    return CechCochain(site, degree - 1, A, vals)


# ---------------------------------------------------------------------------
# Bockstein connecting map
# ---------------------------------------------------------------------------

def _canonical_lift(v, coefficients):
    if coefficients.kind == Coefficients.CYCLIC:
        return int(v) % coefficients.n
    if coefficients.kind == Coefficients.RATIONALS_MOD_ONE:
        f = Fraction(v)
        return f - (f.numerator // f.denominator)
    raise CechError("Bockstein needs quotient coefficients")


def bockstein(alpha, check=True):
    """Connecting map of Z -> Z -> Z/n or Z -> Q -> Q/Z: lift, delta, divide.

    Input: a delta-cocycle with CyclicMod or RationalsModOne coefficients.
    Output: an integral cocycle one degree up.  The class of the output is
    independent of the chosen cocycle representative.
    """
    site, A = alpha.site, alpha.coefficients
    if A.kind == Coefficients.INTEGERS:
        raise CechError("Bockstein of integral cochains is zero by definition")
    if check and not cech_delta(alpha).is_zero():
        raise CechError("Bockstein input must be a cocycle")
    Z = Coefficients.integers()
    lifted = CechCochain(site, alpha.degree, Z)
    lifted.values = {k: _canonical_lift(v, A) for k, v in alpha.values.items()}
    lifted.values = {k: v for k, v in lifted.values.items() if v}
    d = cech_delta(lifted)
    out = CechCochain(site, alpha.degree + 1, Z)
    if A.kind == Coefficients.CYCLIC:
        n = A.n
        for k, v in d.values.items():
            if v % n:
                raise CechError("input was not a mod-%d cocycle" % n)
            if v // n:
                out.values[k] = v // n
    else:
        for k, v in d.values.items():
            if Fraction(v).denominator != 1:
                raise CechError("input was not a mod-1 cocycle")
            iv = int(v)
            if iv:
                out.values[k] = iv
    return out


def section_pullback(refined, lifts, site_X, site_Y, alpha):
    """s*_l on Cech cochains: pull back through the first-factor lift.

    refined/lifts come from admissible_refinement; alpha lives on the V'
    cover of Y (site_Y), the output on the U' cover of X (site_X).  This
    satisfies s* pi* = Id but does NOT commute with delta in general (the
    lift prefers the leading window index).
    """
    A = alpha.coefficients
    ell = alpha.degree
    vplookup = lifts["vplookup"]
    v_of = lifts["v_of"]
    out = {}
    basis, _ = site_X.basis(ell)
    for w, c in basis:
        v1 = v_of[w[0]]
        tau = []
        ok = True
        for a in w:
            t = vplookup.get((a, v1))
            if t is None:
                ok = False
                break
            tau.append(t)
        if not ok:
            continue
        tau = tuple(tau)
        sec = refined.sections[w[0]]
        y = sec[0][c]  # c is a vertex id of X in the region
        cy = site_Y.comp_of_vertex(frozenset(tau), y)
        v = alpha.values.get((tau, cy))
        if v is not None and not A.is_zero(v):
            out[(w, c)] = v
    res = CechCochain(site_X, ell, A)
    res.values = out
    return res


def random_cochain(site, degree, coefficients, rng, entries=40, bound=3):
    """Seeded sparse random cochain (property-test input)."""
    basis, _ = site.basis(degree)
    if not basis:
        return zero_cochain(site, degree, coefficients)
    vals = {}
    for _ in range(min(entries, len(basis))):
        bc = basis[rng.randrange(len(basis))]
        if coefficients.kind == Coefficients.INTEGERS:
            v = rng.randint(-bound, bound)
        elif coefficients.kind == Coefficients.CYCLIC:
            v = rng.randrange(coefficients.n)
        else:
            v = Fraction(rng.randint(0, 11), 12)
        vals[bc] = v
    return CechCochain(site, degree, coefficients, vals)
