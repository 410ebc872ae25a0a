"""Covers by subcomplexes, locally split maps, split squares/cubes, towers.

A Cover is a family of face-closed levelwise subsets whose union is the
base.  Locally split maps carry explicit section data per cover element;
nothing is ever searched for.  Split squares and cubes bundle the
certificates the tower construction needs.

Towers realize the fiber-power multisimplicial spaces over a split n-cube.
A simplex of the tower space at position alpha is a "grid": one corner
simplex per cell of the box prod(alpha_j over the support axes), with all
slices along each axis sharing their projection.  Face maps delete a slice;
the contraction sections prepend a slice computed from the certificate
sections, which is the geometric content of the chain homotopies.
"""

from __future__ import annotations

from itertools import product as iproduct

from .delta_set import (DeltaSet, SimplicialMap, fiber_product, validate)


class CoverError(ValueError):
    pass


class Cover:
    """Face-closed subcomplex family covering the base.

    elements[i][k] is the set of level-k simplex ids in element i.
    """

    __slots__ = ("base", "elements")

    def __init__(self, base, elements):
        self.base = base
        self.elements = [
            [frozenset(level) for level in elt] for elt in elements]

    def __len__(self):
        return len(self.elements)

    def level_sets(self, i):
        return self.elements[i]

    def membership(self, i, k, s):
        return s in self.elements[i][k]

    def validate(self):
        X = self.base
        for i, elt in enumerate(self.elements):
            if len(elt) != X.dim + 1:
                raise CoverError("element %d has wrong number of levels" % i)
            for k in range(1, X.dim + 1):
                for s in elt[k]:
                    for j in range(k + 1):
                        if X.faces[k][j][s] not in elt[k - 1]:
                            raise CoverError(
                                "element %d not face-closed at level %d" % (i, k))
        for k in range(X.dim + 1):
            union = set()
            for elt in self.elements:
                union |= elt[k]
            if union != set(range(X.size(k))):
                raise CoverError("cover union misses level-%d simplices" % k)
        return self

    def intersection_levels(self, indices):
        """Levelwise intersection of the given element indices."""
        indices = list(indices)
        if not indices:
            return [frozenset(range(n)) for n in self.base.levels]
        out = list(self.elements[indices[0]])
        for i in indices[1:]:
            out = [a & b for a, b in zip(out, self.elements[i])]
        return out

    def is_nonempty(self, indices):
        return bool(self.intersection_levels(indices)[0])

    def to_json(self):
        return {"base": self.base.to_json(),
                "elements": [[sorted(level) for level in elt]
                             for elt in self.elements]}


def subcomplex_from_vertices_condition(X, keep):
    """Levelwise subsets of simplices whose test `keep(k, s)` passes."""
    return [frozenset(s for s in range(X.size(k)) if keep(k, s))
            for k in range(X.dim + 1)]


class CoverMap:
    """Map of covers: index map on elements plus per-element simplicial data.

    piece_maps[i] is a levelwise dict {source simplex id -> target simplex id}
    defined on the source element's levels, landing in the indexed target
    element, commuting with inclusions.
    """

    __slots__ = ("source", "target", "index_map", "piece_maps")

    def __init__(self, source, target, index_map, piece_maps):
        self.source = source
        self.target = target
        self.index_map = list(index_map)
        self.piece_maps = piece_maps

    def validate(self):
        for i, elt in enumerate(self.source.elements):
            j = self.index_map[i]
            pm = self.piece_maps[i]
            for k, level in enumerate(elt):
                for s in level:
                    if s not in pm[k]:
                        raise CoverError("piece map %d not total at level %d" % (i, k))
                    if pm[k][s] not in self.target.elements[j][k]:
                        raise CoverError("piece map %d leaves target element" % i)
        return self


def intersection_cover(U, ell):
    """Cover by ordered ell-tuples (repeats allowed) with nonempty intersection.

    Returns (cover, tuples) with tuples[i] the index tuple of element i.
    """
    if ell < 1:
        raise CoverError("ell must be >= 1")
    if ell == 1:
        return U, [(i,) for i in range(len(U))]
    tuples = []
    elements = []
    # prune on the underlying set: the intersection depends only on it
    cache = {}

    def levels_for(key):
        if key not in cache:
            cache[key] = U.intersection_levels(sorted(key))
        return cache[key]

    def rec(prefix, key):
        if len(prefix) == ell:
            tuples.append(tuple(prefix))
            elements.append(levels_for(key))
            return
        for i in range(len(U)):
            nk = key | {i}
            if levels_for(frozenset(nk))[0]:
                prefix.append(i)
                rec(prefix, frozenset(nk))
                prefix.pop()

    rec([], frozenset())
    return Cover(U.base, elements), tuples


def common_refinement(U, V):
    """U cap V with the two refinement maps; empty pieces dropped."""
    if U.base is not V.base:
        raise CoverError("covers of different bases")
    elements, pairs = [], []
    for i, eu in enumerate(U.elements):
        for j, ev in enumerate(V.elements):
            inter = [a & b for a, b in zip(eu, ev)]
            if inter[0]:
                elements.append(inter)
                pairs.append((i, j))
    W = Cover(U.base, elements)
    ident = [{k: {s: s for s in level} for k, level in enumerate(elt)}
             for elt in W.elements]

    def as_map(side):
        index_map = [p[side] for p in pairs]
        piece_maps = [[{s: s for s in level} for level in elt]
                      for elt in W.elements]
        return CoverMap(W, U if side == 0 else V, index_map, piece_maps)

    return W, as_map(0), as_map(1), pairs


def pullback_cover(f, U):
    """f^{-1} U on the source of f, with the lifted cover map."""
    Y = f.source
    elements = []
    kept = []
    for i, elt in enumerate(U.elements):
        levels = []
        for k in range(Y.dim + 1):
            sel = frozenset(s for s in range(Y.size(k))
                            if f.level_maps[k][s] in elt[k])
            levels.append(sel)
        if levels[0]:
            elements.append(levels)
            kept.append(i)
    cov = Cover(Y, elements)
    piece_maps = [[{s: f.level_maps[k][s] for s in level}
                   for k, level in enumerate(elt)] for elt in cov.elements]
    lift = CoverMap(cov, U, kept, piece_maps)
    return cov, lift


def etale_space(U):
    """Disjoint union of the cover elements, with projection and local ids.

    Returns (E, pi, piece, local, global_id) where piece[k][s] is the element
    index of an E-simplex, local[k][s] its id inside the element subcomplex,
    and global_id[i][k] maps (element, base simplex) -> E simplex.
    """
    X = U.base
    levels = [0] * (X.dim + 1)
    piece = [[] for _ in range(X.dim + 1)]
    base_of = [[] for _ in range(X.dim + 1)]
    global_id = [dict() for _ in U.elements]
    for i, elt in enumerate(U.elements):
        gi = {}
        for k in range(X.dim + 1):
            for s in sorted(elt[k]):
                gi[(k, s)] = levels[k]
                piece[k].append(i)
                base_of[k].append(s)
                levels[k] += 1
        global_id[i] = gi
    faces = [None]
    for k in range(1, X.dim + 1):
        cols = []
        for j in range(k + 1):
            col = []
            for idx in range(levels[k]):
                i, s = piece[k][idx], base_of[k][idx]
                col.append(global_id[i][(k - 1, X.faces[k][j][s])])
            cols.append(col)
        faces.append(cols)
    E = DeltaSet(levels, faces)
    pi = SimplicialMap(E, X, base_of)
    return E, pi, piece, base_of, global_id


class LocallySplitMap:
    """pi: Y -> X with a cover of X and explicit sections over each element.

    sections[i] is a levelwise dict {x simplex id -> y simplex id} on the
    element's levels with pi(s(x)) = x, commuting with faces.
    """

    __slots__ = ("pi", "cover", "sections")

    def __init__(self, pi, cover, sections):
        self.pi = pi
        self.cover = cover
        self.sections = sections

    @property
    def total_space(self):
        return self.pi.source

    @property
    def base(self):
        return self.pi.target

    def validate(self):
        X = self.base
        for i, elt in enumerate(self.cover.elements):
            sec = self.sections[i]
            for k in range(X.dim + 1):
                for s in elt[k]:
                    if s not in sec[k]:
                        raise CoverError("section %d not total at level %d" % (i, k))
                    if self.pi.level_maps[k][sec[k][s]] != s:
                        raise CoverError("pi(s(x)) != x on element %d" % i)
            for k in range(1, X.dim + 1):
                for s in elt[k]:
                    for j in range(k + 1):
                        lhs = self.pi.source.faces[k][j][sec[k][s]]
                        rhs = sec[k - 1][X.faces[k][j][s]]
                        if lhs != rhs:
                            raise CoverError(
                                "section %d does not commute with faces" % i)
        return self


def etale_sheets_cover(split_map):
    """The cover of an etale total space by its sheets (section images)."""
    E = split_map.total_space
    elements = []
    for sec in split_map.sections:
        levels = []
        for k in range(E.dim + 1):
            levels.append(frozenset(sec[k].values()))
        elements.append(levels)
    return Cover(E, elements)


def etale_split(U):
    """The inclusion Et(U) -> X as a locally split map (identity sections)."""
    E, pi, piece, base_of, global_id = etale_space(U)
    sections = []
    for i, elt in enumerate(U.elements):
        sec = [dict() for _ in range(U.base.dim + 1)]
        for k in range(U.base.dim + 1):
            for s in elt[k]:
                sec[k][s] = global_id[i][(k, s)]
        sections.append(sec)
    return LocallySplitMap(pi, U, sections)


def admissible_refinement(split_map, V):
    """Canonical refinements U' of the base cover and V' of V.

    U' = s^{-1} V, V' = pi^{-1} U' cap V; returns (U', V', lifts) where
    lifts bundles the index maps of the pi and s lifts and the first-factor
    section lifts on tuple covers are derivable from them (the s_ell data
    is the pair (U'-index -> V-index) recorded here).
    """
    X = split_map.base
    Y = split_map.total_space
    U = split_map.cover
    uprime_elements, uprime_index = [], []
    for i, elt in enumerate(U.elements):
        sec = split_map.sections[i]
        for v, velt in enumerate(V.elements):
            levels = []
            for k in range(X.dim + 1):
                levels.append(frozenset(
                    s for s in elt[k] if sec[k][s] in velt[k]))
            if levels[0]:
                uprime_elements.append(levels)
                uprime_index.append((i, v))
    Uprime = Cover(X, uprime_elements)
    vprime_elements, vprime_index = [], []
    for a, (i, v) in enumerate(uprime_index):
        for w, welt in enumerate(V.elements):
            levels = []
            for k in range(Y.dim + 1):
                levels.append(frozenset(
                    y for y in welt[k]
                    if split_map.pi.level_maps[k][y] in uprime_elements[a][k]))
            if levels[0]:
                vprime_elements.append(levels)
                vprime_index.append((a, w))
    Vprime = Cover(Y, vprime_elements)
    # lifted section: U'_{(i,v)} -> V'_{((i,v),v)}
    s_lift = {}
    vplookup = {p: idx for idx, p in enumerate(vprime_index)}
    for a, (i, v) in enumerate(uprime_index):
        s_lift[a] = vplookup[(a, v)]
    pi_lift = {idx: a for idx, (a, w) in enumerate(vprime_index)}
    refined_sections = []
    for a, (i, v) in enumerate(uprime_index):
        sec = split_map.sections[i]
        refined_sections.append([
            {s: sec[k][s] for s in uprime_elements[a][k]}
            for k in range(X.dim + 1)])
    refined = LocallySplitMap(split_map.pi, Uprime, refined_sections)
    return Uprime, Vprime, refined, {
        "uprime_index": uprime_index, "vprime_index": vprime_index,
        "s_lift": s_lift, "pi_lift": pi_lift, "vplookup": vplookup,
        "v_of": [v for (_i, v) in uprime_index]}


# ---------------------------------------------------------------------------
# split squares and cubes
# ---------------------------------------------------------------------------

class SplitSquare:
    """Commutative square with locally split legs and split fiber comparison.

    Orientation (the order Y1, Y2) is explicit data; swapping it negates the
    characteristic class downstream.
    """

    __slots__ = ("X", "Y1", "Y2", "W", "w1", "w2", "ls1", "ls2",
                 "fiber", "fp1", "fp2", "pair_index", "lsW")

    def __init__(self, X, Y1, Y2, W, w1, w2, ls1, ls2, lsW_section=None):
        # w1: W -> Y1, w2: W -> Y2; ls_i certify Y_i -> X.
        self.X, self.Y1, self.Y2, self.W = X, Y1, Y2, W
        self.w1, self.w2 = w1, w2
        self.ls1, self.ls2 = ls1, ls2
        P, p1, p2 = fiber_product(ls1.pi, ls2.pi)
        self.fiber, self.fp1, self.fp2 = P, p1, p2
        self.pair_index = []
        for k in range(P.dim + 1):
            self.pair_index.append(
                {(p1.level_maps[k][s], p2.level_maps[k][s]): s
                 for s in range(P.size(k))})
        if lsW_section is None:
            # W -> fiber must be an isomorphism onto (the etale case)
            lsW_section = _identity_w_section(self, P)
        self.lsW = lsW_section  # levelwise dict: fiber simplex -> W simplex

    def comparison(self, k, w):
        """W -> Y1 x_X Y2 on level k."""
        return self.pair_index[k][(self.w1.level_maps[k][w],
                                   self.w2.level_maps[k][w])]

    def validate(self):
        for k in range(self.W.dim + 1):
            for w in range(self.W.size(k)):
                a = self.ls1.pi.level_maps[k][self.w1.level_maps[k][w]]
                b = self.ls2.pi.level_maps[k][self.w2.level_maps[k][w]]
                if a != b:
                    raise CoverError("square does not commute at level %d" % k)
        self.ls1.validate()
        self.ls2.validate()
        for k, table in enumerate(self.lsW):
            for p, w in table.items():
                if self.comparison(k, w) != p:
                    raise CoverError("W-section is not a section")
        return self

    def transpose(self):
        return SplitSquare(self.X, self.Y2, self.Y1, self.W,
                           self.w2, self.w1, self.ls2, self.ls1,
                           _transpose_w_section(self))


def _identity_w_section(sq, P):
    table = []
    for k in range(P.dim + 1):
        inv = {}
        for w in range(sq.W.size(k)):
            p = sq.pair_index[k].get((sq.w1.level_maps[k][w],
                                      sq.w2.level_maps[k][w]))
            if p is not None and p not in inv:
                inv[p] = w
        if len(inv) != P.size(k):
            raise CoverError(
                "W -> Y1 x_X Y2 is not onto; supply an explicit section")
        table.append(inv)
    return table


def _transpose_w_section(sq):
    # fiber of the transposed square has pairs swapped
    table = []
    Pt, q1, q2 = fiber_product(sq.ls2.pi, sq.ls1.pi)
    for k in range(Pt.dim + 1):
        inv = {}
        for s in range(Pt.size(k)):
            pair = (q2.level_maps[k][s], q1.level_maps[k][s])
            orig = sq.pair_index[k][pair]
            inv[s] = sq.lsW[k][orig]
        table.append(inv)
    return table


def etale_square(X, U1, U2):
    """The square with Y_i = Et(U_i) and W = Y1 x_X Y2 (always split)."""
    ls1 = etale_split(U1)
    ls2 = etale_split(U2)
    W, w1, w2 = fiber_product(ls1.pi, ls2.pi)
    return SplitSquare(X, ls1.total_space, ls2.total_space, W, w1, w2,
                       ls1, ls2)


class SplitCube:
    """A locally split n-cube presented through the tower interface.

    Concrete flavors (one locally split map, a split square, an etale cube)
    implement: `base`, `corner(S)` for support sets S, `cube_map(S, j)`,
    `base_cover` (the fixed admissible cover of X all Cech windows use),
    and `section(S, j, piece)` -- the partial levelwise lift
    corner(S - j) -> corner(S) over a base-cover piece, which is what the
    chain homotopy contractions pull back along.
    """

    n = 0

    @property
    def base(self):
        raise NotImplementedError

    def corner(self, support):
        raise NotImplementedError

    def cube_map(self, support, j):
        raise NotImplementedError

    @property
    def base_cover(self):
        raise NotImplementedError

    def section(self, support, j, piece):
        raise NotImplementedError

    def axis_order(self):
        return tuple(range(1, self.n + 1))


class MapCube(SplitCube):
    """The 1-cube of a locally split map (gerbe-type towers)."""

    def __init__(self, split_map):
        self.n = 1
        self.split_map = split_map

    @property
    def base(self):
        return self.split_map.base

    def corner(self, support):
        if not support:
            return self.split_map.base
        return self.split_map.total_space

    def cube_map(self, support, j):
        return self.split_map.pi

    @property
    def base_cover(self):
        return self.split_map.cover

    def section(self, support, j, piece):
        return self.split_map.sections[piece]


class SquareCube(SplitCube):
    """The 2-cube of a SplitSquare; sections composed per the lemma
    s~ = t o (s x 1) from the square's certificates."""

    def __init__(self, sq):
        self.n = 2
        self.square = sq
        cov, to1, to2, pairs = common_refinement(sq.ls1.cover, sq.ls2.cover)
        self._cover = cov
        self._refine = pairs  # piece -> (U1 element, U2 element)
        self._sections = {}

    @property
    def base(self):
        return self.square.X

    def corner(self, support):
        s = frozenset(support)
        if not s:
            return self.square.X
        if s == frozenset([1]):
            return self.square.Y1
        if s == frozenset([2]):
            return self.square.Y2
        return self.square.W

    def cube_map(self, support, j):
        s = frozenset(support)
        if s == frozenset([1]):
            return self.square.ls1.pi
        if s == frozenset([2]):
            return self.square.ls2.pi
        # from W: deleting axis 1 lands in Y2, deleting axis 2 lands in Y1
        return self.square.w2 if j == 1 else self.square.w1

    @property
    def base_cover(self):
        return self._cover

    def section(self, support, j, piece):
        key = (frozenset(support), j, piece)
        if key in self._sections:
            return self._sections[key]
        sq = self.square
        i1, i2 = self._refine[piece]
        s = frozenset(support)
        if s == frozenset([j]):
            leg = sq.ls1 if j == 1 else sq.ls2
            raw = leg.sections[i1 if j == 1 else i2]
            dom = self._cover.elements[piece]
            out = [{x: raw[k][x] for x in dom[k]} for k in range(len(dom))]
        else:
            # section of corner({1,2}) = W over the other leg:
            # for j = 1: Y2 ni y -> t(s1(pi2 y), y); mirrored for j = 2
            other = 2 if j == 1 else 1
            Yo = sq.Y2 if j == 1 else sq.Y1
            pio = sq.ls2.pi if j == 1 else sq.ls1.pi
            leg_sec = self.section(frozenset([j]), j, piece)
            out = []
            for k in range(Yo.dim + 1):
                table = {}
                for y in range(Yo.size(k)):
                    x = pio.level_maps[k][y]
                    a = leg_sec[k].get(x)
                    if a is None:
                        continue
                    pair = (a, y) if j == 1 else (y, a)
                    p = sq.pair_index[k].get(pair)
                    if p is None:
                        continue
                    w = sq.lsW[k].get(p)
                    if w is not None:
                        table[y] = w
                out.append(table)
        self._sections[key] = out
        return out


class EtaleCube(SplitCube):
    """X_{1_S} = Et of the S-fold common refinement of the axis covers.

    Simplices carry labels (cover index tuple over S, base simplex), which
    turns every structure map into index surgery: cube maps drop an index,
    sections insert the Cech window's leading index.  This is the fixture
    fast path; it agrees with the generic constructions by the uniqueness
    of the data, which the tests check on small cases.
    """

    def __init__(self, X, axis_covers):
        self.n = len(axis_covers)
        self.X = X
        self.axis_covers = list(axis_covers)
        self._spaces = {}
        self._le = {}  # support -> label bookkeeping
        for bits in iproduct((0, 1), repeat=self.n):
            support = frozenset(j + 1 for j, b in enumerate(bits) if b)
            if not support:
                self._spaces[support] = X
                self._le[support] = None
                continue
            axes = sorted(support)
            elements, labels = [], []
            for combo in iproduct(*[range(len(self.axis_covers[j - 1]))
                                    for j in axes]):
                levels = None
                for pos, j in enumerate(axes):
                    cl = self.axis_covers[j - 1].elements[combo[pos]]
                    levels = cl if levels is None \
                        else [a & b for a, b in zip(levels, cl)]
                if levels[0]:
                    elements.append(levels)
                    labels.append(combo)
            cov = Cover(X, elements)
            E, pi, piece, base_of, global_id = etale_space(cov)
            self._spaces[support] = E
            self._le[support] = {
                "axes": axes, "labels": labels, "piece": piece,
                "base_of": base_of, "global_id": global_id, "cover": cov,
                "pi": pi,
                "label_pos": {lab: i for i, lab in enumerate(labels)}}
        self._base_cover = self._le[frozenset(range(1, self.n + 1))]["cover"] \
            if self.n else None
        self._base_labels = self._le[frozenset(range(1, self.n + 1))]["labels"] \
            if self.n else None
        self._maps = {}

    @property
    def base(self):
        return self.X

    def corner(self, support):
        return self._spaces[frozenset(support)]

    @property
    def base_cover(self):
        return self._base_cover

    def cube_map(self, support, j):
        s = frozenset(support)
        key = (s, j)
        if key in self._maps:
            return self._maps[key]
        le_s = self._le[s]
        ns = s - {j}
        le_d = self._le[ns]
        src, dst = self._spaces[s], self._spaces[ns]
        pos = le_s["axes"].index(j)
        level_maps = []
        for k in range(src.dim + 1):
            col = []
            for sx in range(src.size(k)):
                lab = le_s["labels"][le_s["piece"][k][sx]]
                b = le_s["base_of"][k][sx]
                if le_d is None:
                    col.append(b)
                else:
                    nlab = lab[:pos] + lab[pos + 1:]
                    col.append(le_d["global_id"][le_d["label_pos"][nlab]][(k, b)])
            level_maps.append(col)
        m = SimplicialMap(src, dst, level_maps)
        self._maps[key] = m
        return m

    def section(self, support, j, piece):
        """Insert the piece's j-th cover index into the label tuple."""
        s = frozenset(support)
        le_s = self._le[s]
        ns = s - {j}
        le_d = self._le[ns]
        pos = le_s["axes"].index(j)
        cj = self._base_labels[piece][j - 1]
        src = self._spaces[ns]
        out = []
        dom = self._base_cover.elements[piece]
        for k in range(src.dim + 1):
            table = {}
            if le_d is None:
                for b in dom[k]:
                    tgt = le_s["label_pos"].get((cj,))
                    if tgt is not None and (k, b) in le_s["global_id"][tgt]:
                        table[b] = le_s["global_id"][tgt][(k, b)]
            else:
                for sx in range(src.size(k)):
                    lab = le_d["labels"][le_d["piece"][k][sx]]
                    b = le_d["base_of"][k][sx]
                    if b not in dom[k]:
                        continue
                    nlab = lab[:pos] + (cj,) + lab[pos:]
                    tgt = le_s["label_pos"].get(nlab)
                    if tgt is not None and (k, b) in le_s["global_id"][tgt]:
                        table[sx] = le_s["global_id"][tgt][(k, b)]
            out.append(table)
        return out

    def piece_of_corner(self, support, k, s):
        """Cover-index tuple (over the support axes) of a corner simplex."""
        le = self._le[frozenset(support)]
        return le["labels"][le["piece"][k][s]]
