"""Multisimplicial towers over split cubes, with faces and section lifts.

The tower space at position alpha is the iterated fiber power with
alpha_j factors in direction j.  Simplices are grids: flat tuples of
corner-space simplex ids indexed by the box prod(alpha_j) over the support
axes (sorted, row-major, empty box = one entry over the base).  Fiber-power
face maps delete a slice; the direction-j contraction prepends the slice
produced by the cube's section over the leading Cech index, which is
formula (s(pi y0), y0, ...) in grid form.
"""

from __future__ import annotations

from itertools import product as iproduct

from .covers import CoverError, MapCube, SquareCube
from .delta_set import DeltaSet, SimplicialMap


class CapExceeded(ValueError):
    pass


class _Shape:
    """Box shape over a sorted tuple of axes; row-major flat layout."""

    __slots__ = ("axes", "sizes", "strides", "count")

    def __init__(self, axes, sizes):
        self.axes = tuple(axes)
        self.sizes = tuple(sizes)
        count = 1
        strides = []
        for s in reversed(self.sizes):
            strides.append(count)
            count *= s
        self.strides = tuple(reversed(strides))
        self.count = count

    def pos(self, axis):
        return self.axes.index(axis)

    def delete_slice(self, flat, axis, i):
        p = self.pos(axis)
        keep = []
        for idx in range(self.count):
            if (idx // self.strides[p]) % self.sizes[p] != i:
                keep.append(flat[idx])
        return tuple(keep)

    def get_slice(self, flat, axis, i):
        p = self.pos(axis)
        return tuple(flat[idx] for idx in range(self.count)
                     if (idx // self.strides[p]) % self.sizes[p] == i)

    def prepend_slice(self, flat, axis, newslice):
        """Insert newslice as index 0 along the axis (axis may be new)."""
        if axis in self.axes:
            p = self.pos(axis)
            bigger = _Shape(self.axes,
                            tuple(s + 1 if q == p else s
                                  for q, s in enumerate(self.sizes)))
            out = []
            it_old = 0
            it_new = 0
            for idx in range(bigger.count):
                if (idx // bigger.strides[p]) % bigger.sizes[p] == 0:
                    out.append(newslice[it_new])
                    it_new += 1
                else:
                    out.append(flat[it_old])
                    it_old += 1
            return tuple(out)
        # a new axis of size 1: flat layout is unchanged
        return tuple(newslice)


class TowerSpace:
    """One tower position: a DeltaSet whose simplices carry grid labels."""

    __slots__ = ("alpha", "support", "shape", "ds", "labels", "index",
                 "corner_support")

    def __init__(self, alpha, support, shape, ds, labels, index):
        self.alpha = alpha
        self.support = support
        self.shape = shape
        self.ds = ds
        self.labels = labels
        self.index = index
        self.corner_support = support

    def size(self, k):
        return self.ds.size(k)


class Tower:
    """Lazily built family of tower spaces with faces and sections.

    caps[j-1] bounds direction j.  All Cech data downstream is taken with
    respect to the cube's fixed base cover pulled back along the tower.
    """

    def __init__(self, cube, caps):
        self.cube = cube
        self.n = cube.n
        self.caps = tuple(caps)
        if len(self.caps) != self.n:
            raise CoverError("caps must give one bound per axis")
        self._spaces = {}
        self._faces = {}
        self._sections = {}
        self._base_proj = {}
        self._corner_to_base = {}

    # -- bookkeeping ---------------------------------------------------------
    def _check(self, alpha):
        alpha = tuple(alpha)
        if len(alpha) != self.n or any(a < 0 for a in alpha):
            raise CoverError("bad position %r" % (alpha,))
        if any(a > c for a, c in zip(alpha, self.caps)):
            raise CapExceeded("position %r beyond caps %r" % (alpha, self.caps))
        return alpha

    def support_of(self, alpha):
        return frozenset(j + 1 for j, a in enumerate(alpha) if a >= 1)

    def corner_to_base(self, support):
        """Levelwise arrays corner(S) -> X (compose cube maps, axes sorted)."""
        support = frozenset(support)
        if support in self._corner_to_base:
            return self._corner_to_base[support]
        if not support:
            X = self.cube.base
            out = [list(range(X.size(k))) for k in range(X.dim + 1)]
        else:
            j = min(support)
            m = self.cube.cube_map(support, j)
            rest = self.corner_to_base(support - {j})
            out = []
            for k in range(m.source.dim + 1):
                out.append([rest[k][m.level_maps[k][s]]
                            for s in range(m.source.size(k))])
        self._corner_to_base[support] = out
        return out

    def base_proj(self, alpha):
        """Levelwise arrays space(alpha) -> X via the first grid entry."""
        alpha = self._check(alpha)
        if alpha in self._base_proj:
            return self._base_proj[alpha]
        sp = self.space(alpha)
        c2b = self.corner_to_base(sp.support)
        out = []
        for k in range(sp.ds.dim + 1):
            out.append([c2b[k][lab[0]] for lab in sp.labels[k]])
        self._base_proj[alpha] = out
        return out

    # -- space construction ---------------------------------------------------
    def space(self, alpha):
        alpha = self._check(alpha)
        if alpha in self._spaces:
            return self._spaces[alpha]
        support = self.support_of(alpha)
        axes = sorted(support)
        shape = _Shape(axes, tuple(alpha[j - 1] for j in axes))
        corner = self.cube.corner(support)
        if all(a <= 1 for a in alpha):
            labels = [[(s,) for s in range(corner.size(k))]
                      for k in range(corner.dim + 1)]
            index = [{lab: i for i, lab in enumerate(lev)} for lev in labels]
            sp = TowerSpace(alpha, support, shape, corner, labels, index)
            self._spaces[alpha] = sp
            return sp
        j = max((jj for jj in axes if alpha[jj - 1] >= 2))
        prev = self.space(tuple(a - 1 if i == j - 1 else a
                                for i, a in enumerate(alpha)))
        slc = self.space(tuple(1 if i == j - 1 else a
                               for i, a in enumerate(alpha)))
        proj = self.cube.cube_map(support, j).level_maps
        labels, index = [], []
        for k in range(corner.dim + 1):
            # group by the direction-j base (slice 0 projected entrywise)
            def jbase(space, lab):
                sl = space.shape.get_slice(lab, j, 0)
                return tuple(proj[k][e] for e in sl)

            groups = {}
            for lab in slc.labels[k]:
                groups.setdefault(jbase(slc, lab), []).append(lab)
            lev = []
            for lab in prev.labels[k]:
                for new in groups.get(jbase(prev, lab), ()):
                    lev.append(prev.shape.prepend_slice(lab, j, new))
            labels.append(lev)
            index.append({lab: i for i, lab in enumerate(lev)})
        # DeltaSet faces act entrywise on grid labels
        levels = [len(lev) for lev in labels]
        faces = [None]
        for k in range(1, corner.dim + 1):
            cols = []
            for i in range(k + 1):
                fc = corner.faces[k][i]
                col = [index[k - 1][tuple(fc[e] for e in lab)]
                       for lab in labels[k]]
                cols.append(col)
            faces.append(cols)
        ds = DeltaSet(levels, faces)
        sp = TowerSpace(alpha, support, shape, ds, labels, index)
        self._spaces[alpha] = sp
        return sp

    # -- face maps -------------------------------------------------------------
    def axis_face(self, alpha, j, i):
        """pi^j_i : space(alpha) -> space(alpha - e_j), deleting slice i."""
        alpha = self._check(alpha)
        key = (alpha, j, i)
        if key in self._faces:
            return self._faces[key]
        if alpha[j - 1] < 1 or not (0 <= i < alpha[j - 1]):
            raise CoverError("no face %d in direction %d at %r" % (i, j, alpha))
        src = self.space(alpha)
        target_alpha = tuple(a - 1 if q == j - 1 else a
                             for q, a in enumerate(alpha))
        dst = self.space(target_alpha)
        level_maps = []
        if alpha[j - 1] >= 2:
            for k in range(src.ds.dim + 1):
                col = [dst.index[k][src.shape.delete_slice(lab, j, i)]
                       for lab in src.labels[k]]
                level_maps.append(col)
        else:
            # the axis disappears: reinterpret the single slice, entries
            # projected one step down the cube
            proj = self.cube.cube_map(src.support, j).level_maps
            for k in range(src.ds.dim + 1):
                col = [dst.index[k][tuple(
                    proj[k][e] for e in src.shape.get_slice(lab, j, 0))]
                    for lab in src.labels[k]]
                level_maps.append(col)
        m = SimplicialMap(src.ds, dst.ds, level_maps)
        self._faces[key] = m
        return m

    # -- section lifts -----------------------------------------------------------
    def section_map(self, alpha, j, piece):
        """Partial levelwise dict space(alpha) -> space(alpha + e_j).

        Defined on simplices over the base-cover piece; prepends the slice
        produced by the cube's section in direction j.
        """
        alpha = self._check(alpha)
        key = (alpha, j, piece)
        if key in self._sections:
            return self._sections[key]
        target_alpha = tuple(a + 1 if q == j - 1 else a
                             for q, a in enumerate(alpha))
        src = self.space(alpha)
        dst = self.space(target_alpha)
        sigma = self.cube.section(dst.support, j, piece)
        dom = self.cube.base_cover.elements[piece]
        bp = self.base_proj(alpha)
        out = []
        if alpha[j - 1] >= 1:
            proj = self.cube.cube_map(src.support, j).level_maps
            for k in range(src.ds.dim + 1):
                table = {}
                sig = sigma[k]
                for s, lab in enumerate(src.labels[k]):
                    if bp[k][s] not in dom[k]:
                        continue
                    jb = src.shape.get_slice(lab, j, 0)
                    newslice = []
                    ok = True
                    for e in jb:
                        v = sig.get(proj[k][e])
                        if v is None:
                            ok = False
                            break
                        newslice.append(v)
                    if not ok:
                        continue
                    nl = src.shape.prepend_slice(lab, j, tuple(newslice))
                    t = dst.index[k].get(nl)
                    if t is not None:
                        table[s] = t
                out.append(table)
        else:
            for k in range(src.ds.dim + 1):
                table = {}
                sig = sigma[k]
                for s, lab in enumerate(src.labels[k]):
                    if bp[k][s] not in dom[k]:
                        continue
                    newlab = []
                    ok = True
                    for e in lab:
                        v = sig.get(e)
                        if v is None:
                            ok = False
                            break
                        newlab.append(v)
                    if not ok:
                        continue
                    t = dst.index[k].get(tuple(newlab))
                    if t is not None:
                        table[s] = t
                out.append(table)
        self._sections[key] = out
        return out

    # -- diagnostics ---------------------------------------------------------------
    def verify_position(self, alpha):
        """Simplicial identities among axis faces at one position."""
        from .delta_set import validate
        alpha = self._check(alpha)
        rep = validate(self.space(alpha).ds)
        if not rep.valid:
            raise CoverError("tower space %r invalid: %s" % (alpha, rep))
        for j in range(1, self.n + 1):
            if alpha[j - 1] < 2:
                continue
            down = tuple(a - 1 if q == j - 1 else a for q, a in enumerate(alpha))
            for i2 in range(alpha[j - 1]):
                for i1 in range(i2):
                    lhs = self.axis_face(down, j, i1).compose(
                        self.axis_face(alpha, j, i2))
                    rhs = self.axis_face(down, j, i2 - 1).compose(
                        self.axis_face(alpha, j, i1))
                    if lhs.level_maps != rhs.level_maps:
                        raise CoverError(
                            "face identity fails dir %d at %r" % (j, alpha))
        # cross-direction commutation
        for j1 in range(1, self.n + 1):
            for j2 in range(j1 + 1, self.n + 1):
                if alpha[j1 - 1] < 1 or alpha[j2 - 1] < 1:
                    continue
                a1 = tuple(a - 1 if q == j1 - 1 else a for q, a in enumerate(alpha))
                a2 = tuple(a - 1 if q == j2 - 1 else a for q, a in enumerate(alpha))
                for i1 in range(alpha[j1 - 1]):
                    for i2 in range(alpha[j2 - 1]):
                        lhs = self.axis_face(a1, j2, i2).compose(
                            self.axis_face(alpha, j1, i1))
                        rhs = self.axis_face(a2, j1, i1).compose(
                            self.axis_face(alpha, j2, i2))
                        if lhs.level_maps != rhs.level_maps:
                            raise CoverError(
                                "cross commutation fails at %r" % (alpha,))
        return True

    def verify_sections(self, alpha, j):
        """pi^j_0 s = 1 and pi^j_{i+1} s = s pi^j_i over every piece."""
        alpha = self._check(alpha)
        up = tuple(a + 1 if q == j - 1 else a for q, a in enumerate(alpha))
        for piece in range(len(self.cube.base_cover)):
            sec = self.section_map(alpha, j, piece)
            f0 = self.axis_face(up, j, 0)
            for k, table in enumerate(sec):
                for s, t in table.items():
                    if f0.level_maps[k][t] != s:
                        raise CoverError("pi_0 s != 1 at %r dir %d" % (alpha, j))
            for i in range(alpha[j - 1]):
                fi1 = self.axis_face(up, j, i + 1)
                down = tuple(a - 1 if q == j - 1 else a
                             for q, a in enumerate(alpha))
                fi = self.axis_face(alpha, j, i)
                sec_down = self.section_map(down, j, piece)
                for k, table in enumerate(sec):
                    for s, t in table.items():
                        lhs = fi1.level_maps[k][t]
                        rhs = sec_down[k].get(fi.level_maps[k][s])
                        if rhs is None or lhs != rhs:
                            raise CoverError(
                                "pi_%d s != s pi_%d at %r dir %d"
                                % (i + 1, i, alpha, j))
        return True


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def simplicial_tower(split_map, k_max):
    """Fiber powers Y^[k], k <= k_max, of a locally split map."""
    if k_max < 1:
        raise CoverError("k_max must be >= 1")
    return Tower(MapCube(split_map), (k_max,))


def bisimplicial_tower(square, m_max, n_max, check=False):
    """W^[m,n] up to the caps; optionally verify the two-ways construction."""
    if m_max < 1 or n_max < 1:
        raise CoverError("caps must be >= 1")
    cube = square if hasattr(square, "corner") else SquareCube(square)
    tower = Tower(cube, (m_max, n_max))
    if check:
        verify_two_ways(tower, min(m_max, 2), min(n_max, 2))
    return tower


def cube_tower(cube, caps):
    return Tower(cube, caps)


def verify_two_ways(tower, m, n):
    """Rows-first vs columns-first: enumerate matching grids directly and
    compare with the recursive construction (P:fiber_quadrant's content)."""
    if tower.n != 2:
        raise CoverError("two-ways check applies to 2 axes")
    sp = tower.space((m, n))
    corner = tower.cube.corner(frozenset([1, 2]))
    p1 = tower.cube.cube_map(frozenset([1, 2]), 2).level_maps  # to Y1-side
    p2 = tower.cube.cube_map(frozenset([1, 2]), 1).level_maps  # to Y2-side
    for k in range(sp.ds.dim + 1):
        brute = set()
        for grid in iproduct(range(corner.size(k)), repeat=m * n):
            ok = True
            for r in range(m):
                row = [grid[r * n + c] for c in range(n)]
                if len({p1[k][w] for w in row}) != 1:
                    ok = False
                    break
            if ok:
                for c in range(n):
                    col = [grid[r * n + c] for r in range(m)]
                    if len({p2[k][w] for w in col}) != 1:
                        ok = False
                        break
            if ok:
                brute.add(grid)
        got = set(sp.labels[k])
        if got != brute:
            raise CoverError("two-ways mismatch at level %d" % k)
        if k >= 1:
            break  # level 0 and 1 suffice to pin the construction
    return True
