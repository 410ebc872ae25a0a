"""The (delta, d_1..d_n) multicomplex over a tower, and zig-zag descent.

Sign convention: the differentials commute, and the total differential is

    D = delta + sum_j (-1)^(l + (alpha_1 - 1) + ... + (alpha_{j-1} - 1)) d_j

on Cech degree l at tower position alpha (the position alpha_j carries
simplicial degree alpha_j - 1).  Descent contracts the highest direction
first; each zig-zag step solves sign*d_j(x) = target through the section
contraction, with the sign read off the total differential at the source
position, which reproduces the usual descent equations (for a gerbe
-d beta = c and delta beta = d alpha; for a bigerbe c = d2 beta_1,
delta beta_1 = -d2 lambda_1, lambda_1 = -d1 mu_1, delta mu_1 = d1 gamma).

Triviality is decided constructively: a pure corner cocycle is a total
coboundary in the truncated complex (positions alpha <= 2 with kernel
conditions in the capped directions) if and only if its descended class
vanishes, and the proof's staircase is replayed to produce the primitive.
"""

from __future__ import annotations

import hashlib
import json

from .abelian import Coefficients
from .cech import (CechCochain, CechSite, cech_delta, pullback_cochain,
                   solve_primitive, zero_cochain)


class GridError(RuntimeError):
    """Exactness demanded by the theorems failed: the model is corrupt."""


class MultiComplexGrid:
    """Cech sites over every tower position plus the signed operators."""

    def __init__(self, tower, coefficients=None):
        self.tower = tower
        self.n = tower.n
        self.coefficients = coefficients or Coefficients.integers()
        self._sites = {}
        self._comp_maps = {}
        self.solver_cache = {}

    # -- sites -----------------------------------------------------------------
    def site(self, alpha):
        alpha = tuple(alpha)
        if alpha not in self._sites:
            sp = self.tower.space(alpha)
            self._sites[alpha] = CechSite(
                sp.ds, self.tower.cube.base_cover,
                base_proj=self.tower.base_proj(alpha),
                name="W%r" % (alpha,))
        return self._sites[alpha]

    def base_site(self):
        return self.site((0,) * self.n)

    def zero(self, alpha, degree, coefficients=None):
        return zero_cochain(self.site(alpha), degree,
                            coefficients or self.coefficients)

    def position_of(self, cochain):
        for alpha, site in self._sites.items():
            if site is cochain.site:
                return alpha
        raise GridError("cochain does not belong to this grid")

    # -- signs -----------------------------------------------------------------
    def dsign(self, j, ell, alpha):
        """Sign of d_j in the total differential at (ell, alpha)."""
        exp = ell + sum((alpha[i - 1] - 1) for i in range(1, j))
        return 1 if exp % 2 == 0 else -1

    # -- operators ----------------------------------------------------------------
    def d(self, j, alpha, cochain):
        """Simplicial differential d_j = sum_i (-1)^i (pi^j_i)^*."""
        alpha = tuple(alpha)
        up = tuple(a + 1 if q == j - 1 else a for q, a in enumerate(alpha))
        dst = self.site(up)
        out = self.zero(up, cochain.degree, cochain.coefficients)
        for i in range(alpha[j - 1] + 1):
            face = self.tower.axis_face(up, j, i)
            term = pullback_cochain(dst, cochain, face.level_maps[0])
            out = out + (term if i % 2 == 0 else -term)
        return out

    def delta(self, cochain):
        return cech_delta(cochain)

    def s_star(self, j, alpha, cochain):
        """Contraction: pull back along the direction-j section lift.

        cochain lives at alpha + e_j; the result at alpha.  The lift over a
        window uses the window's leading index, as in the first-factor
        Cech section pullback.
        """
        alpha = tuple(alpha)
        up = tuple(a + 1 if q == j - 1 else a for q, a in enumerate(alpha))
        src_site = self.site(up)
        dst_site = self.site(alpha)
        A = cochain.coefficients
        out = {}
        by_first = {}
        for (w, c), v in cochain.values.items():
            by_first.setdefault(w[0], {})[(w, c)] = v
        for piece, entries in by_first.items():
            sec = self.tower.section_map(alpha, j, piece)
            windows = {}
            for (w, c), v in entries.items():
                windows.setdefault(frozenset(w), []).append((w, c, v))
            for wset, triples in windows.items():
                if not dst_site.nonempty(wset):
                    continue
                comp_map = self._section_comp_map(
                    alpha, j, piece, wset, sec, src_site, dst_site)
                for (w, c, v) in triples:
                    for cd in comp_map.get(c, ()):
                        key = (w, cd)
                        nv = A.add(out.get(key, A.zero()), v)
                        if A.is_zero(nv):
                            out.pop(key, None)
                        else:
                            out[key] = nv
        res = CechCochain(dst_site, cochain.degree, A)
        res.values = out
        return res

    def _section_comp_map(self, alpha, j, piece, wset, sec, src_site, dst_site):
        key = (alpha, j, piece, wset)
        if key in self._comp_maps:
            return self._comp_maps[key]
        fibers = {}
        for cd in dst_site.components(wset)[0]:
            y = sec[0].get(cd)
            if y is None:
                raise GridError(
                    "section undefined on the region: cover not admissible")
            cu = src_site.comp_of_vertex(wset, y)
            fibers.setdefault(cu, []).append(cd)
        self._comp_maps[key] = fibers
        return fibers

    def aug_pullback(self, j, alpha, cochain):
        """Pullback along the single face map at level alpha_j = 0 -> 1."""
        alpha = tuple(alpha)
        up = tuple(a + 1 if q == j - 1 else a for q, a in enumerate(alpha))
        face = self.tower.axis_face(up, j, 0)
        return pullback_cochain(self.site(up), cochain, face.level_maps[0])

    def total_D(self, components):
        """Total differential of {position: cochain}; returns the same shape.

        Positions are (ell handled per cochain) alpha tuples; components at
        the same target position accumulate.
        """
        out = {}

        def add(alpha, cochain):
            if cochain.is_zero():
                return
            key = (alpha, cochain.degree)
            if key in out:
                out[key] = out[key] + cochain
                if out[key].is_zero():
                    del out[key]
            else:
                out[key] = cochain

        for (alpha, _deg), coch in components.items():
            add(alpha, self.delta(coch))
            for j in range(1, self.n + 1):
                sign = self.dsign(j, coch.degree, alpha)
                dj = self.d(j, alpha, coch)
                add(tuple(a + 1 if q == j - 1 else a
                          for q, a in enumerate(alpha)),
                    dj if sign == 1 else -dj)
        return out

    def is_pure(self, alpha, cochain):
        if not self.delta(cochain).is_zero():
            return False
        for j in range(1, self.n + 1):
            if not self.d(j, alpha, cochain).is_zero():
                return False
        return True


# ---------------------------------------------------------------------------
# zig-zag descent
# ---------------------------------------------------------------------------

class ZigZagTrace:
    """Replayable record of a descent: (move, direction, position, cochain)."""

    def __init__(self):
        self.moves = []

    def record(self, move, direction, alpha, cochain):
        self.moves.append((move, direction, tuple(alpha), cochain))

    def to_json(self):
        out = []
        for move, j, alpha, coch in self.moves:
            out.append({"move": move, "direction": j, "position": list(alpha),
                        "degree": coch.degree, "values": coch.to_rows()})
        return out

    def digest(self):
        blob = json.dumps(self.to_json(), sort_keys=True,
                          separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def descend(grid, alpha, cochain, check=True):
    """Carry a pure corner cocycle down to a delta-cocycle on the base.

    Contracts the highest direction first.  Returns (base cochain, trace).
    Raises GridError when an exactness step fails (the class would then be
    ill-defined, which signals corrupted grid data).
    """
    alpha = tuple(alpha)
    z = cochain
    trace = ZigZagTrace()
    if check and not grid.is_pure(alpha, z):
        raise GridError("descend requires a pure cocycle")
    for j in range(grid.n, 0, -1):
        while alpha[j - 1] >= 2:
            src = tuple(a - 1 if q == j - 1 else a for q, a in enumerate(alpha))
            sign = grid.dsign(j, z.degree, src)
            beta = grid.s_star(j, src, z)
            if sign < 0:
                beta = -beta
            trace.record("contract", j, src, beta)
            z = grid.delta(beta)
            trace.record("delta", j, src, z)
            alpha = src
        if alpha[j - 1] == 1:
            src = tuple(a - 1 if q == j - 1 else a for q, a in enumerate(alpha))
            sign = grid.dsign(j, z.degree, src)
            down = grid.s_star(j, src, z)
            if sign < 0:
                down = -down
            back = grid.aug_pullback(j, src, down)
            if sign < 0:
                back = -back
            if back.values != z.values:
                raise GridError(
                    "direction-%d descent left a non-pulled-back residue" % j)
            trace.record("absorb", j, src, down)
            z = down
            alpha = src
    if check and not grid.delta(z).is_zero():
        raise GridError("descended cochain is not a cocycle")
    return z, trace


# ---------------------------------------------------------------------------
# constructive triviality in the truncated complex
# ---------------------------------------------------------------------------

def total_primitive(grid, alpha, cochain, normalize=True):
    """B with D(B) = the pure corner cocycle, inside the truncated complex.

    Returns ({(alpha, degree): cochain}, normalized_flag) or None when the
    descended class is nonzero.  When normalize=True, components outside
    the canonical slots (the corner at degree p-1 and the positions
    corner - e_j at degree p) are solved away where the needed primitives
    exist; the flag reports whether that fully succeeded.
    """
    comps = _primitive_rec(grid, tuple(alpha), cochain)
    if comps is None:
        return None
    normalized = True
    if normalize:
        comps, normalized = _normalize_primitive(grid, tuple(alpha),
                                                 cochain.degree, comps)
    return comps, normalized


def _primitive_rec(grid, alpha, z, axis=None):
    """Recursive staircase: returns {(position, degree): cochain} or None.

    axis: the list of still-active directions (descending); positions are
    full n-tuples throughout.
    """
    if axis is None:
        axis = [j for j in range(grid.n, 0, -1) if alpha[j - 1] > 0]
    if not axis:
        # base of the recursion: delta-solve on this position's site
        x = solve_primitive(z, elim_cache=grid.solver_cache)
        if x is None:
            return None
        return {(alpha, x.degree): x}
    j = axis[0]
    comps = {}
    cur = z
    pos = alpha
    # contract down to level 1 in direction j, collecting primitives
    while pos[j - 1] >= 2:
        src = tuple(a - 1 if q == j - 1 else a for q, a in enumerate(pos))
        sign = grid.dsign(j, cur.degree, src)
        u = grid.s_star(j, src, cur)
        if sign < 0:
            u = -u
        key = (src, u.degree)
        comps[key] = comps.get(key, grid.zero(src, u.degree, u.coefficients)) + u
        cur = -grid.delta(u)
        pos = src
    # absorb through the augmentation: cur = pullback of y (sign-free:
    # the residual is literally a pullback, aug(s* cur) = cur)
    src = tuple(a - 1 if q == j - 1 else a for q, a in enumerate(pos))
    y = grid.s_star(j, src, cur)
    back = grid.aug_pullback(j, src, y)
    if back.values != cur.values:
        raise GridError("augmentation exactness failed in direction %d" % j)
    rest = _primitive_rec(grid, src, y, axis[1:])
    if rest is None:
        return None
    for (p, degree), coch in rest.items():
        lifted = grid.aug_pullback(j, p, coch)
        tgt = tuple(a + 1 if q == j - 1 else a for q, a in enumerate(p))
        key = (tgt, degree)
        comps[key] = comps.get(
            key, grid.zero(tgt, degree, coch.coefficients)) + lifted
    return comps


def _canonical_slots(alpha, p):
    slots = {(alpha, p - 1)}
    for j, a in enumerate(alpha, start=1):
        if a >= 1:
            slots.add((tuple(x - 1 if q == j - 1 else x
                             for q, x in enumerate(alpha)), p))
    return slots


def _normalize_primitive(grid, alpha, p, comps):
    """Push non-canonical components into the canonical slots by
    delta-solving them away; report success."""
    slots = _canonical_slots(alpha, p)
    normalized = True
    changed = True
    while changed:
        changed = False
        order = sorted(comps, key=lambda k: (sum(k[0]), k[0], k[1]))
        for key in order:
            if key in slots:
                continue
            m = comps[key]
            if m.is_zero():
                del comps[key]
                changed = True
                break
            if m.degree == 0:
                normalized = False
                continue
            v = solve_primitive(m, elim_cache=grid.solver_cache)
            if v is None:
                normalized = False
                continue
            pos = key[0]
            del comps[key]
            # subtract D(v): kills m, perturbs the d_j-neighbours
            for j in range(1, grid.n + 1):
                if pos[j - 1] >= alpha[j - 1]:
                    continue  # would leave the truncation; d_j v must vanish
                sign = grid.dsign(j, v.degree, pos)
                dj = grid.d(j, pos, v)
                if dj.is_zero():
                    continue
                tgt = tuple(a + 1 if q == j - 1 else a
                            for q, a in enumerate(pos))
                k2 = (tgt, v.degree)
                term = dj if sign == 1 else -dj
                comps[k2] = comps.get(
                    k2, grid.zero(tgt, v.degree, v.coefficients)) - term
                if comps[k2].is_zero():
                    del comps[k2]
            changed = True
            break
    return comps, normalized


def verify_primitive(grid, alpha, cochain, comps):
    """Check D(comps) equals the corner cocycle and vanishes elsewhere
    (including the kernel conditions toward the capped directions)."""
    D = grid.total_D(comps)
    want = {}
    if not cochain.is_zero():
        want[(tuple(alpha), cochain.degree)] = cochain
    if set(D) != set(want):
        return False
    return all(D[k].values == want[k].values for k in want)


# ---------------------------------------------------------------------------
# product-simplicial sequence (powers of a space, basepoint contraction)
# ---------------------------------------------------------------------------

class ProductSimplicial:
    """The simplicial space of powers X^k with projections, Cech'ed.

    Sites use the k-fold product cover; the boundary is the alternating sum
    of pullbacks along coordinate omissions, and the basepoint section gives
    a contraction that commutes with delta (the section is global).
    """

    def __init__(self, ordered, families, k_max, basepoint=None):
        from .delta_set import osc_product
        from .fixtures import product_families, _subcomplex_cover
        self.k_max = k_max
        self.ordereds = [None, ordered]
        self.families = [None, families]
        for k in range(2, k_max + 1):
            self.ordereds.append(osc_product(ordered, self.ordereds[-1]))
            self.families.append(product_families(
                self.ordereds[-1], families, self.families[-1]))
            assert len(self.families[-1]) \
                == len(families) * len(self.families[-2]), \
                "empty product cover piece breaks window indexing"
        self.covers = [None]
        self.sites = [None]
        for k in range(1, k_max + 1):
            cov = _subcomplex_cover(self.ordereds[k], self.families[k])
            self.covers.append(cov)
            self.sites.append(CechSite(cov.base, cov, name="X^%d" % k))
        self.basepoint = basepoint if basepoint is not None \
            else ordered.vertices[0]
        self._vpos = {v: i for i, v in enumerate(ordered.vertices)}
        self.base_piece = next(
            i for i, fam in enumerate(families)
            if frozenset([self.basepoint]) in fam)

    def vertex_tuple(self, k, vid):
        """The nested-vertex of X^k as a flat tuple of factor vertices."""
        _, tables, _ = self.ordereds[k].to_delta_set()
        v = tables[0][vid][0]
        out = []
        for _ in range(k - 1):
            out.append(v[0])
            v = v[1]
        out.append(v)
        return tuple(out)

    def _vertex_id(self, k, flat):
        nested = flat[-1]
        for x in reversed(flat[:-1]):
            nested = (x, nested)
        _, tables, index = self.ordereds[k].to_delta_set()
        return index[0][(nested,)]

    def window_index(self, k, flat_windows):
        """Cover element index of X^k from a tuple of factor element indices.

        families[k] = product(families[1], families[k-1]) in factor-major
        order with no empty products (asserted at construction).
        """
        if k == 1:
            return flat_windows[0]
        return flat_windows[0] * len(self.families[k - 1]) \
            + self.window_index(k - 1, flat_windows[1:])

    def window_split(self, k, idx):
        if k == 1:
            return (idx,)
        rest = len(self.families[k - 1])
        return (idx // rest,) + self.window_split(k - 1, idx % rest)

    def boundary(self, k, cochain):
        """partial = sum_j (-1)^j pi_j^* : cochains on X^k -> X^{k+1}."""
        dst = self.sites[k + 1]
        out = zero_cochain(dst, cochain.degree, cochain.coefficients)
        for j in range(k + 1):
            vm = []
            for vid in range(dst.space.size(0)):
                flat = self.vertex_tuple(k + 1, vid)
                nf = flat[:j] + flat[j + 1:]
                vm.append(self._vertex_id(k, nf))

            def fibers(w, j=j):
                # the inserted factor piece varies independently per slot
                from itertools import product as iproduct
                splits = [self.window_split(k, i) for i in w]
                outw = []
                for pieces in iproduct(range(len(self.families[1])),
                                       repeat=len(w)):
                    outw.append(tuple(self.window_index(
                        k + 1, s[:j] + (pc,) + s[j:])
                        for s, pc in zip(splits, pieces)))
                return outw

            def wmap(nw, j=j):
                return tuple(self.window_index(
                    k, self.window_split(k + 1, i)[:j]
                    + self.window_split(k + 1, i)[j + 1:]) for i in nw)

            term = pullback_cochain(dst, cochain, vm,
                                    window_fibers=fibers, window_map=wmap)
            out = out + (term if j % 2 == 0 else -term)
        return out

    def contraction(self, k, cochain):
        """s^* for s(x_1..x_k) = (basepoint, x_1..x_k); commutes with delta."""
        dst = self.sites[k]
        src = self.sites[k + 1]
        vm = []
        for vid in range(dst.space.size(0)):
            flat = self.vertex_tuple(k, vid)
            vm.append(self._vertex_id(k + 1, (self.basepoint,) + flat))

        def wmap(nw):
            return tuple(self.window_index(
                k + 1, (self.base_piece,) + self.window_split(k, i))
                for i in nw)

        def fibers(w):
            return [tuple(self.window_index(k, self.window_split(k + 1, i)[1:])
                          for i in w)] \
                if all(self.window_split(k + 1, i)[0] == self.base_piece
                       for i in w) else []

        out = {}
        A = cochain.coefficients
        for (w, c), v in cochain.values.items():
            for nw in fibers(w):
                key = frozenset(nw)
                if not dst.nonempty(key):
                    continue
                for cd in dst.components(key)[0]:
                    up = src.comp_of_vertex(frozenset(w), vm[cd])
                    if up == c:
                        out[(nw, cd)] = A.add(out.get((nw, cd), A.zero()), v)
        res = CechCochain(dst, cochain.degree, A)
        res.values = {kk: v for kk, v in out.items() if not A.is_zero(v)}
        return res
