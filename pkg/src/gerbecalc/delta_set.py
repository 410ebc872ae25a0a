"""Finite semi-simplicial sets: the combinatorial stand-in for spaces.

A DeltaSet is levelwise finite with face maps satisfying the semi-simplicial
identities; no degeneracies.  OrderedComplex is the fixture builder: an
abstract simplicial complex on a totally ordered vertex set, which is what
makes staircase products and Alexander-Whitney cup products available.

The simplicial cochain complex computed here (alternating-sum coboundary on
levelwise functions) is the independent oracle that the Cech machinery is
tested against.
"""

from __future__ import annotations

from itertools import combinations

from .abelian import (Coefficients, IntMatrix, cohomology_group,
                      integer_kernel_basis)


class DeltaSet:
    """Levelwise finite sets with face maps d_i d_j = d_{j-1} d_i (i < j).

    levels[k] is the number of k-simplices (ids are 0..n-1); faces[k][i] is
    the array of the i-th face map on level k, for 1 <= k <= dim, 0 <= i <= k.
    """

    __slots__ = ("levels", "faces")

    def __init__(self, levels, faces):
        self.levels = list(levels)
        self.faces = [None]
        for k in range(1, len(self.levels)):
            self.faces.append([list(col) for col in faces[k]])

    @property
    def dim(self):
        return len(self.levels) - 1

    def size(self, k):
        return self.levels[k] if 0 <= k <= self.dim else 0

    def total_size(self):
        return sum(self.levels)

    def face(self, k, i, s):
        return self.faces[k][i][s]

    def vertex_of(self, k, s):
        """The iterated 0th-face vertex of a simplex."""
        while k > 0:
            s = self.faces[k][0][s]
            k -= 1
        return s

    def vertices_of(self, k, s):
        """All vertices of a simplex, as a sorted tuple of level-0 ids."""
        out = set()
        stack = [(k, s)]
        seen = set()
        while stack:
            kk, ss = stack.pop()
            if (kk, ss) in seen:
                continue
            seen.add((kk, ss))
            if kk == 0:
                out.add(ss)
            else:
                for i in range(kk + 1):
                    stack.append((kk - 1, self.faces[kk][i][ss]))
        return tuple(sorted(out))

    def to_json(self):
        return {"dim": self.dim, "levels": list(self.levels),
                "faces": [[list(col) for col in self.faces[k]]
                          for k in range(1, self.dim + 1)]}

    @classmethod
    def from_json(cls, obj):
        faces = [None] + [obj["faces"][k - 1] for k in range(1, obj["dim"] + 1)]
        return cls(obj["levels"], faces)


class ValidationReport:
    def __init__(self):
        self.violations = []

    @property
    def valid(self):
        return not self.violations

    def add(self, msg):
        self.violations.append(msg)

    def __repr__(self):
        return "valid" if self.valid else "invalid: " + "; ".join(self.violations)


def validate(X):
    """Check totality of faces and the identities d_i d_j = d_{j-1} d_i."""
    rep = ValidationReport()
    for k in range(1, X.dim + 1):
        if len(X.faces[k]) != k + 1:
            rep.add("level %d: expected %d face maps, got %d"
                    % (k, k + 1, len(X.faces[k])))
            continue
        for i in range(k + 1):
            col = X.faces[k][i]
            if len(col) != X.levels[k]:
                rep.add("face map (k=%d, i=%d) is not total" % (k, i))
                continue
            for s, t in enumerate(col):
                if not (0 <= t < X.levels[k - 1]):
                    rep.add("face (k=%d,i=%d) of simplex %d out of range"
                            % (k, i, s))
    if rep.violations:
        return rep
    for k in range(2, X.dim + 1):
        for j in range(k + 1):
            for i in range(j):
                for s in range(X.levels[k]):
                    left = X.faces[k - 1][i][X.faces[k][j][s]]
                    right = X.faces[k - 1][j - 1][X.faces[k][i][s]]
                    if left != right:
                        rep.add("d_%d d_%d != d_%d d_%d at level %d simplex %d"
                                % (i, j, j - 1, i, k, s))
                        return rep
    return rep


class SimplicialMap:
    """Levelwise map of DeltaSets commuting with all face maps."""

    __slots__ = ("source", "target", "level_maps")

    def __init__(self, source, target, level_maps):
        self.source = source
        self.target = target
        self.level_maps = [list(m) for m in level_maps]

    def __call__(self, k, s):
        return self.level_maps[k][s]

    def check(self):
        X, Y = self.source, self.target
        for k in range(min(X.dim, len(self.level_maps) - 1) + 1):
            if len(self.level_maps[k]) != X.levels[k]:
                raise ValueError("level map %d is not total" % k)
        for k in range(1, len(self.level_maps) - 1 + 1):
            if k > X.dim:
                break
            for i in range(k + 1):
                for s in range(X.levels[k]):
                    if Y.faces[k][i][self.level_maps[k][s]] \
                            != self.level_maps[k - 1][X.faces[k][i][s]]:
                        raise ValueError(
                            "map does not commute with face (k=%d,i=%d)" % (k, i))
        return self

    def compose(self, other):
        """self after other."""
        if other.target is not self.source:
            raise ValueError("composition mismatch")
        maps = []
        for k in range(min(len(self.level_maps), len(other.level_maps))):
            maps.append([self.level_maps[k][t] for t in other.level_maps[k]])
        return SimplicialMap(other.source, self.target, maps)

    @classmethod
    def identity(cls, X):
        return cls(X, X, [list(range(n)) for n in X.levels])


def fiber_product(f, g):
    """Levelwise pullback of f: A -> C and g: B -> C.

    Returns (P, pr1, pr2) with levels {(a, b): f(a) = g(b)} ordered
    lexicographically; faces act diagonally.  This is the model's fiber
    product; it matches the topological one when a leg is a levelwise
    injective inclusion (the etale fixtures).
    """
    if f.target is not g.target:
        raise ValueError("fiber product legs must share a target")
    A, B = f.source, g.source
    dim = min(A.dim, B.dim)
    levels, index, pr1, pr2 = [], [], [], []
    for k in range(dim + 1):
        by_image = {}
        for b in range(B.levels[k]):
            by_image.setdefault(g.level_maps[k][b], []).append(b)
        pairs = []
        for a in range(A.levels[k]):
            for b in by_image.get(f.level_maps[k][a], ()):
                pairs.append((a, b))
        pairs.sort()
        levels.append(len(pairs))
        index.append({p: i for i, p in enumerate(pairs)})
        pr1.append([p[0] for p in pairs])
        pr2.append([p[1] for p in pairs])
    faces = [None]
    for k in range(1, dim + 1):
        cols = []
        for i in range(k + 1):
            fa, fb = A.faces[k][i], B.faces[k][i]
            col = []
            for a, b in sorted(index[k], key=index[k].get):
                col.append(index[k - 1][(fa[a], fb[b])])
            cols.append(col)
        faces.append(cols)
    P = DeltaSet(levels, faces)
    maps1 = [pr1[k] for k in range(dim + 1)]
    maps2 = [pr2[k] for k in range(dim + 1)]
    return P, SimplicialMap(P, A, maps1), SimplicialMap(P, B, maps2)


def disjoint_union(X, Y):
    dim = max(X.dim, Y.dim)
    levels = [X.size(k) + Y.size(k) for k in range(dim + 1)]
    faces = [None]
    for k in range(1, dim + 1):
        cols = []
        for i in range(k + 1):
            col = []
            if k <= X.dim:
                col.extend(X.faces[k][i])
            if k <= Y.dim:
                col.extend(v + X.size(k - 1) for v in Y.faces[k][i])
            cols.append(col)
        faces.append(cols)
    return DeltaSet(levels, faces)


def connected_components(X):
    """Component ids per level; a simplex joins its iterated-0-face vertex.

    Components are those of the (vertices, edges) graph; ids are canonical
    (the smallest vertex id in the component).
    """
    parent = list(range(X.size(0)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    if X.dim >= 1:
        for e in range(X.size(1)):
            a, b = find(X.faces[1][1][e]), find(X.faces[1][0][e])
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    roots = sorted({find(v) for v in range(X.size(0))})
    out = []
    for k in range(X.dim + 1):
        out.append([find(X.vertex_of(k, s)) for s in range(X.size(k))])
    return roots, out


# ---------------------------------------------------------------------------
# ordered complexes
# ---------------------------------------------------------------------------

class OrderedComplex:
    """Abstract simplicial complex on a totally ordered vertex set."""

    __slots__ = ("vertices", "simplices", "_vpos", "_ds")

    def __init__(self, vertices, simplices):
        self.vertices = list(vertices)
        self._vpos = {v: i for i, v in enumerate(self.vertices)}
        closed = set()
        for s in simplices:
            fs = frozenset(s)
            for k in range(1, len(fs) + 1):
                for sub in combinations(sorted(fs, key=self._vpos.get), k):
                    closed.add(frozenset(sub))
        for v in self.vertices:
            closed.add(frozenset([v]))
        self.simplices = closed
        self._ds = None

    @property
    def dim(self):
        return max(len(s) for s in self.simplices) - 1

    def has(self, vs):
        return frozenset(vs) in self.simplices

    def level_tuples(self, k):
        """Sorted vertex tuples of the k-simplices, in lexicographic order."""
        tuples = [tuple(sorted(s, key=self._vpos.get))
                  for s in self.simplices if len(s) == k + 1]
        tuples.sort(key=lambda t: [self._vpos[v] for v in t])
        return tuples

    def f_vector(self):
        return [len(self.level_tuples(k)) for k in range(self.dim + 1)]

    def to_delta_set(self):
        """DeltaSet plus tuple tables and tuple->id index (cached)."""
        if self._ds is not None:
            return self._ds
        dim = self.dim
        tables = [self.level_tuples(k) for k in range(dim + 1)]
        index = [{t: i for i, t in enumerate(tab)} for tab in tables]
        levels = [len(tab) for tab in tables]
        faces = [None]
        for k in range(1, dim + 1):
            cols = []
            for i in range(k + 1):
                col = []
                for t in tables[k]:
                    col.append(index[k - 1][t[:i] + t[i + 1:]])
                cols.append(col)
            faces.append(cols)
        self._ds = (DeltaSet(levels, faces), tables, index)
        return self._ds

    def to_json(self):
        return {"vertices": [list(v) if isinstance(v, tuple) else v
                             for v in self.vertices],
                "simplices": [sorted((self._vpos[v] for v in s))
                              for s in sorted(self.simplices,
                                              key=lambda s: (len(s), sorted(self._vpos[v] for v in s)))]}


def osc_product(A, B):
    """Staircase triangulation of the product of ordered complexes.

    Vertices are pairs ordered lexicographically; simplices are the strictly
    monotone chains in the product order whose coordinate projections are
    simplices.  Realizes the topological product |A| x |B|.
    """
    verts = [(a, b) for a in A.vertices for b in B.vertices]
    apos, bpos = A._vpos, B._vpos
    simplices = []

    def extend(chain, projA, projB):
        simplices.append(list(chain))
        la, lb = chain[-1]
        for a in A.vertices:
            if apos[a] < apos[la]:
                continue
            if not A.has(projA | {a}):
                continue
            for b in B.vertices:
                if bpos[b] < bpos[lb] or (a == la and b == lb):
                    continue
                if not B.has(projB | {b}):
                    continue
                chain.append((a, b))
                extend(chain, projA | {a}, projB | {b})
                chain.pop()

    for v in verts:
        extend([v], frozenset([v[0]]), frozenset([v[1]]))
    return OrderedComplex(verts, simplices)


def barycentric_subdivision(A):
    """Sd(A) as an ordered complex: vertices are the simplices of A
    (ordered by dimension, then lexicographically), simplices are flags."""
    vorder = {}
    verts = []
    for k in range(A.dim + 1):
        for t in A.level_tuples(k):
            vorder[frozenset(t)] = len(verts)
            verts.append(t)
    vsets = [frozenset(t) for t in verts]
    simplices = []

    def extend(chain):
        simplices.append([verts[i] for i in chain])
        top = vsets[chain[-1]]
        for j in range(chain[-1] + 1, len(verts)):
            if top < vsets[j]:
                chain.append(j)
                extend(chain)
                chain.pop()

    for i in range(len(verts)):
        extend([i])
    return OrderedComplex(verts, simplices)


# ---------------------------------------------------------------------------
# standard fixtures
# ---------------------------------------------------------------------------

def _simplex_boundary(n):
    """The boundary of the n-simplex as an ordered complex (an (n-1)-sphere)."""
    verts = list(range(n + 1))
    simplices = [list(c) for c in combinations(verts, n)]
    return OrderedComplex(verts, simplices)


_RP2_TRIANGLES = [(1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
                  (2, 3, 5), (3, 4, 6), (4, 5, 2), (5, 6, 3), (6, 2, 4)]

FIXTURE_NAMES = ("PT", "S1", "S2", "S3", "T2", "RP2", "S2xS2",
                 "S1xS1xS2", "S2xS3")


def standard_fixture(name):
    """Documented fixtures, as OrderedComplex (use .to_delta_set() as needed)."""
    if name == "PT":
        return OrderedComplex([0], [[0]])
    if name == "S1":
        return _simplex_boundary(2)
    if name == "S2":
        return _simplex_boundary(3)
    if name == "S3":
        return _simplex_boundary(4)
    if name == "T2":
        return osc_product(standard_fixture("S1"), standard_fixture("S1"))
    if name == "RP2":
        return OrderedComplex(list(range(1, 7)),
                              [list(t) for t in _RP2_TRIANGLES])
    if name == "S2xS2":
        return osc_product(standard_fixture("S2"), standard_fixture("S2"))
    if name == "S1xS1xS2":
        return osc_product(standard_fixture("S1"),
                           osc_product(standard_fixture("S1"),
                                       standard_fixture("S2")))
    if name == "S2xS3":
        return osc_product(standard_fixture("S2"), standard_fixture("S3"))
    raise KeyError("unknown fixture %r" % (name,))


# ---------------------------------------------------------------------------
# simplicial cochain oracle
# ---------------------------------------------------------------------------

def coboundary_matrix(X, k):
    """delta: C^k -> C^{k+1}, (delta f)(s) = sum_i (-1)^i f(d_i s)."""
    if k >= X.dim:
        return IntMatrix.zero(0, X.size(k))
    data = {}
    for s in range(X.size(k + 1)):
        for i in range(k + 2):
            key = (s, X.faces[k + 1][i][s])
            data[key] = data.get(key, 0) + (1 if i % 2 == 0 else -1)
    data = {key: v for key, v in data.items() if v}
    return IntMatrix.from_entries_dict(X.size(k + 1), X.size(k), data)


def simplicial_cohomology(X, coefficients=None, max_degree=None):
    """Cohomology of levelwise A-valued functions; the acceptance oracle."""
    A = coefficients or Coefficients.integers()
    top = X.dim if max_degree is None else min(max_degree, X.dim)
    out = []
    for k in range(top + 1):
        d_in = coboundary_matrix(X, k - 1) if k > 0 else IntMatrix.zero(X.size(0), 0)
        d_out = coboundary_matrix(X, k)
        out.append(cohomology_group(d_in, d_out, A))
    return out


def simplicial_cochain_delta(complex_, cochain, k):
    """delta on dict cochains keyed by level-k tuple index."""
    X = complex_
    out = {}
    for s in range(X.size(k + 1)):
        acc = 0
        for i in range(k + 2):
            v = cochain.get(X.faces[k + 1][i][s])
            if v:
                acc += v if i % 2 == 0 else -v
        if acc:
            out[s] = acc
    return out


def simplicial_cup(ordered, alpha, p, beta, q):
    """Alexander-Whitney cup product on an ordered complex.

    alpha, beta are dicts keyed by level index (of the ordered complex's
    canonical tuple tables) in degrees p and q; the result has degree p+q:
    (a u b)(v_0..v_{p+q}) = a(v_0..v_p) * b(v_p..v_{p+q}).
    """
    X, tables, index = ordered.to_delta_set()
    out = {}
    if p + q > X.dim:
        return out
    for s, t in enumerate(tables[p + q]):
        front = t[:p + 1]
        back = t[p:]
        a = alpha.get(index[p][front], 0)
        b = beta.get(index[q][back], 0)
        v = a * b
        if v:
            out[s] = v
    return out


def fundamental_cycle(ordered):
    """Top-level cycle with +-1 coefficients of a closed oriented fixture.

    Computed as the primitive integer kernel generator of the top boundary
    map, signed so the lexicographically first top cell carries +1.  Raises
    if the kernel is not rank one (not a connected orientable pseudomanifold).
    """
    X, tables, index = ordered.to_delta_set()
    n = X.dim
    # boundary: C_n -> C_{n-1}
    data = {}
    for s in range(X.size(n)):
        for i in range(n + 1):
            key = (X.faces[n][i][s], s)
            data[key] = data.get(key, 0) + (1 if i % 2 == 0 else -1)
    data = {k: v for k, v in data.items() if v}
    basis = integer_kernel_basis(X.size(n - 1), X.size(n), data)
    if len(basis) != 1:
        raise ValueError("top homology is not rank one")
    cyc = basis[0]
    first = min(cyc)
    if cyc[first] < 0:
        cyc = {k: -v for k, v in cyc.items()}
    if any(abs(v) != 1 for v in cyc.values()):
        raise ValueError("fundamental cycle is not unimodular")
    return cyc


def evaluate_cochain(cochain, chain):
    return sum(cochain.get(s, 0) * c for s, c in chain.items())
