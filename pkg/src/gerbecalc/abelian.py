"""Exact linear algebra over Z and over the cyclic coefficient groups.

Everything downstream (Cech cohomology, descent solves, torsors) reduces to
four primitives implemented here:

    snf              -- Smith normal form with unimodular transforms
    solve_linear     -- M x = b over Z, Z/n, or Q/Z (exact, or None)
    cohomology_group -- ker(d_out)/im(d_in) as a presented abelian group
    reduce_class     -- canonical coordinates of a cocycle in such a group

Matrices are arbitrary-precision integers throughout; intermediate
coefficient swell is accepted (inputs are desk scale).  Large sparse
matrices are handled by Gaussian elimination restricted to +-1 pivots
(chosen by Markowitz cost, deterministically), which splits off unimodular
summands without fill from column operations; whatever remains is a small
dense core that goes through textbook Smith reduction.  Row/column
operations are logged so that solutions, kernels and class reductions can be
reconstructed without ever materializing a dense transform.
"""

from __future__ import annotations

import heapq
from fractions import Fraction


class DimensionMismatch(ValueError):
    pass


class CompositionNonzero(ValueError):
    """d_out * d_in != 0 where a chain complex was required."""


class NotACocycle(ValueError):
    """Vector handed to reduce_class does not lie in ker(d_out)."""


# ---------------------------------------------------------------------------
# coefficient groups and elements
# ---------------------------------------------------------------------------

class Coefficients:
    """One of the coefficient groups Z, Z/n (n >= 2), or Q/Z.

    Q/Z elements are exact rationals canonically reduced into [0, 1); it is
    the finite-model stand-in for the circle group.
    """

    __slots__ = ("kind", "n")

    INTEGERS = "Z"
    CYCLIC = "Zmod"
    RATIONALS_MOD_ONE = "QmodZ"

    def __init__(self, kind, n=None):
        if kind == self.CYCLIC:
            if n is None or n < 2:
                raise ValueError("CyclicMod(n) requires n >= 2")
        elif kind in (self.INTEGERS, self.RATIONALS_MOD_ONE):
            if n is not None:
                raise ValueError("modulus only makes sense for CyclicMod")
        else:
            raise ValueError("unknown coefficient kind %r" % (kind,))
        self.kind = kind
        self.n = n

    # -- constructors ------------------------------------------------------
    @classmethod
    def integers(cls):
        return cls(cls.INTEGERS)

    @classmethod
    def cyclic(cls, n):
        return cls(cls.CYCLIC, n)

    @classmethod
    def rationals_mod_one(cls):
        return cls(cls.RATIONALS_MOD_ONE)

    @classmethod
    def parse(cls, text):
        """Parse 'Z', 'Zmod:n' or 'QmodZ' (the CLI --coeff syntax)."""
        if text == "Z":
            return cls.integers()
        if text == "QmodZ":
            return cls.rationals_mod_one()
        if text.startswith("Zmod:"):
            return cls.cyclic(int(text.split(":", 1)[1]))
        raise ValueError("cannot parse coefficients %r" % (text,))

    # -- group structure on canonical values --------------------------------
    def zero(self):
        return Fraction(0) if self.kind == self.RATIONALS_MOD_ONE else 0

    def canon(self, v):
        """Canonical form: residue in [0,n), reduced rational in [0,1), int."""
        if self.kind == self.INTEGERS:
            return int(v)
        if self.kind == self.CYCLIC:
            return int(v) % self.n
        f = Fraction(v)
        return f - (f.numerator // f.denominator)

    def add(self, a, b):
        return self.canon(a + b)

    def neg(self, a):
        return self.canon(-a)

    def scale(self, k, a):
        """Integer scaling k*a (the Z-module structure)."""
        return self.canon(k * a)

    def is_zero(self, a):
        return self.canon(a) == self.zero()

    def __eq__(self, other):
        return (isinstance(other, Coefficients)
                and self.kind == other.kind and self.n == other.n)

    def __hash__(self):
        return hash((self.kind, self.n))

    def __repr__(self):
        if self.kind == self.CYCLIC:
            return "Zmod:%d" % self.n
        return self.kind

    def to_json(self):
        return {"kind": self.kind} if self.n is None else {"kind": self.kind, "n": self.n}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], obj.get("n"))


class GroupElement:
    """A canonical-form value in a coefficient group; equality is bitwise."""

    __slots__ = ("coefficients", "value")

    def __init__(self, coefficients, value):
        self.coefficients = coefficients
        self.value = coefficients.canon(value)

    def __add__(self, other):
        if self.coefficients != other.coefficients:
            raise DimensionMismatch("mixed coefficient groups")
        return GroupElement(self.coefficients, self.value + other.value)

    def __neg__(self):
        return GroupElement(self.coefficients, -self.value)

    def __eq__(self, other):
        return (isinstance(other, GroupElement)
                and self.coefficients == other.coefficients
                and self.value == other.value)

    def __hash__(self):
        return hash((self.coefficients, self.value))

    def __repr__(self):
        return "GroupElement(%r, %s)" % (self.coefficients, self.value)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------

class IntMatrix:
    """Integer matrix; dense list-of-rows view, dict-of-entries backing.

    The `entries` property materializes the dense rows-by-cols table (for
    fixture-scale matrices); bulk consumers work off the sparse dict.
    """

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self._data = {}
        if entries is not None:
            if len(entries) != rows or any(len(r) != cols for r in entries):
                raise DimensionMismatch("entries array must be rows x cols")
            for i, row in enumerate(entries):
                for j, v in enumerate(row):
                    if v:
                        self._data[(i, j)] = int(v)

    @classmethod
    def from_entries_dict(cls, rows, cols, data):
        m = cls(rows, cols)
        for (i, j), v in data.items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise DimensionMismatch("entry out of range")
            if v:
                m._data[(i, j)] = int(v)
        return m

    @classmethod
    def identity(cls, n):
        return cls.from_entries_dict(n, n, {(i, i): 1 for i in range(n)})

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    @property
    def entries(self):
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self._data.items():
            out[i][j] = v
        return out

    def entries_dict(self):
        return dict(self._data)

    def __getitem__(self, ij):
        return self._data.get(ij, 0)

    def matmul(self, other):
        if self.cols != other.rows:
            raise DimensionMismatch("matmul shape mismatch")
        bycol = {}
        for (i, j), v in other._data.items():
            bycol.setdefault(i, []).append((j, v))
        out = {}
        for (i, k), v in self._data.items():
            for j, w in bycol.get(k, ()):
                key = (i, j)
                s = out.get(key, 0) + v * w
                if s:
                    out[key] = s
                elif key in out:
                    del out[key]
        return IntMatrix.from_entries_dict(self.rows, other.cols, out)

    def apply(self, vec):
        """Matrix times column vector (list), plain integer arithmetic."""
        if len(vec) != self.cols:
            raise DimensionMismatch("vector length != cols")
        out = [0] * self.rows
        for (i, j), v in self._data.items():
            if vec[j]:
                out[i] += v * vec[j]
        return out

    def transpose(self):
        return IntMatrix.from_entries_dict(
            self.cols, self.rows, {(j, i): v for (i, j), v in self._data.items()})

    def __eq__(self, other):
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self._data == other._data)

    def __repr__(self):
        return "IntMatrix(%d x %d, %d nonzero)" % (self.rows, self.cols, len(self._data))


class SmithDecomposition:
    """U * M * V = S with U, V unimodular and S diagonal, s1 | s2 | ..."""

    __slots__ = ("U", "S", "V", "_U_inv", "_V_inv")

    def __init__(self, U, S, V, U_inv=None, V_inv=None):
        self.U, self.S, self.V = U, S, V
        self._U_inv, self._V_inv = U_inv, V_inv

    def diagonal(self):
        n = min(self.S.rows, self.S.cols)
        return [self.S[(i, i)] for i in range(n)]

    def invariant_factors(self):
        return [d for d in self.diagonal() if d not in (0, 1)]

    def rank(self):
        return sum(1 for d in self.diagonal() if d != 0)


def _dense_pivot(A, rows, cols, start_r, start_c):
    """Deterministic pivot: smallest |value|, then lowest row, then column."""
    best = None
    for i in range(start_r, rows):
        Ai = A[i]
        for j in range(start_c, cols):
            v = Ai[j]
            if v:
                key = (abs(v), i, j)
                if best is None or key < best[0]:
                    best = (key, i, j)
    return None if best is None else (best[1], best[2])


def _snf_inplace(A, m, n):
    """Reduce dense A to Smith form; return op logs for U, V and inverses.

    Row ops are recorded as callables over abstract row-indexed tables; this
    keeps one reduction routine for all four transform matrices.
    """
    row_ops = []   # ('swap', i, j) | ('add', dst, src, t) | ('neg', i)
    col_ops = []

    def row_swap(i, j):
        A[i], A[j] = A[j], A[i]
        row_ops.append(("swap", i, j))

    def row_add(dst, src, t):
        Ad, As = A[dst], A[src]
        for k in range(n):
            if As[k]:
                Ad[k] += t * As[k]
        row_ops.append(("add", dst, src, t))

    def row_neg(i):
        A[i] = [-v for v in A[i]]
        row_ops.append(("neg", i))

    def col_swap(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        col_ops.append(("swap", i, j))

    def col_add(dst, src, t):
        for r in A:
            if r[src]:
                r[dst] += t * r[src]
        col_ops.append(("add", dst, src, t))

    t = 0
    while True:
        p = _dense_pivot(A, m, n, t, t)
        if p is None:
            break
        i, j = p
        if i != t:
            row_swap(t, i)
        if j != t:
            col_swap(t, j)
        while True:
            # clear column t below the pivot by division with remainder
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    if q:
                        row_add(i, t, -q)
                    if A[i][t]:
                        row_swap(t, i)  # remainder is strictly smaller
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    if q:
                        col_add(j, t, -q)
                    if A[t][j]:
                        col_swap(t, j)
                        done = False
            if done and all(A[i][t] == 0 for i in range(t + 1, m)) \
                    and all(A[t][j] == 0 for j in range(t + 1, n)):
                break
        if A[t][t] < 0:
            row_neg(t)
        # enforce divisibility of the remaining block by the pivot
        piv = A[t][t]
        culprit = None
        for i in range(t + 1, m):
            Ai = A[i]
            for j in range(t + 1, n):
                if Ai[j] % piv:
                    culprit = i
                    break
            if culprit is not None:
                break
        if culprit is not None:
            row_add(t, culprit, 1)
            continue  # redo this diagonal slot
        t += 1
    return row_ops, col_ops


def _ops_to_matrix(ops, size, inverse, side):
    """Materialize an op log as a matrix (or its inverse).

    side 'row': ops compose on the left (U = E_k ... E_1);
    side 'col': on the right (V = E_1 ... E_k).
    """
    M = IntMatrix.identity(size)
    data = M._data
    seq = reversed(ops) if inverse else ops
    for op in seq:
        if op[0] == "swap":
            _, i, j = op
            _table_swap(data, size, i, j, side)
        elif op[0] == "neg":
            _, i = op
            _table_neg(data, size, i, side)
        else:
            _, dst, src, t = op
            tt = -t if inverse else t
            _table_add(data, size, dst, src, tt, side)
    return M

def _table_swap(data, size, i, j, side):
    k0, k1 = (0, 1) if side == "row" else (1, 0)
    moved = {}
    for key in list(data):
        if key[k0] in (i, j):
            moved[key] = data.pop(key)
    for key, v in moved.items():
        other = j if key[k0] == i else i
        nk = (other, key[1]) if side == "row" else (key[0], other)
        data[nk] = v

def _table_neg(data, size, i, side):
    k0 = 0 if side == "row" else 1
    for key in list(data):
        if key[k0] == i:
            data[key] = -data[key]

def _table_add(data, size, dst, src, t, side):
    # row: row_dst += t*row_src ; col: col_dst += t*col_src
    k0 = 0 if side == "row" else 1
    updates = []
    for key, v in list(data.items()):
        if key[k0] == src:
            nk = (dst, key[1]) if side == "row" else (key[0], dst)
            updates.append((nk, t * v))
    for nk, dv in updates:
        s = data.get(nk, 0) + dv
        if s:
            data[nk] = s
        elif nk in data:
            del data[nk]


def snf(M):
    """Smith normal form with transforms: U*M*V = S, diagonal chain s1|s2|...

    Deterministic for a given input (pivot = smallest absolute value, then
    lowest row and column index).  Empty matrices are allowed.
    """
    m, n = M.rows, M.cols
    A = M.entries
    row_ops, col_ops = _snf_inplace(A, m, n)
    U = _ops_to_matrix(row_ops, m, inverse=False, side="row")
    V = _ops_to_matrix(col_ops, n, inverse=False, side="col")
    U_inv = _ops_to_matrix(row_ops, m, inverse=True, side="row")
    V_inv = _ops_to_matrix(col_ops, n, inverse=True, side="col")
    S = IntMatrix(m, n, A)
    return SmithDecomposition(U, S, V, U_inv, V_inv)


def det_unimodular_check(M):
    """Bareiss determinant, used by tests to confirm |det| = 1."""
    n = M.rows
    if n != M.cols:
        raise DimensionMismatch("determinant of non-square matrix")
    if n == 0:
        return 1
    a = M.entries
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


# ---------------------------------------------------------------------------
# sparse elimination engine
# ---------------------------------------------------------------------------

class SparseElimination:
    """Unit-pivot elimination over Z with logged operations.

    Columns are cleared with row operations first, so the subsequent column
    operations (clearing the pivot row) generate no fill.  Pivots are +-1
    entries chosen by Markowitz cost (len(row)-1)*(len(col)-1) with (row,
    col) index tie-break; the choice is deterministic.  What remains after
    no +-1 entries are left is returned as a small dense core.
    """

    def __init__(self, n_rows, n_cols, entries, companion_rows=None):
        # entries: dict (r, c) -> v
        self.n_rows, self.n_cols = n_rows, n_cols
        self.rows = {}
        self.cols = {}
        for (r, c), v in entries.items():
            if v:
                self.rows.setdefault(r, {})[c] = v
                self.cols.setdefault(c, set()).add(r)
        self.row_log = []     # (dst, src, t): row_dst -= t * row_src
        self.col_log = []     # (dst, src, t): col_dst -= t * col_src
        self.pivots = []      # (r, c, +-1)
        self.pivot_rows = set()
        self.pivot_cols = set()
        # companion: dict r -> {k: v}; column op on self mirrors a row op here
        # (middle-basis change acting on the rows of the incoming boundary).
        self.companion = companion_rows

    def _push_candidates(self, heap, r):
        row = self.rows.get(r)
        if not row:
            return
        lr = len(row)
        for c, v in row.items():
            if v in (1, -1):
                cost = (lr - 1) * (len(self.cols[c]) - 1)
                heapq.heappush(heap, (cost, r, c))

    def eliminate(self):
        heap = []
        for r in self.rows:
            self._push_candidates(heap, r)
        while heap:
            cost, r, c = heapq.heappop(heap)
            row = self.rows.get(r)
            if not row or c not in row or row[c] not in (1, -1):
                continue
            cur = (len(row) - 1) * (len(self.cols[c]) - 1)
            if cur > cost:
                heapq.heappush(heap, (cur, r, c))
                continue
            self._pivot(r, c, heap)
        return self

    def _pivot(self, r, c, heap):
        v = self.rows[r][c]
        # clear column c with row operations
        for r2 in list(self.cols[c]):
            if r2 == r:
                continue
            t = self.rows[r2][c] * v  # v is +-1
            self._row_axpy(r2, r, t)
            self.row_log.append((r2, r, t))
            if heap is not None:
                self._push_candidates(heap, r2)
        # clear row r with column operations (no fill: col c is now singleton)
        for c2 in list(self.rows[r]):
            if c2 == c:
                continue
            t = self.rows[r][c2] * v
            self._col_axpy(c2, c, t)
            self.col_log.append((c2, c, t))
        # retire pivot row/column
        del self.rows[r]
        self.cols.pop(c, None)
        self.pivots.append((r, c, v))
        self.pivot_rows.add(r)
        self.pivot_cols.add(c)

    def _row_axpy(self, dst, src, t):
        # row_dst -= t * row_src
        rs = self.rows[src]
        rd = self.rows.setdefault(dst, {})
        for c, v in rs.items():
            nv = rd.get(c, 0) - t * v
            if nv:
                rd[c] = nv
                self.cols.setdefault(c, set()).add(dst)
            else:
                if c in rd:
                    del rd[c]
                    self.cols[c].discard(dst)
        if not rd:
            del self.rows[dst]

    def _col_axpy(self, dst, src, t):
        # col_dst -= t * col_src   (here col src is a singleton: pivot only)
        for r in list(self.cols.get(src, ())):
            v = self.rows[r][src]
            rd = self.rows[r]
            nv = rd.get(dst, 0) - t * v
            if nv:
                rd[dst] = nv
                self.cols.setdefault(dst, set()).add(r)
            else:
                if dst in rd:
                    del rd[dst]
                    self.cols[dst].discard(r)
        if self.companion is not None:
            # basis change x = E y with E = I - t e_{src,dst}:
            # companion rows transform by E^{-1}: row_src += t * row_dst
            crow_d = self.companion.get(dst)
            if crow_d:
                crow_s = self.companion.setdefault(src, {})
                for k, v in crow_d.items():
                    nv = crow_s.get(k, 0) + t * v
                    if nv:
                        crow_s[k] = nv
                    elif k in crow_s:
                        del crow_s[k]
                if not crow_s:
                    del self.companion[src]

    # -- post-elimination structure -----------------------------------------
    def core(self):
        """Remaining rows/cols (no unit entries) as a dense block + indexing."""
        core_rows = sorted(self.rows)
        core_cols = sorted({c for row in self.rows.values() for c in row})
        ci = {c: j for j, c in enumerate(core_cols)}
        dense = [[0] * len(core_cols) for _ in core_rows]
        for i, r in enumerate(core_rows):
            for c, v in self.rows[r].items():
                dense[i][ci[c]] = v
        return core_rows, core_cols, dense

    def rank_and_invariants(self):
        core_rows, core_cols, dense = self.core()
        dec = snf(IntMatrix(len(core_rows), len(core_cols), dense))
        rank = len(self.pivots) + dec.rank()
        factors = dec.invariant_factors()
        return rank, factors

    # -- solving -------------------------------------------------------------
    def apply_row_log(self, b):
        """b as dict r -> value (plain int/Fraction arithmetic)."""
        for dst, src, t in self.row_log:
            v = b.get(src)
            if v:
                nv = b.get(dst, 0) - t * v
                if nv:
                    b[dst] = nv
                elif dst in b:
                    del b[dst]
        return b

    def unapply_col_log(self, y):
        """Recover x (dict) from y after elimination: x = (prod E) y."""
        for dst, src, t in reversed(self.col_log):
            # E = I - t e_{src,dst}: x_src = y_src - t y_dst
            v = y.get(dst)
            if v:
                nv = y.get(src, 0) - t * v
                if nv:
                    y[src] = nv
                elif src in y:
                    del y[src]
        return y


def sparse_rank_invariants(n_rows, n_cols, entries):
    elim = SparseElimination(n_rows, n_cols, entries).eliminate()
    return elim.rank_and_invariants()


def _solve_diag_entry(s, rhs, coefficients):
    """Solve s * y = rhs in the coefficient group; None if impossible."""
    A = coefficients
    if A.kind == Coefficients.INTEGERS:
        if s == 0:
            return 0 if rhs == 0 else None
        if rhs % s:
            return None
        return rhs // s
    if A.kind == Coefficients.CYCLIC:
        n = A.n
        rhs %= n
        if s == 0:
            return 0 if rhs == 0 else None
        g = _gcd(s, n)
        if rhs % g:
            return None
        # (s/g) is invertible mod n/g
        ng = n // g
        y = (rhs // g) * pow((s // g) % ng, -1, ng) % ng if ng > 1 else 0
        return y
    # Q/Z
    rhs = A.canon(rhs)
    if s == 0:
        return Fraction(0) if rhs == 0 else None
    return A.canon(Fraction(rhs, abs(s)) * (1 if s > 0 else -1))


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def solve_linear_sparse(n_rows, n_cols, entries, b_dict, coefficients,
                        elim=None):
    """Solve M x = b over the coefficient group; returns dict or None.

    `entries` is the integer matrix as dict (r,c) -> v; `b_dict` maps row
    index to a canonical group value.  A pre-run elimination of the same
    matrix may be passed to amortize repeated solves.
    """
    A = coefficients
    if elim is None:
        elim = SparseElimination(n_rows, n_cols, entries).eliminate()
    b = elim.apply_row_log({r: v for r, v in b_dict.items() if v})
    y = {}
    for r, c, v in elim.pivots:
        rhs = b.pop(r, 0)
        if rhs:
            y[c] = A.canon(v * rhs)  # v in {1,-1}
    core_rows, core_cols, dense = elim.core()
    if core_rows:
        dec = snf(IntMatrix(len(core_rows), len(core_cols), dense))
        rhs_vec = [b.pop(r, 0) for r in core_rows]
        ub = dec.U.apply(rhs_vec) if A.kind == Coefficients.INTEGERS \
            else _apply_int_matrix(dec.U, rhs_vec)
        diag = dec.diagonal()
        w = [None] * len(core_cols)
        for i in range(len(core_cols)):
            s = diag[i] if i < len(diag) else 0
            rhs = ub[i] if i < len(ub) else 0
            sol = _solve_diag_entry(s, rhs, A)
            if sol is None:
                return None
            w[i] = sol
        for i in range(len(core_cols), len(core_rows)):
            if not A.is_zero(ub[i]):
                return None
        xc = _apply_int_matrix(dec.V, w)
        for j, c in enumerate(core_cols):
            if xc[j]:
                y[c] = A.canon(xc[j])
    # rows never pivoted and outside the core must have zero rhs
    for r, v in b.items():
        if not A.is_zero(v):
            return None
    x = elim.unapply_col_log(y)
    return {c: A.canon(v) for c, v in x.items() if not A.is_zero(v)}


def _apply_int_matrix(M, vec):
    out = [0] * M.rows
    for (i, j), v in M._data.items():
        if j < len(vec) and vec[j]:
            out[i] += v * vec[j]
    return out


def solve_linear(M, b, coefficients):
    """Solve M x = b in the coefficient group; x as list, or None.

    M is integral; b entries share the coefficient group.  For Q/Z this
    solves the lifted problem per invariant factor (y = rhs/s into [0,1)),
    which is equivalent to clearing denominators with a mod-1 slack per row.
    """
    vals = []
    for entry in b:
        vals.append(entry.value if isinstance(entry, GroupElement) else entry)
    if len(vals) != M.rows:
        raise DimensionMismatch("b length != rows")
    bd = {i: coefficients.canon(v) for i, v in enumerate(vals)
          if not coefficients.is_zero(v)}
    sol = solve_linear_sparse(M.rows, M.cols, M.entries_dict(), bd, coefficients)
    if sol is None:
        return None
    return [sol.get(j, coefficients.zero()) for j in range(M.cols)]


# ---------------------------------------------------------------------------
# finitely generated abelian groups / cohomology presentations
# ---------------------------------------------------------------------------

class FgAbelianGroup:
    """Z^rank + sum of Z/torsion[i], torsion in a divisibility chain.

    basis_lift columns express the chosen generators (torsion generators
    first, then free) as vectors in the ambient cochain space.  A private
    reducer closure maps cocycle vectors to canonical coordinates.
    """

    __slots__ = ("rank", "torsion", "basis_lift", "_reducer", "ambient_dim")

    def __init__(self, rank, torsion, basis_lift=None, reducer=None,
                 ambient_dim=None):
        for i in range(len(torsion) - 1):
            if torsion[i + 1] % torsion[i]:
                raise ValueError("torsion must form a divisibility chain")
        if any(t < 2 for t in torsion):
            raise ValueError("torsion entries must be >= 2")
        self.rank = rank
        self.torsion = list(torsion)
        self.basis_lift = basis_lift
        self._reducer = reducer
        self.ambient_dim = ambient_dim

    def invariants(self):
        return (self.rank, tuple(self.torsion))

    def is_trivial(self):
        return self.rank == 0 and not self.torsion

    def order(self):
        if self.rank:
            return None
        p = 1
        for t in self.torsion:
            p *= t
        return p

    def zero_class(self):
        return CohomologyClass(self, [0] * self.rank, [0] * len(self.torsion))

    def __eq__(self, other):
        return (isinstance(other, FgAbelianGroup)
                and self.invariants() == other.invariants())

    def __hash__(self):
        return hash(self.invariants())

    def __repr__(self):
        parts = ["Z"] * self.rank + ["Z/%d" % t for t in self.torsion]
        return " + ".join(parts) if parts else "0"

    def describe(self):
        return repr(self)


class CohomologyClass:
    """Canonical coordinates in an FgAbelianGroup: free part + torsion part."""

    __slots__ = ("group", "free", "torsion")

    def __init__(self, group, free, torsion):
        if len(free) != group.rank or len(torsion) != len(group.torsion):
            raise DimensionMismatch("coordinate shape mismatch")
        self.group = group
        self.free = [int(v) for v in free]
        self.torsion = [int(v) % t for v, t in zip(torsion, group.torsion)]

    def is_zero(self):
        return not any(self.free) and not any(self.torsion)

    def __add__(self, other):
        if self.group != other.group:
            raise DimensionMismatch("classes in different groups")
        return CohomologyClass(
            self.group,
            [a + b for a, b in zip(self.free, other.free)],
            [a + b for a, b in zip(self.torsion, other.torsion)])

    def __neg__(self):
        return CohomologyClass(self.group, [-a for a in self.free],
                               [-a for a in self.torsion])

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        return CohomologyClass(self.group, [k * a for a in self.free],
                               [k * a for a in self.torsion])

    def coords(self):
        return (tuple(self.free), tuple(self.torsion))

    def __eq__(self, other):
        return (isinstance(other, CohomologyClass) and self.group == other.group
                and self.free == other.free and self.torsion == other.torsion)

    def __hash__(self):
        return hash((self.group, tuple(self.free), tuple(self.torsion)))

    def __repr__(self):
        return "CohomologyClass(%r, free=%r, torsion=%r)" % (
            self.group, self.free, self.torsion)


def _entries_of(M):
    if isinstance(M, IntMatrix):
        return M.rows, M.cols, M.entries_dict()
    raise TypeError("expected IntMatrix")


class _IntegerHomologyReducer:
    """Reduction data for H = ker(d_out)/im(d_in) over Z.

    Stage 1 eliminates d_out with the middle-basis column ops mirrored onto
    the rows of d_in; the kernel becomes a coordinate subspace.  Stage 2
    eliminates the restricted d_in; unit pivots are killed coordinates,
    diagonal entries > 1 are torsion, untouched kernel coordinates are free.
    """

    def __init__(self, d_in, d_out):
        n_mid = d_out.cols
        in_rows, in_cols, in_data = _entries_of(d_in)
        if in_rows != n_mid:
            raise DimensionMismatch("d_in rows must equal d_out cols")
        self.n_mid = n_mid
        companion = {}
        for (r, c), v in in_data.items():
            companion.setdefault(r, {})[c] = v
        self.elim_out = SparseElimination(
            d_out.rows, n_mid, d_out.entries_dict(), companion_rows=companion)
        self.elim_out.eliminate()
        # absorb the dense core of d_out: extend the middle-basis change so
        # the kernel is exactly a coordinate subspace
        core_rows, core_cols, dense = self.elim_out.core()
        self.out_core_cols = core_cols
        self.out_core_dec = None
        kernel_core = set()
        if core_cols:
            dec = snf(IntMatrix(len(core_rows), len(core_cols), dense))
            self.out_core_dec = dec
            diag = dec.diagonal()
            for j in range(len(core_cols)):
                s = diag[j] if j < len(diag) else 0
                if s == 0:
                    kernel_core.add(core_cols[j])
            # mirror the dense V onto the companion rows: rows transform by
            # V^{-1} acting on the core block
            comp = self.elim_out.companion
            Vinv = dec._V_inv
            block = {}
            for j, c in enumerate(core_cols):
                row = comp.pop(c, None)
                if row:
                    block[j] = row
            for (i, j), v in Vinv._data.items():
                src = block.get(j)
                if not src:
                    continue
                dst = comp.setdefault(core_cols[i], {})
                for k, w in src.items():
                    nv = dst.get(k, 0) + v * w
                    if nv:
                        dst[k] = nv
                    elif k in dst:
                        del dst[k]
            for c in list(comp):
                if not comp[c]:
                    del comp[c]
        self.kernel_coords = sorted(
            (set(range(n_mid)) - self.elim_out.pivot_cols
             - set(core_cols)) | kernel_core)
        kc_index = {c: i for i, c in enumerate(self.kernel_coords)}
        self.kc_index = kc_index
        # d_in in new coordinates, restricted to kernel rows.  Rows off the
        # kernel must vanish exactly (this is d_out * d_in = 0).
        comp = self.elim_out.companion
        in_restricted = {}
        for r, row in comp.items():
            if r not in kc_index:
                if any(row.values()):
                    raise CompositionNonzero("d_out * d_in != 0")
                continue
            for k, v in row.items():
                if v:
                    in_restricted[(kc_index[r], k)] = v
        self.elim_in = SparseElimination(
            len(self.kernel_coords), in_cols, in_restricted).eliminate()
        core_rows2, core_cols2, dense2 = self.elim_in.core()
        self.in_core_rows = core_rows2
        self.in_core_dec = snf(IntMatrix(len(core_rows2), len(core_cols2),
                                         dense2)) if core_rows2 else None
        # classify kernel coordinates
        torsion_rows = []   # (row_in_kernel_coords, factor)
        killed = set(self.elim_in.pivot_rows)
        if self.in_core_dec is not None:
            diag = self.in_core_dec.diagonal()
            for i, r in enumerate(core_rows2):
                s = diag[i] if i < len(diag) else 0
                if s == 1:
                    killed.add(r)
                elif s > 1:
                    torsion_rows.append((r, s))
                # s == 0: stays free
        torsion_rows.sort(key=lambda p: (p[1], p[0]))
        self.torsion_rows = torsion_rows
        self.core_row_pos = {r: i for i, r in enumerate(core_rows2)}
        self.free_rows = sorted(set(range(len(self.kernel_coords)))
                                - killed - {r for r, _ in torsion_rows})
        self.rank = len(self.free_rows)
        self.torsion = [s for _, s in torsion_rows]

    # -- transform a middle vector to kernel coordinates ---------------------
    def _to_kernel_coords(self, vec_dict):
        y = dict(vec_dict)
        # x = W y where W is the logged column product; here we need
        # y = W^{-1} x: replay the log forward with inverted ops
        for dst, src, t in self.elim_out.col_log:
            # E = I - t e_{src,dst}; E^{-1} = I + t e_{src,dst}:
            # y_src += t * y_dst  (inverse op, applied in forward order)
            v = y.get(dst)
            if v:
                nv = y.get(src, 0) + t * v
                if nv:
                    y[src] = nv
                elif src in y:
                    del y[src]
        if self.out_core_dec is not None:
            # core coordinates transform by V^{-1}
            block = [y.pop(c, 0) for c in self.out_core_cols]
            if any(block):
                nb = _apply_int_matrix(self.out_core_dec._V_inv, block)
                for j, c in enumerate(self.out_core_cols):
                    if nb[j]:
                        y[c] = nb[j]
        w = {}
        for c, v in y.items():
            if not v:
                continue
            if c not in self.kc_index:
                raise NotACocycle("vector is not in ker(d_out)")
            w[self.kc_index[c]] = v
        return w

    def reduce(self, group, vec_dict):
        w = self._to_kernel_coords(vec_dict)
        # move to the d_in-adapted basis: apply stage-2 row log
        for dst, src, t in self.elim_in.row_log:
            v = w.get(src)
            if v:
                nv = w.get(dst, 0) - t * v
                if nv:
                    w[dst] = nv
                elif dst in w:
                    del w[dst]
        u = None
        if self.in_core_dec is not None:
            block = [w.pop(r, 0) for r in self.in_core_rows]
            u = self.in_core_dec.U.apply(block) if any(block) \
                else [0] * len(self.in_core_rows)
            for i, r in enumerate(self.in_core_rows):
                if u[i]:
                    w[r] = u[i]
        free = [w.get(r, 0) for r in self.free_rows]
        torsion = [w.get(r, 0) % s for r, s in self.torsion_rows]
        return CohomologyClass(group, free, torsion)

    # -- lift chosen generators back to the ambient cochain space ------------
    def generator_vectors(self):
        gens = []
        for r, _s in self.torsion_rows:
            gens.append(self._lift_kernel_row(r, torsion=True))
        for r in self.free_rows:
            gens.append(self._lift_kernel_row(r, torsion=False))
        return gens

    def _lift_kernel_row(self, r, torsion):
        w = {r: 1}
        if self.in_core_dec is not None and r in self.core_row_pos:
            # coordinates were read through U; invert the core block: w = U^{-1} e
            block = [0] * len(self.in_core_rows)
            block[self.core_row_pos[r]] = 1
            nb = _apply_int_matrix(self.in_core_dec._U_inv, block)
            w = {}
            for i, rr in enumerate(self.in_core_rows):
                if nb[i]:
                    w[rr] = nb[i]
        # invert the stage-2 row log (replay backwards with inverted ops:
        # the op row_dst -= t*row_src inverts to row_dst += t*row_src)
        for dst, src, t in reversed(self.elim_in.row_log):
            v = w.get(src)
            if v:
                nv = w.get(dst, 0) + t * v
                if nv:
                    w[dst] = nv
                elif dst in w:
                    del w[dst]
        # kernel coords -> middle coords: y supported on kernel coordinates,
        # then x = W y via the stage-1 column log
        y = {self.kernel_coords[i]: v for i, v in w.items()}
        if self.out_core_dec is not None:
            block = [y.pop(c, 0) for c in self.out_core_cols]
            if any(block):
                nb = _apply_int_matrix(self.out_core_dec.V, block)
                for j, c in enumerate(self.out_core_cols):
                    if nb[j]:
                        y[c] = nb[j]
        return self.elim_out.unapply_col_log(y)


def cohomology_group(d_in, d_out, coefficients=None):
    """ker(d_out) / im(d_out's predecessor d_in), presented by Smith form.

    Integers: full presentation with basis lift and canonical reduction.
    CyclicMod(n): presentation of the mod-n homology via integer lattices.
    RationalsModOne is rejected: such groups are divisible, not finitely
    generated, and cannot be presented in this form.
    """
    A = coefficients or Coefficients.integers()
    if A.kind == Coefficients.RATIONALS_MOD_ONE:
        raise ValueError("Q/Z cohomology is not finitely generated; "
                         "compute over Z and apply the Bockstein instead")
    if d_in.rows != d_out.cols:
        raise DimensionMismatch("d_in rows must equal d_out cols")
    if A.kind == Coefficients.INTEGERS:
        red = _IntegerHomologyReducer(d_in, d_out)
        group = FgAbelianGroup(red.rank, red.torsion, ambient_dim=d_out.cols)
        group._reducer = red
        gens = red.generator_vectors()
        group.basis_lift = IntMatrix.from_entries_dict(
            d_out.cols, len(gens),
            {(r, j): v for j, g in enumerate(gens) for r, v in g.items()})
        return group
    return _cyclic_cohomology_group(d_in, d_out, A)


class _CyclicReducer:
    """Reduction data for homology with Z/n coefficients.

    ker_{Z/n}(d_out) is the integer lattice K = {x : d_out x in nZ^p},
    realized by a generator matrix G (projection of ker[d_out | -nI]).
    The group is Z^k / R where R collects G-coordinates of im(d_in),
    of nZ^mid, and ker(G); that integer presentation supplies coordinates
    and generator lifts.
    """

    def __init__(self, d_in, d_out, n):
        n_mid = d_out.cols
        self.n = n
        self.n_mid = n_mid
        data = d_out.entries_dict()
        for i in range(d_out.rows):
            data[(i, n_mid + i)] = -n
        gens = integer_kernel_basis(d_out.rows, n_mid + d_out.rows, data)
        proj = [{c: w for c, w in g.items() if c < n_mid} for g in gens]
        k = len(proj)
        self.k = k
        self.G = {}
        for j, g in enumerate(proj):
            for r, v in g.items():
                self.G[(r, j)] = v
        self.G_elim = SparseElimination(n_mid, k, self.G).eliminate()
        Zc = Coefficients.integers()
        rel_cols = {}
        col_idx = 0

        def add_relation(rhs):
            nonlocal col_idx
            sol = solve_linear_sparse(n_mid, k, self.G, rhs, Zc,
                                      elim=self.G_elim)
            if sol is None:
                raise CompositionNonzero(
                    "image is not inside ker_{Z/n}(d_out)")
            for c, v in sol.items():
                rel_cols[(c, col_idx)] = v
            col_idx += 1

        by_col = {}
        for (r, c), v in d_in.entries_dict().items():
            by_col.setdefault(c, {})[r] = v
        for j in range(d_in.cols):
            add_relation(by_col.get(j, {}))
        for i in range(n_mid):
            add_relation({i: n})
        for kv in integer_kernel_basis(n_mid, k, self.G):
            for c, v in kv.items():
                rel_cols[(c, col_idx)] = v
            col_idx += 1
        rel = IntMatrix.from_entries_dict(k, col_idx, rel_cols)
        self.inner = cohomology_group(rel, IntMatrix.zero(0, k), Zc)
        assert self.inner.rank == 0, "Z/n homology must be finite"

    def reduce(self, group, vec_dict):
        sol = solve_linear_sparse(self.n_mid, self.k, self.G, dict(vec_dict),
                                  Coefficients.integers(), elim=self.G_elim)
        if sol is None:
            raise NotACocycle("vector is not a mod-n cocycle")
        inner_cls = reduce_class(self.inner, sol)
        return CohomologyClass(group, [], inner_cls.torsion)

    def generator_vectors(self):
        out = []
        lift = self.inner.basis_lift
        for j in range(len(self.inner.torsion)):
            w = {i: lift[(i, j)] for i in range(self.k) if lift[(i, j)]}
            x = {}
            for (r, c), v in self.G.items():
                t = w.get(c)
                if t:
                    x[r] = x.get(r, 0) + v * t
            out.append({r: v % self.n for r, v in x.items() if v % self.n})
        return out


def _cyclic_cohomology_group(d_in, d_out, A):
    red = _CyclicReducer(d_in, d_out, A.n)
    group = FgAbelianGroup(0, red.inner.torsion, ambient_dim=d_out.cols)
    group._reducer = red
    gens = red.generator_vectors()
    group.basis_lift = IntMatrix.from_entries_dict(
        d_out.cols, len(gens),
        {(r, j): v for j, g in enumerate(gens) for r, v in g.items()})
    return group


def integer_kernel_basis(n_rows, n_cols, entries):
    """Basis of the integer kernel of a sparse matrix, as sparse dicts."""
    elim = SparseElimination(n_rows, n_cols, entries).eliminate()
    basis = []
    core_rows, core_cols, dense = elim.core()
    core_set = set(core_cols)
    free_cols = [c for c in range(n_cols)
                 if c not in elim.pivot_cols and c not in core_set]
    for c in free_cols:
        basis.append(elim.unapply_col_log({c: 1}))
    if core_cols:
        dec = snf(IntMatrix(len(core_rows), len(core_cols), dense))
        diag = dec.diagonal()
        for j in range(len(core_cols)):
            s = diag[j] if j < len(diag) else 0
            if s == 0:
                col = {core_cols[i]: v for (i, jj), v in dec.V._data.items()
                       if jj == j and v}
                basis.append(elim.unapply_col_log(col))
    return basis


def reduce_class(group, cocycle):
    """Canonical coordinates of a cocycle vector in a presented group.

    Cocycles differing by im(d_in) reduce identically; a vector outside
    ker(d_out) raises NotACocycle.
    """
    if group._reducer is None:
        raise ValueError("group carries no reduction data")
    if isinstance(cocycle, dict):
        vec = {k: int(v) for k, v in cocycle.items() if v}
    else:
        if group.ambient_dim is not None and len(cocycle) != group.ambient_dim:
            raise DimensionMismatch("cocycle length != ambient dimension")
        vec = {i: int(v) for i, v in enumerate(cocycle) if v}
    return group._reducer.reduce(group, vec)


# ---------------------------------------------------------------------------
# subgroup / quotient presentations (torsors, transgression targets)
# ---------------------------------------------------------------------------

def _relation_lattice(group):
    """Columns spanning the relations of Z^{r+s} -> group (torsion first)."""
    s = len(group.torsion)
    cols = {}
    for i, t in enumerate(group.torsion):
        cols[(i, i)] = t
    return s + group.rank, s, cols


def subgroup_presentation(ambient, gens):
    """Isomorphism type of the subgroup generated by classes of `ambient`.

    gens: list of CohomologyClass in `ambient`.  Returns FgAbelianGroup
    (no basis lift; this is an isomorphism-type computation).
    """
    dim, n_tors, lattice = _relation_lattice(ambient)
    k = len(gens)
    if k == 0:
        return FgAbelianGroup(0, [])
    G = {}
    for j, g in enumerate(gens):
        for i, v in enumerate(g.torsion):
            if v:
                G[(i, j)] = v
        for i, v in enumerate(g.free):
            if v:
                G[(n_tors + i, j)] = v
    # subgroup = Z^k / {w : G w in relation lattice}
    stacked = dict(G)
    for (i, j), v in lattice.items():
        stacked[(i, k + j)] = v
    kernel = integer_kernel_basis(dim, k + n_tors, stacked)
    rel = {}
    col = 0
    for kv in kernel:
        head = {c: v for c, v in kv.items() if c < k}
        if head:
            for c, v in head.items():
                rel[(c, col)] = v
            col += 1
    rank, torsion = sparse_rank_invariants(k, col, rel)
    return FgAbelianGroup(k - rank, torsion)


def quotient_presentation(ambient, sub_gens):
    """Presentation of ambient / <sub_gens> plus a coordinate reduction map.

    Returns (group, reduce) where reduce maps a CohomologyClass of the
    ambient group to a CohomologyClass of the quotient.
    """
    dim, n_tors, lattice = _relation_lattice(ambient)
    cols = dict(lattice)
    base = len(ambient.torsion)
    col = max((j for (_, j) in lattice), default=-1) + 1
    for g in sub_gens:
        any_entry = False
        for i, v in enumerate(g.torsion):
            if v:
                cols[(i, col)] = v
                any_entry = True
        for i, v in enumerate(g.free):
            if v:
                cols[(n_tors + i, col)] = v
                any_entry = True
        if any_entry:
            col += 1
    # quotient = Z^dim / span(cols): present via the integer reducer with
    # d_out = 0 and d_in = cols
    d_in = IntMatrix.from_entries_dict(dim, col, cols)
    d_out = IntMatrix.zero(0, dim)
    q = cohomology_group(d_in, d_out, Coefficients.integers())

    def reduce(cls):
        vec = {i: v for i, v in enumerate(cls.torsion) if v}
        for i, v in enumerate(cls.free):
            if v:
                vec[n_tors + i] = v
        return reduce_class(q, vec)

    return q, reduce
