import random
from fractions import Fraction
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gerbecalc.abelian import (
    Coefficients, CohomologyClass, CompositionNonzero, DimensionMismatch,
    FgAbelianGroup, GroupElement, IntMatrix, NotACocycle,
    cohomology_group, det_unimodular_check, integer_kernel_basis,
    reduce_class, snf, solve_linear, subgroup_presentation,
    quotient_presentation)

Z = Coefficients.integers()


def minors_gcd_invariants(M):
    """Independent oracle: s_1...s_k = gcd of all k x k minors."""
    rows, cols = M.rows, M.cols
    ent = M.entries
    prev = 1
    out = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for rs in combinations(range(rows), k):
            for cs in combinations(range(cols), k):
                sub = IntMatrix(k, k, [[ent[i][j] for j in cs] for i in rs])
                g = gcd(g, det_bareiss(sub))
        if g == 0:
            break
        out.append(g // prev)
        prev = g
    return out


def det_bareiss(M):
    n = M.rows
    a = [row[:] for row in M.entries]
    sign, prev = 1, 1
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
    return sign * a[n - 1][n - 1] if n else 1


def gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


# --- snf ------------------------------------------------------------------

def test_snf_identity():
    M = IntMatrix.identity(2)
    dec = snf(M)
    assert dec.S == M
    assert dec.U == IntMatrix.identity(2)
    assert dec.V == IntMatrix.identity(2)


def test_snf_2x4_example():
    M = IntMatrix(2, 2, [[2, 4], [6, 8]])
    dec = snf(M)
    assert dec.diagonal() == [2, 4]
    assert minors_gcd_invariants(M) == [2, 4]
    assert dec.U.matmul(M).matmul(dec.V) == dec.S


def test_snf_zero():
    M = IntMatrix.zero(3, 2)
    dec = snf(M)
    assert dec.S == M


def test_snf_empty():
    dec = snf(IntMatrix.zero(0, 3))
    assert dec.S.rows == 0 and dec.S.cols == 3


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_snf_properties(m, n, data):
    entries = [[data.draw(st.integers(-9, 9)) for _ in range(n)]
               for _ in range(m)]
    M = IntMatrix(m, n, entries)
    dec = snf(M)
    # U M V = S
    assert dec.U.matmul(M).matmul(dec.V) == dec.S
    # diagonal, nonnegative, divisibility chain, zeros last
    diag = dec.diagonal()
    for (i, j), v in dec.S._data.items():
        assert i == j and v > 0
    nz = [d for d in diag if d]
    assert nz == diag[:len(nz)]
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0
    # unimodular transforms
    assert det_unimodular_check(dec.U) in (1, -1)
    assert det_unimodular_check(dec.V) in (1, -1)
    # oracle: gcds of minors
    assert [d for d in diag if d] == minors_gcd_invariants(M)
    # determinism
    dec2 = snf(IntMatrix(m, n, entries))
    assert dec2.S == dec.S and dec2.U == dec.U and dec2.V == dec.V


# --- solve_linear -----------------------------------------------------------

def test_solve_identity():
    M = IntMatrix.identity(3)
    b = [5, -2, 0]
    assert solve_linear(M, b, Z) == [5, -2, 0]


def test_solve_parity_obstruction():
    M = IntMatrix(1, 1, [[2]])
    assert solve_linear(M, [1], Z) is None


def test_solve_mod3():
    M = IntMatrix(1, 1, [[2]])
    x = solve_linear(M, [1], Coefficients.cyclic(3))
    assert x == [2]  # enumerate residues: 2*2 = 4 = 1 mod 3


def test_solve_qmodz():
    A = Coefficients.rationals_mod_one()
    M = IntMatrix(1, 1, [[2]])
    x = solve_linear(M, [Fraction(1, 2)], A)
    assert x is not None
    assert A.canon(2 * x[0] - Fraction(1, 2)) == 0
    # 0 * x = nonzero has no solution even in Q/Z
    M0 = IntMatrix(1, 1, [[0]])
    assert solve_linear(M0, [Fraction(1, 3)], A) is None


def test_solve_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_linear(IntMatrix.identity(2), [1], Z)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_solve_exhaustive_crosscheck(m, n, data):
    entries = [[data.draw(st.integers(-3, 3)) for _ in range(n)]
               for _ in range(m)]
    b = [data.draw(st.integers(-3, 3)) for _ in range(m)]
    M = IntMatrix(m, n, entries)
    x = solve_linear(M, b, Z)
    if x is not None:
        assert M.apply(x) == b
    else:
        # no solution with small entries either (bound B = 3, sizes <= 3)
        for cand in product(range(-9, 10), repeat=n):
            assert M.apply(list(cand)) != b


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 7), st.integers(1, 3), st.integers(1, 3), st.data())
def test_solve_cyclic_crosscheck(mod, m, n, data):
    entries = [[data.draw(st.integers(-3, 3)) for _ in range(n)]
               for _ in range(m)]
    b = [data.draw(st.integers(0, mod - 1)) for _ in range(m)]
    M = IntMatrix(m, n, entries)
    A = Coefficients.cyclic(mod)
    x = solve_linear(M, b, A)
    solvable = any(
        all((sum(entries[i][j] * c[j] for j in range(n)) - b[i]) % mod == 0
            for i in range(m))
        for c in product(range(mod), repeat=n))
    if x is None:
        assert not solvable
    else:
        assert all((sum(entries[i][j] * x[j] for j in range(n)) - b[i]) % mod == 0
                   for i in range(m))


# --- cohomology_group -------------------------------------------------------

def s1_coboundary():
    """C^0 -> C^1 for the 3-cycle: (delta f)(edge ij) = f(j) - f(i)."""
    # edges: 01, 02, 12 with endpoints
    d = IntMatrix(3, 3, [[-1, 1, 0], [-1, 0, 1], [0, -1, 1]])
    return d


def test_cohomology_trivial_differentials():
    g = cohomology_group(IntMatrix.zero(2, 0), IntMatrix.zero(0, 2), Z)
    assert g.invariants() == (2, ())


def test_cohomology_s1_degree1():
    d0 = s1_coboundary()
    d_out = IntMatrix.zero(0, 3)
    g = cohomology_group(d0, d_out, Z)
    assert g.invariants() == (1, ())  # H^1(S^1) = Z


def test_cohomology_z2():
    g = cohomology_group(IntMatrix(1, 1, [[2]]), IntMatrix.zero(0, 1), Z)
    assert g.invariants() == (0, (2,))


def test_cohomology_composition_check():
    d_in = IntMatrix(2, 1, [[1], [0]])
    d_out = IntMatrix(1, 2, [[1, 0]])
    with pytest.raises(CompositionNonzero):
        cohomology_group(d_in, d_out, Z)


def test_cohomology_qmodz_rejected():
    with pytest.raises(ValueError):
        cohomology_group(IntMatrix.zero(1, 0), IntMatrix.zero(0, 1),
                         Coefficients.rationals_mod_one())


def test_reduce_class_z2():
    g = cohomology_group(IntMatrix(1, 1, [[2]]), IntMatrix.zero(0, 1), Z)
    assert reduce_class(g, [0]).is_zero()
    assert reduce_class(g, [1]).torsion == [1]
    assert reduce_class(g, [3]).torsion == [1]
    assert reduce_class(g, [4]).is_zero()


def test_reduce_class_coboundary():
    d0 = s1_coboundary()
    g = cohomology_group(d0, IntMatrix.zero(0, 3), Z)
    f = [3, -1, 7]
    cob = d0.apply(f)
    assert reduce_class(g, cob).is_zero()
    # generator lift reduces to a generator coordinate
    lift = g.basis_lift
    gen = [lift[(i, 0)] for i in range(3)]
    cls = reduce_class(g, gen)
    assert cls.free == [1]


def test_reduce_class_not_cocycle():
    # middle space C^1 of the 3-cycle, d_out = transpose-style map to C^2 = 0?
    # use d_out = the coboundary C^1 -> C^2 of the full 2-simplex
    d1 = IntMatrix(1, 3, [[1, -1, 1]])  # triangle boundary relation
    d_in = IntMatrix(3, 0, [[], [], []])
    g = cohomology_group(d_in, d1, Z)
    assert g.invariants() == (2, ())
    with pytest.raises(NotACocycle):
        reduce_class(g, [1, 0, 0])


def test_cohomology_permutation_invariance():
    rng = random.Random(7)
    for _ in range(20):
        m, n, p = 3, 4, 3
        din = [[rng.randint(-2, 2) for _ in range(p)] for _ in range(n)]
        # build d_out with d_out * d_in = 0: take d_out = rows orthogonal by
        # construction -- use zero map for simplicity plus permuted variants
        M_in = IntMatrix(n, p, din)
        g1 = cohomology_group(M_in, IntMatrix.zero(0, n), Z)
        rows = list(range(n))
        cols = list(range(p))
        rng.shuffle(rows)
        rng.shuffle(cols)
        din2 = [[din[i][j] for j in cols] for i in rows]
        g2 = cohomology_group(IntMatrix(n, p, din2), IntMatrix.zero(0, n), Z)
        assert g1.invariants() == g2.invariants()


def test_cyclic_cohomology_mod2():
    # Z --2--> Z: H with Z/2 coefficients of the middle term: kernel of
    # (0 map) mod 2 over im(2) + 2Z = Z/2... use RP^2-style block instead:
    # C: Z -2-> Z -0-> 0 gives H(Z/2) = Z/2 at the middle
    g = cohomology_group(IntMatrix(1, 1, [[2]]), IntMatrix.zero(0, 1),
                         Coefficients.cyclic(2))
    assert g.invariants() == (0, (2,))
    # and the mod-2 kernel enlarges where Z sees none: Z -1-> Z has H(Z/2)=0
    g2 = cohomology_group(IntMatrix(1, 1, [[1]]), IntMatrix.zero(0, 1),
                          Coefficients.cyclic(2))
    assert g2.is_trivial()


def test_cyclic_cohomology_with_d_out():
    # middle Z^1, d_out = multiplication by 2 into Z^1: mod-2 kernel is all,
    # im(d_in) = 0: H(Z/2) = Z/2
    g = cohomology_group(IntMatrix.zero(1, 0), IntMatrix(1, 1, [[2]]),
                         Coefficients.cyclic(2))
    assert g.invariants() == (0, (2,))
    cls = reduce_class(g, [1])
    assert cls.torsion == [1]
    assert reduce_class(g, [2]).is_zero()


def test_integer_kernel_basis():
    M = IntMatrix(2, 3, [[1, 1, 1], [0, 2, 2]])
    basis = integer_kernel_basis(2, 3, M.entries_dict())
    assert len(basis) == 1
    v = [basis[0].get(j, 0) for j in range(3)]
    assert M.apply(v) == [0, 0]
    assert gcd(gcd(v[0], v[1]), v[2]) == 1


def test_group_element_canonical():
    A3 = Coefficients.cyclic(3)
    assert GroupElement(A3, 5).value == 2
    Q = Coefficients.rationals_mod_one()
    assert GroupElement(Q, Fraction(7, 3)).value == Fraction(1, 3)
    assert GroupElement(Q, Fraction(-1, 4)).value == Fraction(3, 4)


def test_subgroup_and_quotient_presentations():
    amb = FgAbelianGroup(2, [4])
    # subgroup generated by (2,0;2) and (0,0;2) inside Z^2 + Z/4
    g1 = CohomologyClass(amb, [2, 0], [2])
    g2 = CohomologyClass(amb, [0, 0], [2])
    sub = subgroup_presentation(amb, [g1, g2])
    assert sub.invariants() == (1, (2,))
    quo, red = quotient_presentation(amb, [g1, g2])
    # quotient: Z^2+Z/4 mod <(2,0,2),(0,0,2)> = Z + Z/2 + Z/2
    assert quo.invariants() == (1, (2, 2))
    assert red(g1).is_zero()
    assert not red(CohomologyClass(amb, [1, 0], [0])).is_zero()
