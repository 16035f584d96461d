"""Exact integer matrix arithmetic: Smith and Hermite normal forms, lattices.

Matrices are lists of rows of Python ints, so nothing here can overflow.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple

from .errors import INFINITE

Matrix = List[List[int]]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def zeros(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


def transpose(A: Sequence[Sequence[int]], ncols: Optional[int] = None) -> Matrix:
    if not A:
        return [[] for _ in range(ncols or 0)]
    return [list(col) for col in zip(*A)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> Matrix:
    if not A:
        return []
    inner = len(B)
    cols = len(B[0]) if B else 0
    return [[sum(row[k] * B[k][j] for k in range(inner)) for j in range(cols)] for row in A]


def matvec(A: Sequence[Sequence[int]], v: Sequence[int]) -> List[int]:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def vecmat(v: Sequence[int], A: Sequence[Sequence[int]], ncols: Optional[int] = None) -> List[int]:
    cols = len(A[0]) if A else (ncols or 0)
    out = [0] * cols
    for x, row in zip(v, A):
        if x:
            for j, a in enumerate(row):
                out[j] += x * a
    return out


def determinant(A: Sequence[Sequence[int]]) -> int:
    """Fraction-free (Bareiss) determinant."""
    n = len(A)
    if n == 0:
        return 1
    M = [list(r) for r in A]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def _smallest_nonzero(A: Matrix, t: int) -> Optional[Tuple[int, int]]:
    best = None
    for i in range(t, len(A)):
        row = A[i]
        for j in range(t, len(row)):
            a = row[j]
            if a and (best is None or abs(a) < best[0]):
                best = (abs(a), i, j)
    return None if best is None else (best[1], best[2])


def smith_normal_form(R: Sequence[Sequence[int]], ncols: Optional[int] = None) -> Tuple[Matrix, Matrix, Matrix]:
    """Return (D, U, V) with D = U*R*V diagonal, U and V unimodular.

    The diagonal entries are non-negative and satisfy d1 | d2 | ... .
    Pivots are chosen as the entry of smallest absolute value, ties broken
    by row then column.  ``ncols`` is needed only when ``R`` has no rows.
    """
    m = len(R)
    n = len(R[0]) if m else (ncols or 0)
    A = [list(r) for r in R]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for M in (A, V):
            for row in M:
                row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):
        # row[dst] += q * row[src]
        for M in (A, U):
            rd, rs = M[dst], M[src]
            for k in range(len(rd)):
                rd[k] += q * rs[k]

    def add_col(dst, src, q):
        for M in (A, V):
            for row in M:
                row[dst] += q * row[src]

    for t in range(min(m, n)):
        pos = _smallest_nonzero(A, t)
        if pos is None:
            break
        swap_rows(t, pos[0])
        swap_cols(t, pos[1])
        while True:
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(i, t, -(A[i][t] // A[t][t]))
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(j, t, -(A[t][j] // A[t][t]))
            # remainders left in row/column t: move the smallest onto the pivot
            cand = [(abs(A[i][t]), 0, i) for i in range(t + 1, m) if A[i][t]]
            cand += [(abs(A[t][j]), 1, j) for j in range(t + 1, n) if A[t][j]]
            if cand:
                _, kind, idx = min(cand)
                if kind == 0:
                    swap_rows(t, idx)
                else:
                    swap_cols(t, idx)
                continue
            p = A[t][t]
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            add_row(t, bad, 1)
        if A[t][t] < 0:
            for M in (A, U):
                M[t] = [-x for x in M[t]]
    return A, U, V


def diagonal(D: Matrix) -> List[int]:
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0))]


def invariant_factors(R: Sequence[Sequence[int]], ncols: Optional[int] = None) -> List[int]:
    """Nonzero diagonal of the Smith form (including 1s)."""
    D, _, _ = smith_normal_form(R, ncols)
    return [d for d in diagonal(D) if d]


def rank(R: Sequence[Sequence[int]], ncols: Optional[int] = None) -> int:
    return len(invariant_factors(R, ncols))


def abelian_invariants(R: Sequence[Sequence[int]], ngens: int) -> Tuple[int, List[int]]:
    """(free rank, torsion coefficients) of Z^ngens / rowspace(R)."""
    if not R:
        return ngens, []
    factors = invariant_factors(R, ngens)
    return ngens - len(factors), [d for d in factors if d > 1]


def hermite_rows(rows: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Row-style Hermite normal form of the lattice spanned by ``rows``.

    Output rows are a basis in echelon form with positive pivots and the
    entries above each pivot reduced into [0, pivot).  Two generating sets
    span the same lattice iff their Hermite forms coincide.
    """
    A = [list(r) for r in rows if any(r)]
    r = 0
    for col in range(ncols):
        while True:
            nz = [i for i in range(r, len(A)) if A[i][col]]
            if not nz:
                break
            piv = min(nz, key=lambda i: (abs(A[i][col]), i))
            A[r], A[piv] = A[piv], A[r]
            others = [i for i in range(r + 1, len(A)) if A[i][col]]
            if not others:
                break
            for i in others:
                q = A[i][col] // A[r][col]
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
        if r >= len(A) or A[r][col] == 0:
            continue
        if A[r][col] < 0:
            A[r] = [-x for x in A[r]]
        for i in range(r):
            q = A[i][col] // A[r][col]
            if q:
                A[i] = [x - q * y for x, y in zip(A[i], A[r])]
        r += 1
        A = A[:r] + [row for row in A[r:] if any(row)]
    return A[:r]


def solve_left(B: Sequence[Sequence[int]], v: Sequence[int], ncols: Optional[int] = None) -> Optional[List[int]]:
    """Integer row vector x with x*B = v, or None if v is not in the row lattice."""
    m = len(B)
    n = len(B[0]) if m else (ncols if ncols is not None else len(v))
    if m == 0:
        return [] if not any(v) else None
    D, U, V = smith_normal_form(B)
    w = vecmat(v, V, n)
    y = [0] * m
    for i in range(n):
        d = D[i][i] if i < m else 0
        if d == 0:
            if w[i]:
                return None
        elif w[i] % d:
            return None
        else:
            y[i] = w[i] // d
    return vecmat(y, U, m)


def in_row_lattice(B: Sequence[Sequence[int]], v: Sequence[int]) -> bool:
    return solve_left(B, v, len(v)) is not None


def solve_right(A: Sequence[Sequence[int]], b: Sequence[int], ncols: int) -> Optional[List[int]]:
    """Integer column vector x with A*x = b."""
    if not A:
        return [0] * ncols if not any(b) else None
    return solve_left(transpose(A), b, len(A))


def left_kernel(B: Sequence[Sequence[int]], ncols: Optional[int] = None) -> Matrix:
    """Basis of {x in Z^m : x*B = 0} (rows)."""
    m = len(B)
    if m == 0:
        return []
    D, U, _ = smith_normal_form(B, ncols)
    r = sum(1 for d in diagonal(D) if d)
    return [list(U[i]) for i in range(r, m)]


def right_kernel(A: Sequence[Sequence[int]], ncols: int) -> Matrix:
    """Basis of {x in Z^n : A*x = 0}, returned as rows."""
    if not A:
        return identity(ncols)
    D, _, V = smith_normal_form(A, ncols)
    r = sum(1 for d in diagonal(D) if d)
    return [[V[i][j] for i in range(ncols)] for j in range(r, ncols)]


def lattice_index(rows: Sequence[Sequence[int]], n: int):
    """[Z^n : span(rows)] as an int, or INFINITE."""
    if n == 0:
        return 1
    factors = invariant_factors(rows, n) if rows else []
    if len(factors) < n:
        return INFINITE
    out = 1
    for d in factors:
        out *= d
    return out


def preimage_lattice(C: Sequence[Sequence[int]], relations: Sequence[Sequence[int]], n: int) -> Matrix:
    """Basis (Hermite form) of {x in Z^n : C*x in rowspace(relations)}.

    ``C`` is d x n, ``relations`` is r x d.
    """
    d = len(C)
    if d == 0:
        return identity(n)
    # x*C^T - y*R = 0  <=>  rows [C^T ; -R] in the left kernel
    stacked = transpose(C) + [[-a for a in row] for row in relations]
    ker = left_kernel(stacked, d)
    return hermite_rows([row[:n] for row in ker], n)


def rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank over Q by exact Gaussian elimination."""
    A = [[Fraction(x) for x in r] for r in rows if any(r)]
    if not A:
        return 0
    ncols = len(A[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                f = A[i][c] / A[r][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        r += 1
        if r == len(A):
            break
    return r


def vector_gcd(v: Sequence[int]) -> int:
    g = 0
    for x in v:
        g = gcd(g, x)
    return g
