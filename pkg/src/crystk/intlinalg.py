"""Integer matrices: Smith normal form and the kernels/cokernels it gives."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

IntMatrix = list[list[int]]


def _identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def _copy(m: Sequence[Sequence[int]]) -> IntMatrix:
    return [[int(x) for x in row] for row in m]


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)] for i in range(len(a))]


class _Tracker:
    """Applies elementary operations to M while keeping U, V with U @ M_now @ V = M_orig."""

    def __init__(self, m: IntMatrix):
        self.m = m
        self.rows = len(m)
        self.cols = len(m[0]) if m else 0
        self.u = _identity(self.rows)  # M_orig = U @ M @ V
        self.v = _identity(self.cols)

    def swap_rows(self, i: int, j: int) -> None:
        if i == j:
            return
        self.m[i], self.m[j] = self.m[j], self.m[i]
        for row in self.u:
            row[i], row[j] = row[j], row[i]

    def swap_cols(self, i: int, j: int) -> None:
        if i == j:
            return
        for row in self.m:
            row[i], row[j] = row[j], row[i]
        self.v[i], self.v[j] = self.v[j], self.v[i]

    def add_row(self, src: int, dst: int, k: int) -> None:
        # row_dst += k * row_src; compensate U by column_src -= k * column_dst
        if k == 0:
            return
        self.m[dst] = [a + k * b for a, b in zip(self.m[dst], self.m[src])]
        for row in self.u:
            row[src] -= k * row[dst]

    def add_col(self, src: int, dst: int, k: int) -> None:
        # col_dst += k * col_src; compensate V by row_src -= k * row_dst
        if k == 0:
            return
        for row in self.m:
            row[dst] += k * row[src]
        self.v[src] = [a - k * b for a, b in zip(self.v[src], self.v[dst])]

    def negate_row(self, i: int) -> None:
        self.m[i] = [-x for x in self.m[i]]
        for row in self.u:
            row[i] = -row[i]


def smith_decomposition(m: Sequence[Sequence[int]]) -> tuple[IntMatrix, IntMatrix, IntMatrix]:
    """Return (U, D, V) with U @ D @ V == m, U and V unimodular, D diagonal with d1 | d2 | ..."""
    t = _Tracker(_copy(m))
    rows, cols = t.rows, t.cols
    for s in range(min(rows, cols)):
        while True:
            pivot = None
            for i in range(s, rows):
                for j in range(s, cols):
                    if t.m[i][j] != 0 and (pivot is None or abs(t.m[i][j]) < abs(t.m[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                return t.u, t.m, t.v
            t.swap_rows(s, pivot[0])
            t.swap_cols(s, pivot[1])
            p = t.m[s][s]
            clean = True
            for i in range(s + 1, rows):
                k = t.m[i][s] // p
                t.add_row(s, i, -k)
                if t.m[i][s] != 0:
                    clean = False
            for j in range(s + 1, cols):
                k = t.m[s][j] // p
                t.add_col(s, j, -k)
                if t.m[s][j] != 0:
                    clean = False
            if not clean:
                continue
            bad = next(
                (i for i in range(s + 1, rows) for j in range(s + 1, cols) if t.m[i][j] % p != 0),
                None,
            )
            if bad is None:
                break
            t.add_row(bad, s, 1)
        if t.m[s][s] < 0:
            t.negate_row(s)
    return t.u, t.m, t.v


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[int], int]:
    """Invariant factors (the nonzero diagonal entries, ascending by divisibility) and rank."""
    if not m or not m[0]:
        return [], 0
    _, d, _ = smith_decomposition(m)
    factors = [d[i][i] for i in range(min(len(d), len(d[0]))) if d[i][i] != 0]
    return factors, len(factors)


def integer_kernel(m: Sequence[Sequence[int]], ncols: int | None = None) -> IntMatrix:
    """Basis (as rows) of {x in Z^n : m @ x = 0}."""
    cols = ncols if ncols is not None else len(m[0])
    if not m:
        return _identity(cols)
    _, d, v = smith_decomposition(m)
    rank = sum(1 for i in range(min(len(d), cols)) if d[i][i] != 0)
    # m = U D V, so m x = 0 iff D (V x) = 0 iff (V x)_i = 0 for i < rank
    vinv = unimodular_inverse(v)
    return [[vinv[r][c] for r in range(cols)] for c in range(rank, cols)]


def unimodular_inverse(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Inverse of a unimodular integer matrix (exact Gauss-Jordan over Q)."""
    n = len(m)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise ValueError("matrix is singular")
        a[c], a[p] = a[p], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    out = [[a[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]
