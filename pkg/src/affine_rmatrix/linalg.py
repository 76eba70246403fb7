"""Dense exact linear algebra over a field given by its elements.

Matrices are lists of rows. Entries may be RatQ, CycloValue or Fraction;
anything with field operations and truthiness meaning "nonzero".
"""
from __future__ import annotations

from typing import Callable, Sequence

from .qfield import ONE

Matrix = list


class Singular(ArithmeticError):
    pass


def zeros(rows: int, cols: int, zero=None) -> Matrix:
    z = ONE - ONE if zero is None else zero
    return [[z] * cols for _ in range(rows)]


def identity(n: int, one=ONE) -> Matrix:
    z = one - one
    return [[one if i == j else z for j in range(n)] for i in range(n)]


def matmul(a: Matrix, b: Matrix, zero=None) -> Matrix:
    if not a:
        return []
    inner = len(b)
    cols = len(b[0]) if b else 0
    if zero is None:
        zero = _zero_of(a, b)
    out = []
    for row in a:
        acc = [zero] * cols
        for k in range(inner):
            x = row[k]
            if not x:
                continue
            bk = b[k]
            for j in range(cols):
                y = bk[j]
                if y:
                    acc[j] = acc[j] + x * y
        out.append(acc)
    return out


def _zero_of(*mats):
    for m in mats:
        for row in m:
            for x in row:
                return x - x
    return ONE - ONE


def add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def sub(a: Matrix, b: Matrix) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c, a: Matrix) -> Matrix:
    return [[c * x if x else x for x in row] for row in a]


def apply(f: Callable, a: Matrix) -> Matrix:
    return [[f(x) for x in row] for row in a]


def kron(a: Matrix, b: Matrix) -> Matrix:
    ra, ca = len(a), len(a[0]) if a else 0
    rb, cb = len(b), len(b[0]) if b else 0
    zero = _zero_of(a, b)
    out = [[zero] * (ca * cb) for _ in range(ra * rb)]
    for i in range(ra):
        for j in range(ca):
            x = a[i][j]
            if not x:
                continue
            for k in range(rb):
                row = out[i * rb + k]
                bk = b[k]
                for l in range(cb):
                    y = bk[l]
                    if y:
                        row[j * cb + l] = x * y
    return out


def is_zero(a: Matrix) -> bool:
    return not any(x for row in a for x in row)


def equal(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(
        len(ra) == len(rb) and all(x == y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def rref(rows: Sequence[Sequence], col_order: Sequence[int] | None = None):
    """Reduced row echelon form; pivots are searched in ``col_order``.

    Returns (reduced nonzero rows, pivot columns) with each pivot normalised to 1.
    """
    m = [list(r) for r in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    order = list(range(ncols)) if col_order is None else list(col_order)
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == len(m):
            break
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][c].inverse() if hasattr(m[r][c], "inverse") else 1 / m[r][c]
        m[r] = [x * inv if x else x for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                ri = m[r]
                m[i] = [x - f * y if y else x for x, y in zip(m[i], ri)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def inverse(a: Matrix, one=None) -> Matrix:
    n = len(a)
    if one is None:
        one = a[0][0] - a[0][0] + 1 if n else ONE
    zero = one - one
    aug = [list(row) + [one if i == j else zero for j in range(n)] for i, row in enumerate(a)]
    red, piv = rref(aug, col_order=range(n))
    if piv != list(range(n)):
        raise Singular("matrix is singular")
    return [row[n:] for row in red]


def solve_left(a: Matrix, b: Matrix):
    """Solve X a = b for X (rows of b are combinations of rows of a).

    Returns (X, consistent, unique). When not unique, free coordinates are 0.
    """
    # transpose: a^T X^T = b^T
    return solve(transpose(a), transpose(b), transpose_result=True)


def solve(a: Matrix, b: Matrix, transpose_result: bool = False):
    """Solve a X = b. Returns (X, consistent, unique)."""
    n_rows = len(a)
    n_unknown = len(a[0]) if a else 0
    n_rhs = len(b[0]) if b else 0
    zero = _zero_of(a, b)
    aug = [list(a[i]) + list(b[i]) for i in range(n_rows)]
    red, piv = rref(aug, col_order=range(n_unknown))
    consistent = all(
        not any(row[n_unknown:]) for row in red if not any(row[:n_unknown])
    )
    unique = len(piv) == n_unknown
    x = [[zero] * n_rhs for _ in range(n_unknown)]
    for row, c in zip(red, piv):
        x[c] = row[n_unknown:]
    if transpose_result:
        x = transpose(x) if x else [[] for _ in range(n_rhs)]
    return x, consistent, unique
