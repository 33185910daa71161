"""Exact rational linear algebra for the oracle layer.

Everything here is exact: integer determinants via fraction-free (Bareiss)
elimination and dense Gaussian elimination over ``fractions.Fraction``.
No floating point enters this module.
"""

from fractions import Fraction


def bareiss_det(rows):
    """Determinant of a square integer matrix, exactly.

    ``rows`` is a list of lists of Python ints; it is consumed (mutated).
    Uses fraction-free elimination so all intermediate values stay integral.
    """
    n = len(rows)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if rows[k][k] == 0:
            for i in range(k + 1, n):
                if rows[i][k] != 0:
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = rows[k][k]
        for i in range(k + 1, n):
            rik = rows[i][k]
            row_i = rows[i]
            row_k = rows[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - rik * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * rows[n - 1][n - 1]


def solve_linear_system(a_rows, b):
    """Solve A x = b exactly over the rationals.

    ``a_rows`` is a list of lists (any numeric; coerced to Fraction) and is
    consumed.  Raises ``ZeroDivisionError`` if A is singular.
    """
    n = len(a_rows)
    rows = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a_rows, b)]
    for k in range(n):
        piv = None
        for i in range(k, n):
            if rows[i][k] != 0:
                piv = i
                break
        if piv is None:
            raise ZeroDivisionError("singular system")
        if piv != k:
            rows[k], rows[piv] = rows[piv], rows[k]
        pk = rows[k][k]
        for i in range(k + 1, n):
            f = rows[i][k]
            if f == 0:
                continue
            ratio = f / pk
            ri, rk = rows[i], rows[k]
            for j in range(k, n + 1):
                ri[j] -= ratio * rk[j]
    x = [Fraction(0)] * n
    for k in range(n - 1, -1, -1):
        s = rows[k][n]
        rk = rows[k]
        for j in range(k + 1, n):
            s -= rk[j] * x[j]
        x[k] = s / rk[k]
    return x
