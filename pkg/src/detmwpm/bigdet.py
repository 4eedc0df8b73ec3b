"""Exact integer matrices and division-free determinants.

``det_berkowitz`` follows the Samuelson-Berkowitz construction: for each
leading position t the trailing block of the matrix is split into the scalar
A_tt, the row R_t, the column S_t, and the block M_t; the lower-triangular
Toeplitz factor C_t is generated by the column (-1, A_tt, R_t M_t^j S_t for
j = 0..), with the powers of M_t obtained by repeated squaring; the
characteristic-polynomial coefficient vector is the product C_1 C_2 ... C_N,
taken here as a balanced tree.  Each factor build and each tree node is
independent of the others, and the result does not depend on evaluation
order.  The determinant is the last coefficient (the characteristic
polynomial evaluated at 0).

Entries are exact signed integers of unbounded size (gmpy2 when available,
falling back to Python ints).
"""
from __future__ import annotations

import math
from typing import Sequence

try:
    from gmpy2 import mpz as _int
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _int = int

NAIVE_MAX_DIM = 10


class BigMatrix:
    """Square matrix over exact signed integers, row-major."""

    __slots__ = ("n", "rows")

    def __init__(self, rows: Sequence[Sequence]):
        n = len(rows)
        if n < 1:
            raise ValueError("matrix dimension must be >= 1")
        conv = []
        for row in rows:
            if len(row) != n:
                raise ValueError("matrix must be square")
            conv.append([_int(x) for x in row])
        self.n = n
        self.rows = conv

    @classmethod
    def identity(cls, n: int) -> "BigMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n: int) -> "BigMatrix":
        return cls([[0] * n for _ in range(n)])

    def __getitem__(self, ij: tuple[int, int]):
        return self.rows[ij[0]][ij[1]]

    def __eq__(self, other) -> bool:
        return isinstance(other, BigMatrix) and self.rows == other.rows

    def __repr__(self) -> str:
        return f"BigMatrix({self.rows!r})"

    def shifted_diagonal(self, lam) -> "BigMatrix":
        """A - lam * I."""
        out = [row[:] for row in self.rows]
        for i in range(self.n):
            out[i][i] -= lam
        return BigMatrix(out)


def minor(a: BigMatrix, drop_row: int, drop_col: int) -> BigMatrix:
    """Submatrix with one row and one column removed."""
    if a.n < 2:
        raise ValueError("minor requires dimension >= 2")
    if not (0 <= drop_row < a.n and 0 <= drop_col < a.n):
        raise IndexError(f"minor indices out of range: {(drop_row, drop_col)}")
    return BigMatrix(
        [
            [x for j, x in enumerate(row) if j != drop_col]
            for i, row in enumerate(a.rows)
            if i != drop_row
        ]
    )


def det_naive(a: BigMatrix):
    """Laplace cofactor expansion (test oracle; refuses n > 10).

    Expansion proceeds along the topmost remaining row; subproblems are
    memoized on their column subset, keeping the oracle usable at n = 10.
    """
    if a.n > NAIVE_MAX_DIM:
        raise ValueError(f"det_naive refuses n > {NAIVE_MAX_DIM} (got {a.n})")
    rows = a.rows
    memo: dict[tuple[int, ...], object] = {}

    def rec(depth: int, cols: tuple[int, ...]):
        if len(cols) == 1:
            return rows[depth][cols[0]]
        got = memo.get(cols)
        if got is not None:
            return got
        total = _int(0)
        sign = 1
        for pos, c in enumerate(cols):
            x = rows[depth][c]
            if x:
                total += sign * x * rec(depth + 1, cols[:pos] + cols[pos + 1:])
            sign = -sign
        memo[cols] = total
        return total

    return rec(0, tuple(range(a.n)))


def _mat_mul(a, b):
    n, m, k = len(a), len(b[0]), len(b)
    out = [[_int(0)] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for x in range(k):
            v = ai[x]
            if v:
                bx = b[x]
                for j in range(m):
                    if bx[j]:
                        oi[j] += v * bx[j]
    return out


def _vec_mat(v, m):
    cols = len(m[0])
    out = [_int(0)] * cols
    for x, vx in enumerate(v):
        if vx:
            mx = m[x]
            for j in range(cols):
                if mx[j]:
                    out[j] += vx * mx[j]
    return out


def _toeplitz_column(rows, n: int, t: int) -> list:
    """First column of C_t: (-1, A_tt, R_t M_t^0 S_t, ..., R_t M_t^{n-1-t} S_t)."""
    a_tt = rows[t - 1][t - 1]
    col = [_int(-1), a_tt]
    top = n - 1 - t
    if top < 0:
        return col
    r = [rows[t - 1][j] for j in range(t, n)]
    s = [rows[i][t - 1] for i in range(t, n)]
    m = [[rows[i][j] for j in range(t, n)] for i in range(t, n)]
    powers = []  # M^(2^i) by repeated squaring, as many as needed
    if top >= 1:
        p = m
        powers.append(p)
        span = 1
        while 2 * span <= top:
            p = _mat_mul(p, p)
            powers.append(p)
            span *= 2
    for exp in range(top + 1):
        v = r
        bits, i = exp, 0
        while bits:
            if bits & 1:
                v = _vec_mat(v, powers[i])
            bits >>= 1
            i += 1
        col.append(sum((vx * sx for vx, sx in zip(v, s)), _int(0)))
    return col


def _conv_trunc(u: list, v: list, limit: int) -> list:
    out = [_int(0)] * min(limit, len(u) + len(v) - 1)
    for i, ui in enumerate(u):
        if ui:
            for j, vj in enumerate(v):
                if i + j >= limit:
                    break
                if vj:
                    out[i + j] += ui * vj
    return out


def characteristic_coefficients(a: BigMatrix) -> list:
    """Coefficients (p_0..p_N) with p(lam) = sum_n p_{N-n} lam^n = det(A - lam I)."""
    n = a.n
    rows = a.rows
    factors = [(t, _toeplitz_column(rows, n, t)) for t in range(1, n + 1)]
    # Balanced product tree over the Toeplitz factors.  Multiplying the
    # lower-trapezoidal C_a..C_b reduces to convolving their generating
    # columns, truncated to the product's column length n+2-a.
    while len(factors) > 1:
        nxt = []
        for i in range(0, len(factors) - 1, 2):
            (ta, ca), (_, cb) = factors[i], factors[i + 1]
            nxt.append((ta, _conv_trunc(ca, cb, n + 2 - ta)))
        if len(factors) % 2:
            nxt.append(factors[-1])
        factors = nxt
    return factors[0][1]


def det_berkowitz(a: BigMatrix):
    """Exact determinant, division-free (Samuelson-Berkowitz)."""
    return characteristic_coefficients(a)[-1]


def evaluate_charpoly(coeffs: Sequence, lam):
    """p(lam) for a coefficient vector in p_{N-n} indexing."""
    n = len(coeffs) - 1
    acc = _int(0)
    for k in range(n + 1):
        acc += _int(coeffs[n - k]) * _int(lam) ** k
    return acc


def v2(x) -> int:
    """2-adic valuation of a nonzero integer."""
    x = int(x)
    if x == 0:
        raise ValueError("v2(0) is undefined")
    return (x & -x).bit_length() - 1


def isqrt_exact(x):
    """Integer square root if x is a perfect square, else None."""
    x = int(x)
    if x < 0:
        return None
    r = math.isqrt(x)
    return r if r * r == x else None
