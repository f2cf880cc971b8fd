"""Exact and numeric linear algebra kernels.

Exact ranks and determinants use fraction-free (Bareiss) elimination over the
integers; rows with fractional entries are rescaled first, which changes
neither rank nor the vanishing of determinants.  Float ranks use the SVD with
a relative threshold.  Mod-p elimination (vectorised over numpy int64) backs
the sampling probe, where dense rational elimination would be too slow.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

Scalar = int | Fraction


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _integer_rows(rows) -> tuple[list[list[int]], list[int]]:
    """Rescale each row to integers; returns (rows, row multipliers)."""
    out = []
    mults = []
    for row in rows:
        m = 1
        for x in row:
            if isinstance(x, Fraction):
                m = _lcm(m, x.denominator)
        out.append([int(x * m) if m != 1 else int(x) for x in row])
        mults.append(m)
    return out, mults


def integer_rank(rows, max_rank: int | None = None) -> int:
    """Rank by fraction-free elimination with column pivoting.

    If ``max_rank`` is given, stops as soon as the rank exceeds it (the
    returned value is then ``max_rank + 1``).
    """
    if not rows or not rows[0]:
        return 0
    m, _ = _integer_rows(rows)
    nr, nc = len(m), len(m[0])
    prev = 1
    row = 0
    for col in range(nc):
        piv = None
        for r in range(row, nr):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            continue
        if piv != row:
            m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        for r in range(row + 1, nr):
            v = m[r][col]
            mr, mrow = m[r], m[row]
            for c in range(col + 1, nc):
                mr[c] = (pv * mr[c] - v * mrow[c]) // prev
            mr[col] = 0
        prev = pv
        row += 1
        if row == nr or (max_rank is not None and row > max_rank):
            break
    return row


def rank_with_pivots(rows) -> tuple[int, list[int], list[int]]:
    """Rank plus the original row indices and columns of the pivots.

    The submatrix at (pivot rows) x (pivot columns) of the *original* matrix
    is invertible; it serves as a violation witness.
    """
    if not rows or not rows[0]:
        return 0, [], []
    m, _ = _integer_rows(rows)
    nr, nc = len(m), len(m[0])
    orig = list(range(nr))
    prev = 1
    row = 0
    piv_cols: list[int] = []
    for col in range(nc):
        piv = None
        for r in range(row, nr):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            continue
        if piv != row:
            m[row], m[piv] = m[piv], m[row]
            orig[row], orig[piv] = orig[piv], orig[row]
        pv = m[row][col]
        for r in range(row + 1, nr):
            v = m[r][col]
            mr, mrow = m[r], m[row]
            for c in range(col + 1, nc):
                mr[c] = (pv * mr[c] - v * mrow[c]) // prev
            mr[col] = 0
        prev = pv
        piv_cols.append(col)
        row += 1
        if row == nr:
            break
    return row, orig[:row], piv_cols


def exact_det(rows) -> Scalar:
    """Determinant of a square matrix of ints/Fractions (Bareiss)."""
    n = len(rows)
    if n == 0:
        return 1
    if any(len(r) != n for r in rows):
        raise ValueError("determinant of a non-square matrix")
    m, mults = _integer_rows(rows)
    sign = 1
    prev = 1
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        pv = m[col][col]
        for r in range(col + 1, n):
            v = m[r][col]
            mr, mrow = m[r], m[col]
            for c in range(col + 1, n):
                mr[c] = (pv * mr[c] - v * mrow[c]) // prev
            mr[col] = 0
        prev = pv
    det = sign * m[n - 1][n - 1]
    scale = 1
    for mu in mults:
        scale *= mu
    if scale == 1:
        return det
    return Fraction(det, scale)


def adjugate(rows) -> list[list[Scalar]]:
    """Adjugate (transposed cofactor matrix) of a small square matrix."""
    n = len(rows)
    if n == 1:
        one = 1 if isinstance(rows[0][0], int) else Fraction(1)
        return [[one]]
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [
                [rows[r][c] for c in range(n) if c != j]
                for r in range(n)
                if r != i
            ]
            adj[j][i] = (-1) ** (i + j) * exact_det(minor)
    return adj


def mat_mul(a, b):
    nr, ni, nc = len(a), len(b), len(b[0])
    assert len(a[0]) == ni
    return [
        [sum(a[r][t] * b[t][c] for t in range(ni)) for c in range(nc)]
        for r in range(nr)
    ]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def exact_nullspace(rows) -> list[list[Fraction]]:
    """Basis of the right nullspace over the rationals (RREF)."""
    if not rows:
        return []
    nc = len(rows[0])
    m = [[Fraction(x) for x in row] for row in rows]
    nr = len(m)
    piv_of_col: dict[int, int] = {}
    row = 0
    for col in range(nc):
        piv = None
        for r in range(row, nr):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        m[row] = [x / pv for x in m[row]]
        for r in range(nr):
            if r != row and m[r][col]:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[row])]
        piv_of_col[col] = row
        row += 1
        if row == nr:
            break
    basis = []
    free_cols = [c for c in range(nc) if c not in piv_of_col]
    for fc in free_cols:
        vec = [Fraction(0)] * nc
        vec[fc] = Fraction(1)
        for col, r in piv_of_col.items():
            vec[col] = -m[r][fc]
        basis.append(vec)
    return basis


def float_rank(matrix: np.ndarray, tol: float = 1e-9) -> int:
    """Count of singular values above tol * max(rows, cols) * sigma_max."""
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    thresh = tol * max(matrix.shape) * s[0]
    return int(np.sum(s > thresh))


def modp_rank(a: np.ndarray, p: int) -> int:
    """Rank of an integer matrix over GF(p), p an odd prime below 2^31."""
    m = np.ascontiguousarray(a, dtype=np.int64) % p
    nr, nc = m.shape
    row = 0
    for col in range(nc):
        if row == nr:
            break
        nz = np.nonzero(m[row:, col])[0]
        if nz.size == 0:
            continue
        piv = row + int(nz[0])
        if piv != row:
            m[[row, piv]] = m[[piv, row]]
        inv = pow(int(m[row, col]), p - 2, p)
        m[row, col:] = (m[row, col:] * inv) % p
        below = m[row + 1 :, col]
        mask = below != 0
        if mask.any():
            block = m[row + 1 :, col:]
            block[mask] = (block[mask] - np.outer(below[mask], m[row, col:])) % p
        row += 1
    return row


def is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True
