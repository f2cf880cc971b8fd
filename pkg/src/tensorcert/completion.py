"""Exact completion of a bounded-flattening-rank tensor from boundary data.

The boundary of an order-q tensor relative to a prefix length p consists of
the coordinates x_w whose support has at most one position beyond p: an
order-p base block plus one slab per extra position.  When a k x k pivot
minor supported in a partition I, J of the prefix is invertible, every
remaining coordinate is determined: adjoining the unknown's row/column word
to the pivot yields a (k+1) x (k+1) minor that must vanish, and the unknown
is the unique value achieving that.  Completion proceeds by induction on
the number of support positions beyond the prefix.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from math import prod

from . import linalg
from .polynomials import MinorSpec, SparsePoly, minor_poly
from .tensor import (
    RATIONAL,
    Scalar,
    Tensor,
    format_scalar,
    matrix_rows,
    parse_scalar,
    row_major_offset,
)
from .words import Word, word, word_sum


class ZeroPivotError(ValueError):
    """The pivot minor vanishes on the given data (point outside the chart)."""

    def __init__(self, at: Word | None = None):
        self.at = at
        where = f" while completing x_{at.to_text()}" if at is not None else ""
        super().__init__(f"pivot minor evaluates to zero{where}")


@dataclass(frozen=True)
class Pivot:
    """A k x k minor x[rows; cols] with rows supported in I and columns in
    the complementary part J of the prefix 1..p."""

    rows: tuple[Word, ...]
    cols: tuple[Word, ...]
    part_i: tuple[int, ...]
    p: int

    def __post_init__(self):
        if len(self.rows) != len(self.cols):
            raise ValueError("pivot must be square")
        MinorSpec(self.rows, self.cols)  # distinctness + disjoint supports
        I = set(self.part_i)
        if not I <= set(range(1, self.p + 1)):
            raise ValueError("partition must sit inside the prefix")
        J = set(range(1, self.p + 1)) - I
        for w in self.rows:
            if not set(w.support()) <= I:
                raise ValueError("pivot row word escapes part I")
        for w in self.cols:
            if not set(w.support()) <= J:
                raise ValueError("pivot column word escapes part J")

    @property
    def k(self) -> int:
        return len(self.rows)

    def to_json(self) -> dict:
        return {
            "rows": [w.to_pairs() for w in self.rows],
            "cols": [w.to_pairs() for w in self.cols],
            "I": list(self.part_i),
            "p": self.p,
        }


def pivot_from_json(data: dict, n: int) -> Pivot:
    return Pivot(
        tuple(word(n, pairs) for pairs in data["rows"]),
        tuple(word(n, pairs) for pairs in data["cols"]),
        tuple(int(i) for i in data["I"]),
        int(data["p"]),
    )


@dataclass(frozen=True)
class BoundaryData:
    """Base block (words supported in the prefix) plus one slab per position
    p+1..q; slab t holds the coordinates with support in [p] + {t}.  Each
    slab carries its own copy of the base words, so inconsistent inputs are
    representable and detectable."""

    p: int
    n: int
    q: int
    base: Tensor
    slabs: tuple[Tensor, ...]

    def __post_init__(self):
        if self.q < self.p:
            raise ValueError("target order must be >= prefix length")
        if self.base.dims != (self.n,) * self.p:
            raise ValueError("base block has wrong shape")
        if len(self.slabs) != self.q - self.p:
            raise ValueError("need one slab per position past the prefix")
        for slab in self.slabs:
            if slab.dims != (self.n,) * (self.p + 1):
                raise ValueError("slab has wrong shape")

    def value(self, w: Word) -> Scalar:
        beyond = [pos for pos in w.support() if pos > self.p]
        if len(beyond) > 1 or w.max_support > self.q:
            raise KeyError(f"x_{w.to_text()} is not a boundary coordinate")
        prefix = tuple(w.at(j) for j in range(1, self.p + 1))
        if not beyond:
            return self.base[prefix]
        t = beyond[0]
        return self.slabs[t - self.p - 1][prefix + (w.at(t),)]

    def to_json(self) -> dict:
        values = []
        for idx in self.base.indices():
            w = word(self.n, ((j + 1, s) for j, s in enumerate(idx)))
            values.append([w.to_pairs(), format_scalar(self.base[idx], RATIONAL)])
        for t_off, slab in enumerate(self.slabs):
            t = self.p + 1 + t_off
            for idx in slab.indices():
                if idx[-1] == 0:
                    continue  # shared base words serialise once
                w = word(
                    self.n,
                    tuple((j + 1, s) for j, s in enumerate(idx[:-1])) + ((t, idx[-1]),),
                )
                values.append([w.to_pairs(), format_scalar(slab[idx], RATIONAL)])
        return {"p": self.p, "n": self.n, "q": self.q, "values": values}


def boundary_from_json(data: dict) -> BoundaryData:
    p, n, q = int(data["p"]), int(data["n"]), int(data["q"])
    base_entries = [0] * n**p
    slab_entries = [[0] * n ** (p + 1) for _ in range(q - p)]
    stored: dict[Word, Scalar] = {}
    for pairs, val in data["values"]:
        stored[word(n, pairs)] = parse_scalar(val, RATIONAL)
    for idx in product(range(n), repeat=p):
        w = word(n, ((j + 1, s) for j, s in enumerate(idx)))
        v = stored.get(w, 0)
        base_entries[row_major_offset((n,) * p, idx)] = v
        for t in range(q - p):
            slab_entries[t][row_major_offset((n,) * (p + 1), idx + (0,))] = v
    for t in range(q - p):
        for idx in product(range(n), repeat=p):
            for s in range(1, n):
                w = word(
                    n,
                    tuple((j + 1, sym) for j, sym in enumerate(idx))
                    + ((p + 1 + t, s),),
                )
                if w in stored:
                    slab_entries[t][
                        row_major_offset((n,) * (p + 1), idx + (s,))
                    ] = stored[w]
    base = Tensor((n,) * p, tuple(base_entries))
    slabs = tuple(
        Tensor((n,) * (p + 1), tuple(entries)) for entries in slab_entries
    )
    return BoundaryData(p, n, q, base, slabs)


def extract_boundary(t: Tensor, p: int) -> BoundaryData:
    """Boundary of a full order-q tensor: base = leading block, slab t =
    the block with zeros at every position past p except t."""
    q = t.order
    if not 0 < p <= q:
        raise ValueError("prefix length out of range")
    dims = set(t.dims)
    if len(dims) != 1:
        raise ValueError("boundary extraction needs uniform mode sizes")
    n = t.dims[0]
    base_entries = []
    for idx in product(range(n), repeat=p):
        base_entries.append(t[idx + (0,) * (q - p)])
    base = Tensor((n,) * p, tuple(base_entries), t.field)
    slabs = []
    for pos in range(p + 1, q + 1):
        entries = []
        for idx in product(range(n), repeat=p + 1):
            full = list(idx[:p]) + [0] * (q - p)
            full[pos - 1] = idx[p]
            entries.append(t[tuple(full)])
        slabs.append(Tensor((n,) * (p + 1), tuple(entries), t.field))
    return BoundaryData(p, n, q, base, tuple(slabs))


def validate_boundary(b: BoundaryData) -> list[dict]:
    """Slab compatibility: every slab agrees with the base block on the
    shared words (those supported in the prefix)."""
    violations = []
    for t_off, slab in enumerate(b.slabs):
        t = b.p + 1 + t_off
        for idx in product(range(b.n), repeat=b.p):
            sv = slab[idx + (0,)]
            bv = b.base[idx]
            if sv != bv:
                w = word(b.n, ((j + 1, s) for j, s in enumerate(idx)))
                violations.append(
                    {
                        "slab": t,
                        "word": w.to_pairs(),
                        "slab_value": format_scalar(sv, RATIONAL),
                        "base_value": format_scalar(bv, RATIONAL),
                    }
                )
    return violations


# ---------------------------------------------------------------------------
# The completion map
# ---------------------------------------------------------------------------


def _decompose(w: Word, pivot: Pivot) -> tuple[Word, Word]:
    """Split w into a row word (supported in I plus the positions strictly
    between p and max supp) and a column word (J plus max supp itself)."""
    q_w = w.max_support
    I = set(pivot.part_i)
    row_pairs, col_pairs = [], []
    for pos, sym in w.chars:
        if pos == q_w or (pos <= pivot.p and pos not in I):
            col_pairs.append((pos, sym))
        else:
            row_pairs.append((pos, sym))
    return word(w.n, row_pairs), word(w.n, col_pairs)


def complete_entry(values, pivot: Pivot, w: Word) -> Scalar:
    """The unique value at w making the bordered (k+1) x (k+1) minor vanish.

    ``values`` must already hold every other entry of the bordered minor;
    a missing entry is a recursion-order bug and raises KeyError.
    """
    w_row, w_col = _decompose(w, pivot)
    rows = pivot.rows + (w_row,)
    cols = pivot.cols + (w_col,)
    k = pivot.k
    mat = []
    for i, wi in enumerate(rows):
        row = []
        for j, wj in enumerate(cols):
            if i == k and j == k:
                row.append(0)  # unknown corner
                continue
            key = word_sum(wi, wj)
            try:
                row.append(values[key])
            except KeyError:
                raise KeyError(
                    f"entry x_{key.to_text()} needed for x_{w.to_text()} is "
                    "missing (recursion order bug)"
                ) from None
        mat.append(row)
    piv_det = linalg.exact_det([r[:k] for r in mat[:k]])
    if piv_det == 0:
        raise ZeroPivotError(w)
    num = -linalg.exact_det(mat)
    val = Fraction(num, 1) / Fraction(piv_det, 1)
    return int(val) if val.denominator == 1 else val


def complete_entry_symbolic(pivot: Pivot, w: Word) -> tuple[SparsePoly, SparsePoly]:
    """The completed coordinate as a quotient of polynomials: returns
    (numerator, denominator) with x_w = numerator / denominator on the chart
    where the pivot minor is invertible."""
    w_row, w_col = _decompose(w, pivot)
    den = minor_poly(MinorSpec(pivot.rows, pivot.cols))
    full = minor_poly(MinorSpec(pivot.rows + (w_row,), pivot.cols + (w_col,)))
    num = den * SparsePoly.variable(w) - full
    return num, den


def complete_tensor(b: BoundaryData, pivot: Pivot, k: int) -> Tensor:
    """Fill every coordinate with support in 1..q from the boundary.

    Coordinates are completed in order of (positions beyond the prefix,
    max support, n-ary key); each step solves the bordered-minor equation.
    The result agrees with the boundary on all boundary words.
    """
    if k != pivot.k:
        raise ValueError(f"pivot is {pivot.k} x {pivot.k}, expected k = {k}")
    if pivot.p != b.p:
        raise ValueError("pivot and boundary prefix lengths differ")
    bad = validate_boundary(b)
    if bad:
        raise ValueError(f"incompatible boundary data: {len(bad)} violation(s)")
    n, p, q = b.n, b.p, b.q
    values: dict[Word, Scalar] = {}
    todo: list[Word] = []
    for idx in product(range(n), repeat=q):
        w = word(n, ((j + 1, s) for j, s in enumerate(idx)))
        beyond = sum(1 for pos in w.support() if pos > p)
        if beyond <= 1:
            values[w] = b.value(w)
        else:
            todo.append(w)
    todo.sort(
        key=lambda w: (
            sum(1 for pos in w.support() if pos > p),
            w.max_support,
            w.order_key,
        )
    )
    for w in todo:
        values[w] = complete_entry(values, pivot, w)
    entries = []
    for idx in product(range(n), repeat=q):
        w = word(n, ((j + 1, s) for j, s in enumerate(idx)))
        entries.append(values[w])
    return Tensor((n,) * q, tuple(entries))


# ---------------------------------------------------------------------------
# Membership of the flattening variety
# ---------------------------------------------------------------------------


def verify_on_variety(t: Tensor, k: int, exhaustive: bool = False):
    """Evaluate the (k+1) x (k+1) flattening minors of an exact tensor.

    Returns the list of nonzero minors as (bipartition, row indices, column
    indices, value); empty iff every flattening has rank <= k.  The default
    reports one witness per violating bipartition (rank computation);
    ``exhaustive`` evaluates every minor.
    """
    from .certify import bipartitions
    from .tensor import flatten

    if t.field != RATIONAL:
        raise ValueError("exact field required")
    found = []
    for I, J in bipartitions(t.order):
        mat = matrix_rows(flatten(t, I))
        nr, nc = len(mat), len(mat[0])
        if k + 1 > min(nr, nc):
            continue
        if exhaustive:
            for rows in combinations(range(nr), k + 1):
                for cols in combinations(range(nc), k + 1):
                    det = linalg.exact_det(
                        [[mat[r][c] for c in cols] for r in rows]
                    )
                    if det != 0:
                        found.append((I, rows, cols, det))
        else:
            rank, piv_rows, piv_cols = linalg.rank_with_pivots(mat)
            if rank > k:
                rows = tuple(sorted(piv_rows[: k + 1]))
                cols = tuple(piv_cols[: k + 1])
                det = linalg.exact_det([[mat[r][c] for c in cols] for r in rows])
                found.append((I, rows, cols, det))
    return found
