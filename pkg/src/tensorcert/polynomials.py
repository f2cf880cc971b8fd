"""Sparse polynomials in word-indexed variables and the flattening minors.

A minor is named by a pair of word tuples (w, w'): the matrix x[w; w'] has
(i, j)-entry x_{w_i + w'_j} (disjoint-support sum), and its determinant is a
degree-l polynomial whose vanishing on all such minors with l = k+1 cuts out
the flattening variety.  The substitution monoid acts on polynomials through
its action on words; every minor of a fixed size lies in a single orbit,
reachable from the canonical word tuples.

This module also holds the two closed-form equation families used at desk
scale: the 2x2x2 hyperdeterminant with its rank classifier, and the
degree-3l equation of l x l x 3 tensors built from slice adjugates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations

from . import linalg
from .tensor import RATIONAL, Scalar, Tensor, coord
from .words import (
    SubsElement,
    Word,
    all_words_supported_in,
    canonical_minor_words,
    subs_act,
    table_orbit_witness,
    word_sum,
)

# A monomial maps words to positive exponents; stored as pairs sorted by the
# words' n-ary keys, so equal monomials have equal keys.
Monomial = tuple[tuple[Word, int], ...]


def _normalize_monomial(pairs) -> Monomial:
    merged: dict[Word, int] = {}
    for w, e in pairs:
        if e:
            merged[w] = merged.get(w, 0) + e
    return tuple(sorted(merged.items(), key=lambda it: it[0].order_key))


def monomial_degree(mono: Monomial) -> int:
    return sum(e for _, e in mono)


def _monomial_sort_key(mono: Monomial):
    expanded = []
    for w, e in mono:
        expanded.extend([w.order_key] * e)
    return (len(expanded), tuple(expanded))


class SparsePoly:
    """Polynomial with rational coefficients in the variables x_w."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict[Monomial, Fraction] | None = None):
        self.n = n
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    @classmethod
    def zero(cls, n: int) -> "SparsePoly":
        return cls(n)

    @classmethod
    def constant(cls, c, n: int) -> "SparsePoly":
        c = Fraction(c)
        return cls(n, {(): c} if c else {})

    @classmethod
    def variable(cls, w: Word) -> "SparsePoly":
        return cls(w.n, {_normalize_monomial([(w, 1)]): Fraction(1)})

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((monomial_degree(m) for m in self.terms), default=0)

    def __add__(self, other: "SparsePoly") -> "SparsePoly":
        if self.n != other.n:
            raise ValueError("alphabet mismatch")
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return SparsePoly(self.n, out)

    def __neg__(self) -> "SparsePoly":
        return SparsePoly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "SparsePoly") -> "SparsePoly":
        return self + (-other)

    def __mul__(self, other) -> "SparsePoly":
        if not isinstance(other, SparsePoly):
            c = Fraction(other)
            return SparsePoly(self.n, {m: c * v for m, v in self.terms.items()})
        if self.n != other.n:
            raise ValueError("alphabet mismatch")
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _normalize_monomial(m1 + m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return SparsePoly(self.n, out)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SparsePoly)
            and self.n == other.n
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.n, frozenset(self.terms.items())))

    def canonical_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms sorted graded-lexicographically by word keys."""
        return sorted(self.terms.items(), key=lambda it: _monomial_sort_key(it[0]))

    def monomial_count(self) -> int:
        return len(self.terms)

    def to_json(self) -> list[dict]:
        out = []
        for mono, coeff in self.canonical_terms():
            out.append(
                {
                    "coeff": str(coeff),
                    "monomial": [[w.to_pairs(), e] for w, e in mono],
                }
            )
        return out

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for mono, coeff in self.canonical_terms():
            factors = "*".join(
                f"x_{w.to_text()}" + (f"^{e}" if e > 1 else "") for w, e in mono
            )
            body = factors or "1"
            if coeff == 1 and factors:
                term = body
            elif coeff == -1 and factors:
                term = f"-{body}"
            else:
                term = f"{coeff}*{body}" if factors else str(coeff)
            parts.append(term)
        text = " + ".join(parts)
        return text.replace("+ -", "- ")


def poly_from_json(data, n: int) -> SparsePoly:
    from .words import word

    terms: dict[Monomial, Fraction] = {}
    for item in data:
        mono = _normalize_monomial(
            (word(n, pairs), int(e)) for pairs, e in item["monomial"]
        )
        terms[mono] = terms.get(mono, Fraction(0)) + Fraction(item["coeff"])
    return SparsePoly(n, terms)


def eval_poly(f: SparsePoly, t: Tensor) -> Scalar:
    """Substitute the tensor coordinate for each variable x_w."""
    total = 0.0 if t.field != RATIONAL else Fraction(0)
    for mono, coeff in f.terms.items():
        val = coeff if t.field == RATIONAL else float(coeff)
        for w, e in mono:
            base = coord(t, w)
            for _ in range(e):
                val = val * base
        total = total + val
    if t.field == RATIONAL and isinstance(total, Fraction) and total.denominator == 1:
        return int(total)
    return total


def subs_act_poly(sigma: SubsElement, f: SparsePoly) -> SparsePoly:
    """Algebra endomorphism x_w -> x_{sigma w}."""
    out: dict[Monomial, Fraction] = {}
    for mono, coeff in f.terms.items():
        new = _normalize_monomial((subs_act(sigma, w), e) for w, e in mono)
        out[new] = out.get(new, Fraction(0)) + coeff
    return SparsePoly(f.n, out)


# ---------------------------------------------------------------------------
# Minors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinorSpec:
    """Row and column word tuples naming the matrix x[w; w']."""

    rows: tuple[Word, ...]
    cols: tuple[Word, ...]

    def __post_init__(self):
        if not self.rows or not self.cols:
            raise ValueError("row and column tuples must be nonempty")
        n = self.rows[0].n
        if any(w.n != n for w in self.rows + self.cols):
            raise ValueError("alphabet mismatch")
        if len(set(self.rows)) != len(self.rows) or len(set(self.cols)) != len(
            self.cols
        ):
            raise ValueError("words within a tuple must be pairwise distinct")
        row_supp = set().union(*(w.support() for w in self.rows)) if self.rows else set()
        col_supp = set().union(*(w.support() for w in self.cols)) if self.cols else set()
        if row_supp & col_supp:
            raise ValueError("row and column supports must be disjoint")

    @property
    def n(self) -> int:
        return self.rows[0].n

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    def to_json(self) -> dict:
        return {
            "rows": [w.to_pairs() for w in self.rows],
            "cols": [w.to_pairs() for w in self.cols],
        }


def minor_matrix(spec: MinorSpec) -> list[list[Word]]:
    return [[word_sum(wi, wj) for wj in spec.cols] for wi in spec.rows]


def minor_poly(spec: MinorSpec) -> SparsePoly:
    """Determinant of x[w; w'] by signed expansion; the entries are distinct
    variables, so all l! monomials survive."""
    l, m = spec.shape
    if l != m:
        raise ValueError("determinant needs a square spec")
    if l > 6:
        raise ValueError("symbolic expansion capped at 6x6")
    mat = minor_matrix(spec)
    terms: dict[Monomial, Fraction] = {}
    for perm in permutations(range(l)):
        sign = 1
        for i in range(l):
            for j in range(i + 1, l):
                if perm[i] > perm[j]:
                    sign = -sign
        mono = _normalize_monomial((mat[i][perm[i]], 1) for i in range(l))
        terms[mono] = terms.get(mono, Fraction(0)) + sign
    return SparsePoly(spec.n, terms)


def enumerate_minors(p: int, n: int, k: int):
    """All (k+1) x (k+1) minor specs over all bipartitions {I, J} of the
    modes 1..p, with 1 in I to visit each unordered bipartition once.
    Deterministic order: bipartitions by subset mask, then row words, then
    column words (both by n-ary key)."""
    if p < 2:
        return
    rest = list(range(2, p + 1))
    for mask in range(2 ** len(rest)):
        I = [1] + [rest[i] for i in range(len(rest)) if mask >> i & 1]
        J = [j for j in range(1, p + 1) if j not in I]
        if not J:
            continue
        rows_pool = all_words_supported_in(I, n)
        cols_pool = all_words_supported_in(J, n)
        if len(rows_pool) < k + 1 or len(cols_pool) < k + 1:
            continue
        for rows in combinations(rows_pool, k + 1):
            for cols in combinations(cols_pool, k + 1):
                yield MinorSpec(rows, cols)


def minor_orbit_witness(spec: MinorSpec) -> tuple[MinorSpec, SubsElement]:
    """The canonical same-size minor spec plus a substitution element
    carrying it onto the given spec (one orbit per size)."""
    l, m = spec.shape
    if l != m:
        raise ValueError("orbit map defined for square specs")
    (cu, cv), sigma = table_orbit_witness(spec.rows, spec.cols)
    return MinorSpec(cu, cv), sigma


# ---------------------------------------------------------------------------
# 2x2x2: hyperdeterminant and rank classifier
# ---------------------------------------------------------------------------


def _det2(m) -> Scalar:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def _slices_mode1_222(t: Tensor):
    if t.dims != (2, 2, 2):
        raise ValueError("need a 2x2x2 tensor")
    a = [[t[(0, j, k)] for k in range(2)] for j in range(2)]
    b = [[t[(1, j, k)] for k in range(2)] for j in range(2)]
    return a, b


def hyperdet_222(t: Tensor) -> Scalar:
    """Discriminant b^2 - 4ac of det(x1*A + x2*B) = a x1^2 + b x1 x2 + c x2^2
    where A, B are the two slices along the first mode."""
    a_sl, b_sl = _slices_mode1_222(t)
    a = _det2(a_sl)
    c = _det2(b_sl)
    apb = [[a_sl[i][j] + b_sl[i][j] for j in range(2)] for i in range(2)]
    b = _det2(apb) - a - c
    return b * b - 4 * a * c


@dataclass(frozen=True)
class Rank222:
    """Rank of a 2x2x2 tensor under both field semantics.

    ``rank`` is the rank over an algebraically closed field; ``rank_real``
    the rank over the reals, which exceeds it exactly when the
    hyperdeterminant is negative."""

    rank: int
    rank_real: int
    hyperdet: Scalar


def rank_222_classify(t: Tensor) -> Rank222:
    if t.field != RATIONAL:
        raise ValueError("classification requires the exact field")
    a_sl, b_sl = _slices_mode1_222(t)
    h = hyperdet_222(t)
    span = linalg.integer_rank(
        [
            [a_sl[0][0], a_sl[0][1], a_sl[1][0], a_sl[1][1]],
            [b_sl[0][0], b_sl[0][1], b_sl[1][0], b_sl[1][1]],
        ]
    )
    if span == 0:
        return Rank222(0, 0, h)
    if span == 1:
        nz = a_sl if any(x != 0 for row in a_sl for x in row) else b_sl
        r = linalg.integer_rank(nz)
        return Rank222(r, r, h)
    if h != 0:
        return Rank222(2, 2 if h > 0 else 3, h)
    # discriminant zero: the pencil det form either vanishes identically
    # (two independent singular slices span, rank 2) or has a double root
    # (a single singular direction, rank 3 over any field)
    a = _det2(a_sl)
    c = _det2(b_sl)
    apb = [[a_sl[i][j] + b_sl[i][j] for j in range(2)] for i in range(2)]
    b = _det2(apb) - a - c
    if a == 0 and b == 0 and c == 0:
        return Rank222(2, 2, h)
    return Rank222(3, 3, h)


# ---------------------------------------------------------------------------
# l x l x 3: the degree-3l slice-commutator equation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CommutatorValue:
    """Value of det(X2 adj(X1) X3 - X3 adj(X1) X2) / det(X1)^(l-2).

    When det(X1) = 0 the uncancelled numerator is returned and
    ``exact_quotient`` is False."""

    value: Scalar
    exact_quotient: bool
    det_first_slice: Scalar


def _as_lls3(t: Tensor):
    """Slices X1, X2, X3 of an l x l x 3 tensor (3-mode permuted last if
    needed; on a 3x3x3 tensor the last mode is sliced)."""
    if t.order != 3:
        raise ValueError("need a 3-mode tensor")
    dims = t.dims
    if dims[2] == 3 and dims[0] == dims[1]:
        axis = 3
    elif dims[0] == 3 and dims[1] == dims[2]:
        axis = 1
    elif dims[1] == 3 and dims[0] == dims[2]:
        axis = 2
    else:
        raise ValueError(f"dims {dims} are not of shape l x l x 3")
    l = dims[0] if axis != 1 else dims[1]
    slices = []
    for s in range(3):
        if axis == 3:
            slices.append([[t[(i, j, s)] for j in range(l)] for i in range(l)])
        elif axis == 1:
            slices.append([[t[(s, i, j)] for j in range(l)] for i in range(l)])
        else:
            slices.append([[t[(i, s, j)] for j in range(l)] for i in range(l)])
    return l, slices


def slice_commutator(t: Tensor):
    """The matrix X2 adj(X1) X3 - X3 adj(X1) X2 plus l and det(X1)."""
    l, (x1, x2, x3) = _as_lls3(t)
    adj = linalg.adjugate(x1)
    comm = linalg.mat_sub(
        linalg.mat_mul(linalg.mat_mul(x2, adj), x3),
        linalg.mat_mul(linalg.mat_mul(x3, adj), x2),
    )
    return l, comm, linalg.exact_det(x1)


def strassen_eval(t: Tensor) -> CommutatorValue:
    """Degree-3l equation on l x l x 3 tensors; vanishes when the border
    rank is at most (3l-1)/2 (odd l)."""
    if t.field != RATIONAL:
        raise ValueError("exact field required")
    l, comm, d1 = slice_commutator(t)
    num = linalg.exact_det(comm)
    if d1 == 0:
        return CommutatorValue(num, False, d1)
    value = Fraction(num) / Fraction(d1) ** (l - 2)
    if value.denominator == 1:
        value = int(value)
    return CommutatorValue(value, True, d1)
