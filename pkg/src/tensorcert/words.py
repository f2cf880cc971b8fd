"""Finitely supported words and the monoids acting on them.

A word over the alphabet {0, ..., n-1} assigns a symbol to every position
1, 2, 3, ...; all but finitely many symbols are 0.  Words index the
coordinates x_w of tensor entries.  Three kinds of symmetries act on them:

* finite permutations / the increasing monoid Inc(N), which relocate
  positions (``inc_act``);
* the substitution monoid Subs(N): sequences of finite pairwise disjoint
  subsets of N, acting by duplicating a character across the assigned
  positions (``subs_act``);
* the submonoid Subs_<(N) (all sets nonempty, maxima strictly increasing),
  whose reachability order on words is a well-quasi-order.  ``subs_witness``
  constructs an explicit Subs_< element mapping one word onto another, by
  recursion on the symbol with the earliest last occurrence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product


@dataclass(frozen=True)
class Word:
    """Finitely supported word; ``chars`` holds (position, symbol) with
    symbol nonzero, positions 1-based and strictly increasing."""

    n: int
    chars: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("alphabet size must be >= 1")
        prev = 0
        for pos, sym in self.chars:
            if pos <= prev:
                raise ValueError("positions must be increasing and >= 1")
            if not 0 < sym < self.n:
                raise ValueError(f"symbol {sym} out of range for alphabet {self.n}")
            prev = pos

    def at(self, pos: int) -> int:
        for q, sym in self.chars:
            if q == pos:
                return sym
            if q > pos:
                return 0
        return 0

    def support(self) -> tuple[int, ...]:
        return tuple(pos for pos, _ in self.chars)

    @property
    def max_support(self) -> int:
        return self.chars[-1][0] if self.chars else 0

    @property
    def is_zero(self) -> bool:
        return not self.chars

    @property
    def order_key(self) -> int:
        """The number the word represents in the n-ary system (position j
        has weight n**j); injective, hence a canonical sort key."""
        return sum(sym * self.n**pos for pos, sym in self.chars)

    def to_text(self) -> str:
        """Digit string, trailing zeros dropped (alphabet size <= 10)."""
        if self.n > 10:
            raise ValueError("digit form requires alphabet size <= 10")
        if not self.chars:
            return "0"
        out = ["0"] * self.max_support
        for pos, sym in self.chars:
            out[pos - 1] = str(sym)
        return "".join(out)

    def to_pairs(self) -> list[list[int]]:
        return [[pos, sym] for pos, sym in self.chars]

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.to_text() if self.n <= 10 else repr(self.chars)


def word(n: int, mapping=()) -> Word:
    """Word from (position, symbol) pairs; zero symbols are dropped."""
    pairs = sorted((int(p), int(s)) for p, s in mapping if int(s) != 0)
    return Word(n, tuple(pairs))


def word_from_text(text: str, n: int | None = None) -> Word:
    syms = [int(ch) for ch in text.strip()]
    if n is None:
        n = max(max(syms, default=0) + 1, 2)
    return word(n, ((i + 1, s) for i, s in enumerate(syms)))


def word_sum(a: Word, b: Word) -> Word:
    """Union of two words with disjoint supports."""
    if a.n != b.n:
        raise ValueError("alphabet mismatch")
    if set(a.support()) & set(b.support()):
        raise ValueError("supports overlap")
    return word(a.n, a.chars + b.chars)


def word_tail(w: Word, j: int) -> Word:
    """The word of positions > j, re-indexed to start at 1."""
    return word(w.n, ((pos - j, sym) for pos, sym in w.chars if pos > j))


def word_support(w: Word) -> list[int]:
    return list(w.support())


def word_order_key(w: Word) -> int:
    return w.order_key


def all_words_supported_in(positions, n: int) -> list[Word]:
    """All n^len(positions) words with support inside the given positions,
    sorted by order key."""
    positions = sorted(positions)
    out = []
    for syms in product(range(n), repeat=len(positions)):
        out.append(word(n, zip(positions, syms)))
    out.sort(key=lambda w: w.order_key)
    return out


# ---------------------------------------------------------------------------
# Increasing monoid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IncMap:
    """Finite prefix of a strictly increasing self-map of N."""

    values: tuple[int, ...]

    def __post_init__(self):
        prev = 0
        for v in self.values:
            if v <= prev:
                raise ValueError("values must be strictly increasing and >= 1")
            prev = v

    def __len__(self) -> int:
        return len(self.values)

    def __call__(self, j: int) -> int:
        return self.values[j - 1]


def inc_act(pi: IncMap, w: Word) -> Word:
    """Relocate position j to pi(j); requires supp(w) inside the prefix."""
    if w.max_support > len(pi):
        raise ValueError("word support exceeds the map's domain prefix")
    return word(w.n, ((pi(pos), sym) for pos, sym in w.chars))


# ---------------------------------------------------------------------------
# Substitution monoid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsElement:
    """Finite prefix of a substitution-monoid element: pairwise disjoint
    finite subsets of N (possibly empty)."""

    sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for s in self.sets:
            for x in s:
                if x < 1:
                    raise ValueError("positions must be >= 1")
                if x in seen:
                    raise ValueError("sets must be pairwise disjoint")
                seen.add(x)

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def in_subs_lt(self) -> bool:
        """All sets nonempty with strictly increasing maxima."""
        prev = 0
        for s in self.sets:
            if not s:
                return False
            m = max(s)
            if m <= prev:
                return False
            prev = m
        return True

    def to_json(self) -> list[list[int]]:
        return [sorted(s) for s in self.sets]


def subs_element(sets) -> SubsElement:
    return SubsElement(tuple(frozenset(s) for s in sets))


def unit_subs(m: int) -> SubsElement:
    return subs_element([{j} for j in range(1, m + 1)])


def subs_mul(sigma: SubsElement, pi: SubsElement) -> SubsElement:
    """(sigma pi)(p) is the union of sigma(q) over q in pi(p)."""
    for s in pi.sets:
        for q in s:
            if q > len(sigma):
                raise ValueError("pi refers past the end of sigma")
    out = []
    for s in pi.sets:
        u: set[int] = set()
        for q in s:
            u |= sigma.sets[q - 1]
        out.append(u)
    return subs_element(out)


def subs_act(sigma: SubsElement, w: Word) -> Word:
    """Position p gets symbol w(q) when p lies in sigma(q), else 0."""
    if w.max_support > len(sigma):
        raise ValueError("word support exceeds the element's length")
    pairs = []
    for q, s in enumerate(sigma.sets, start=1):
        sym = w.at(q)
        if sym:
            pairs.extend((p, sym) for p in s)
    return word(w.n, pairs)


# ---------------------------------------------------------------------------
# Embedding witnesses
# ---------------------------------------------------------------------------


def higman_embed(wa: Word, wb: Word) -> IncMap | None:
    """Greedy leftmost increasing map matching wa character-for-character
    into wb (zeros included) on positions 1..max supp(wa); None if no
    increasing embedding exists."""
    if wa.n != wb.n:
        raise ValueError("alphabet mismatch")
    length = wa.max_support
    support_b = set(wb.support())
    values = []
    prev = 0
    for j in range(1, length + 1):
        sym = wa.at(j)
        pos = prev + 1
        if sym == 0:
            while pos in support_b:
                pos += 1
        else:
            while True:
                if pos in support_b and wb.at(pos) == sym:
                    break
                if pos > wb.max_support:
                    return None
                pos += 1
        values.append(pos)
        prev = pos
    return IncMap(tuple(values))


def _first_position(w: Word, sym: int) -> int | None:
    """First position of a symbol in a word; for 0 the first gap."""
    if sym == 0:
        pos = 1
        supp = set(w.support())
        while pos in supp:
            pos += 1
        return pos
    for pos, s in w.chars:
        if s == sym:
            return pos
    return None


def assemble_subs_witness(
    wa: Word,
    wb: Word,
    pi: IncMap,
    gamma: SubsElement,
    j_a: int,
    j_b: int,
) -> SubsElement:
    """Assemble the Subs_< element from an increasing embedding pi of wa in
    wb, a tail witness gamma, and the last occurrences j_a, j_b of the
    peeled symbol.  Case split:

    * j < j_a: the singleton {pi(j)};
    * j = j_a: {j_b} plus every earlier occurrence of the peeled symbol in
      wb not already hit by pi;
    * j > j_a: gamma(j - j_a) shifted by j_b, plus - only when j - j_a is
      the first position of the symbol wa(j) in the tail of wa - every
      earlier unmatched occurrence of that symbol in wb.
    """
    s = wa.at(j_a)
    tail_a = word_tail(wa, j_a)
    hit = set(pi.values[: j_a - 1])
    length = j_a + len(gamma)
    sets = []
    for j in range(1, length + 1):
        if j < j_a:
            sets.append({pi(j)})
        elif j == j_a:
            extra = {
                i for i in range(1, j_b) if wb.at(i) == s and i not in hit
            }
            sets.append({j_b} | extra)
        else:
            t = wa.at(j)
            base = {j_b + i for i in gamma.sets[j - j_a - 1]}
            if _first_position(tail_a, t) == j - j_a:
                base |= {
                    i for i in range(1, j_b) if wb.at(i) == t and i not in hit
                }
            sets.append(base)
    return subs_element(sets)


def subs_witness(wa: Word, wb: Word) -> SubsElement | None:
    """A Subs_< element sigma with sigma(wa) = wb, or None.

    Peels the symbol of wa whose last occurrence is earliest, embeds the
    head greedily, recurses on the tails, and assembles the four-case
    element; the result is validated by re-substitution before returning.
    """
    if wa.n != wb.n:
        raise ValueError("alphabet mismatch")
    if wa.is_zero:
        return subs_element([]) if wb.is_zero else None
    pi = higman_embed(wa, wb)
    if pi is None:
        return None
    last: dict[int, int] = {}
    for pos, sym in wa.chars:
        last[sym] = pos
    j_a = min(last.values())
    s = wa.at(j_a)
    j_b = 0
    for pos, sym in wb.chars:
        if sym == s:
            j_b = pos
    if j_b == 0:
        return None
    gamma = subs_witness(word_tail(wa, j_a), word_tail(wb, j_b))
    if gamma is None:
        return None
    sigma = assemble_subs_witness(wa, wb, pi, gamma, j_a, j_b)
    if not sigma.in_subs_lt or subs_act(sigma, wa) != wb:
        return None
    return sigma


# ---------------------------------------------------------------------------
# Canonical minor words and the orbit map
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def canonical_minor_words(k: int, n: int) -> tuple[tuple[Word, ...], tuple[Word, ...]]:
    """k-tuples (u, u') whose stacked 2k-row table contains every nonzero
    column that starts or ends with k zeros exactly once: 2(n^k - 1)
    columns, those with a nonzero top block first, each block ordered by
    its n-ary value."""
    if k < 1 or n < 2:
        raise ValueError("need k >= 1 and n >= 2")
    top_rows: list[list[tuple[int, int]]] = [[] for _ in range(k)]
    bot_rows: list[list[tuple[int, int]]] = [[] for _ in range(k)]
    pos = 0
    for top_zero in (False, True):
        for v in range(1, n**k):
            pos += 1
            digits = [(v // n**i) % n for i in range(k)]
            rows = bot_rows if top_zero else top_rows
            for i, d in enumerate(digits):
                if d:
                    rows[i].append((pos, d))
    us = tuple(word(n, r) for r in top_rows)
    vs = tuple(word(n, r) for r in bot_rows)
    return us, vs


def _table_column(rows: tuple[Word, ...], cols: tuple[Word, ...], pos: int) -> tuple[int, ...]:
    return tuple(w.at(pos) for w in rows) + tuple(w.at(pos) for w in cols)


def table_orbit_witness(
    rows: tuple[Word, ...], cols: tuple[Word, ...]
) -> tuple[tuple[tuple[Word, ...], tuple[Word, ...]], SubsElement]:
    """Substitution element carrying the canonical word tuples onto the
    given ones: sigma(j) collects the positions of the target table whose
    column equals the j-th canonical column."""
    k = len(rows)
    if len(cols) != k:
        raise ValueError("row and column tuples must have equal length")
    n = rows[0].n
    canon = canonical_minor_words(k, n)
    width = 2 * (n**k - 1)
    max_pos = max(
        [w.max_support for w in rows + cols] + [0]
    )
    by_column: dict[tuple[int, ...], set[int]] = {}
    for pos in range(1, max_pos + 1):
        col = _table_column(rows, cols, pos)
        if any(col):
            by_column.setdefault(col, set()).add(pos)
    sets = []
    for j in range(1, width + 1):
        col = _table_column(canon[0], canon[1], j)
        sets.append(by_column.get(col, set()))
    return canon, subs_element(sets)
