"""Independent oracles used by the test suite.

Each oracle takes a different computational route from the code under test:
rank via Fraction Gaussian elimination, determinants via permutation
expansion, substitution-monoid reachability via direct enumeration of
truncated elements and via a max-profile search.
"""

from fractions import Fraction
from itertools import combinations, permutations, product

from tensorcert.words import Word


def fraction_rank(rows) -> int:
    m = [[Fraction(x) for x in r] for r in rows]
    if not m or not m[0]:
        return 0
    nr, nc = len(m), len(m[0])
    row = 0
    for col in range(nc):
        piv = next((r for r in range(row, nr) if m[r][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        pv = m[row][col]
        for r in range(row + 1, nr):
            f = m[r][col] / pv
            m[r] = [a - f * b for a, b in zip(m[r], m[row])]
        row += 1
        if row == nr:
            break
    return row


def permutation_det(rows):
    n = len(rows)
    total = 0
    for perm in permutations(range(n)):
        sign = 1
        for i in range(n):
            for j in range(i + 1, n):
                if perm[i] > perm[j]:
                    sign = -sign
        val = sign
        for i in range(n):
            val = val * rows[i][perm[i]]
        total += val
    return total


def subs_reachable_raw(wa: Word, wb: Word) -> bool:
    """Brute force over truncated increasing-max substitution elements:
    assign every position of [1..max supp(wb)] to a source position of wa
    (or to none), then check the element axioms."""
    if wa.is_zero:
        return wb.is_zero
    if wb.is_zero:
        return False
    L = wa.max_support
    B = wb.max_support
    choices = []
    for i in range(1, B + 1):
        t = wb.at(i)
        if t:
            allowed = [j for j in range(1, L + 1) if wa.at(j) == t]
            if not allowed:
                return False
        else:
            allowed = [0] + [j for j in range(1, L + 1) if wa.at(j) == 0]
        choices.append(allowed)
    for assign in product(*choices):
        sets = [set() for _ in range(L)]
        for i, j in enumerate(assign, start=1):
            if j:
                sets[j - 1].add(i)
        if any(not s for s in sets):
            continue
        prev = 0
        ok = True
        for s in sets:
            m = max(s)
            if m <= prev:
                ok = False
                break
            prev = m
        if ok:
            return True
    return False


def subs_reachable_profile(wa: Word, wb: Word) -> bool:
    """Decision procedure via increasing symbol-matching max-profiles over
    wa's support, with coverage and zero-gap capacity checks."""
    if wa.is_zero:
        return wb.is_zero
    if wb.is_zero:
        return False
    supp_a = list(wa.support())
    supp_b = list(wb.support())
    B = wb.max_support
    bset = set(supp_b)
    r = len(supp_a)

    def gap_capacity(lo, hi):
        return sum(1 for x in range(lo + 1, hi) if x not in bset)

    cands = [[i for i in supp_b if wb.at(i) == wa.at(j)] for j in supp_a]

    def rec(i, prev, chosen):
        if i == r:
            if chosen[-1] != B:
                return False
            chosen_set = set(chosen)
            best = {}
            for j, m in zip(supp_a, chosen):
                s = wa.at(j)
                best[s] = max(best.get(s, 0), m)
            for i2 in supp_b:
                if i2 in chosen_set:
                    continue
                if best.get(wb.at(i2), 0) <= i2:
                    return False
            prev_pos, prev_max = 0, 0
            for j, m in zip(supp_a, chosen):
                if gap_capacity(prev_max, m) < j - prev_pos - 1:
                    return False
                prev_pos, prev_max = j, m
            return True
        for m in cands[i]:
            if m <= prev:
                continue
            if rec(i + 1, m, chosen + [m]):
                return True
        return False

    return rec(0, 0, [])


def all_minor_values(rows, size):
    """Exact values of every size x size minor of an integer matrix."""
    nr, nc = len(rows), len(rows[0]) if rows else 0
    out = []
    for rset in combinations(range(nr), size):
        for cset in combinations(range(nc), size):
            out.append(permutation_det([[rows[r][c] for c in cset] for r in rset]))
    return out
