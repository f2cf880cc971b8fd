"""Sampling probe for degree-d pieces of the vanishing ideal.

Evaluates every degree-d monomial in the tensor entries at random rank-<=k
integer tensors; the nullity of the evaluation matrix estimates the
dimension of the degree-d part of the ideal of the rank-<=k locus.  The
default engine works modulo two independent random 31-bit primes and
requires their nullities to agree (bad primes are resampled); nullities must
also agree across two independent sample sets before a result is reported.
Exact rational elimination is available for small bases and is the only
engine that yields kernel polynomials usable over the rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from math import comb, prod

import numpy as np

from . import linalg
from .polynomials import SparsePoly, eval_poly, _normalize_monomial
from .seeds import derive, rng
from .tensor import RATIONAL, Tensor, random_rank, row_major_offset
from .words import Word, word

MONOMIAL_GUARD = 10**6


@dataclass(frozen=True)
class EntryBasis:
    """Degree-d monomials in the entry variables of a tensor shape.

    Variables are the entries, named by words supported in 1..p and ordered
    by their n-ary key; monomials are ordered graded-lexicographically."""

    dims: tuple[int, ...]
    degree: int
    variables: tuple[Word, ...]
    monomials: tuple[tuple[int, ...], ...]
    entry_offsets: tuple[int, ...]  # variable i <-> row-major entry offset

    @property
    def count(self) -> int:
        return len(self.monomials)

    def monomial_poly(self, mono: tuple[int, ...]) -> SparsePoly:
        n = max(self.dims) if max(self.dims) >= 2 else 2
        pairs = [(self.variables[i], 1) for i in mono]
        return SparsePoly(n, {_normalize_monomial(pairs): Fraction(1)})


def monomial_basis(dims, d: int) -> EntryBasis:
    dims = tuple(int(x) for x in dims)
    if d < 1:
        raise ValueError("degree must be >= 1")
    n_vars = prod(dims)
    count = comb(n_vars + d - 1, d)
    if count > MONOMIAL_GUARD:
        raise ValueError(
            f"{count} monomials exceed the guard of {MONOMIAL_GUARD}"
        )
    n = max(dims) if max(dims) >= 2 else 2
    variables = []
    for idx in np.ndindex(*dims):
        w = word(n, ((j + 1, int(s)) for j, s in enumerate(idx)))
        variables.append((w, row_major_offset(dims, idx)))
    variables.sort(key=lambda it: it[0].order_key)
    words = tuple(w for w, _ in variables)
    offsets = tuple(off for _, off in variables)
    monomials = tuple(combinations_with_replacement(range(n_vars), d))
    return EntryBasis(dims, d, words, monomials, offsets)


@dataclass(frozen=True)
class ProbeResult:
    dims: tuple[int, ...]
    k: int
    d: int
    monomial_count: int
    sample_count: int
    nullity: int
    modulus: int  # 0 = exact rationals
    primes: tuple[int, ...] = ()
    kernel: tuple[SparsePoly, ...] | None = None

    def to_json(self) -> dict:
        out = {
            "dims": list(self.dims),
            "k": self.k,
            "degree": self.d,
            "monomials": self.monomial_count,
            "samples": self.sample_count,
            "nullity": self.nullity,
            "modulus": self.modulus,
        }
        if self.primes:
            out["primes"] = list(self.primes)
        if self.kernel is not None:
            out["kernel"] = [f.to_json() for f in self.kernel]
        return out


def _sample_tensors(dims, k, count, seed, tag):
    return [
        random_rank(dims, k, derive(seed, "probe", tag, i))[0] for i in range(count)
    ]


def _value_rows(basis: EntryBasis, samples) -> np.ndarray:
    rows = np.empty((len(samples), len(basis.variables)), dtype=object)
    for r, t in enumerate(samples):
        for c, off in enumerate(basis.entry_offsets):
            rows[r, c] = t.entries[off]
    return rows


def _modp_matrix(basis: EntryBasis, values: np.ndarray, p: int) -> np.ndarray:
    vals = np.vectorize(lambda x: int(x) % p, otypes=[np.int64])(values)
    count = basis.count
    m = np.ones((values.shape[0], count), dtype=np.int64)
    mono = np.array(basis.monomials, dtype=np.int64)  # count x d
    for t in range(basis.degree):
        m = (m * vals[:, mono[:, t]]) % p
    return m


def _exact_matrix(basis: EntryBasis, values: np.ndarray):
    rows = []
    for r in range(values.shape[0]):
        v = values[r]
        row = []
        for mono in basis.monomials:
            acc = 1
            for i in mono:
                acc *= v[i]
            row.append(acc)
        rows.append(row)
    return rows


def _random_prime(seed: int, tag) -> int:
    gen = rng(seed, "prime", tag)
    while True:
        c = gen.randrange(2**30, 2**31) | 1
        if linalg.is_probable_prime(c):
            return c


def _nullity(basis, samples, modulus):
    values = _value_rows(basis, samples)
    if modulus == 0:
        return basis.count - linalg.integer_rank(_exact_matrix(basis, values))
    return basis.count - linalg.modp_rank(_modp_matrix(basis, values, modulus), modulus)


def ideal_degree_dim(
    dims,
    k: int,
    d: int,
    oversample: float = 1.5,
    seed: int = 0,
    modulus: int | str | None = "auto",
    confirm_exact: bool = False,
    kernel: bool = False,
) -> ProbeResult:
    """Estimated dimension of the degree-d ideal part of the rank-<=k locus.

    modulus: "auto" (two random 31-bit primes, agreement required), a prime,
    or 0 for exact rationals.  Nullities from two independent sample sets
    must agree before a result is reported; on disagreement the sample count
    grows and the probe repeats.
    """
    if oversample < 1.2:
        raise ValueError("oversample must be >= 1.2")
    dims = tuple(int(x) for x in dims)
    basis = monomial_basis(dims, d)
    if isinstance(modulus, str):
        if modulus != "auto":
            raise ValueError(f"unknown modulus mode {modulus!r}")
        moduli = None
    elif modulus in (None,):
        moduli = None
    else:
        modulus = int(modulus)
        if modulus != 0 and not linalg.is_probable_prime(modulus):
            raise ValueError(f"{modulus} is not prime")
        moduli = [modulus]
    if moduli is None:
        moduli = [_random_prime(seed, 0)]
        second = _random_prime(seed, 1)
        while second == moduli[0]:
            second = _random_prime(seed, (1, "retry"))
        moduli.append(second)

    count = basis.count
    factor = oversample
    for attempt in range(4):
        nsamples = int(np.ceil(factor * count))
        nullities = []
        sample_sets = [
            _sample_tensors(dims, k, nsamples, seed, (attempt, s)) for s in (0, 1)
        ]
        ok = True
        for mod_i, mod in enumerate(moduli):
            per_set = [_nullity(basis, ss, mod) for ss in sample_sets]
            if per_set[0] != per_set[1]:
                ok = False  # unstable across sample sets: more samples
                break
            nullities.append(per_set[0])
        if not ok:
            factor *= 1.5
            continue
        if len(set(nullities)) > 1:
            # disagreement between primes: resample the second prime
            moduli[-1] = _random_prime(seed, (2, attempt))
            continue
        nullity = nullities[0]
        if confirm_exact and moduli[0] != 0:
            exact = _nullity(basis, sample_sets[0], 0)
            if exact != nullity:
                raise RuntimeError(
                    f"exact nullity {exact} disagrees with mod-p nullity {nullity}"
                )
        kernel_polys = None
        if kernel:
            if moduli[0] != 0:
                raise ValueError("kernel output requires the exact engine (modulus 0)")
            mat = _exact_matrix(basis, _value_rows(basis, sample_sets[0]))
            vecs = linalg.exact_nullspace(mat)
            polys = []
            for vec in vecs:
                poly = SparsePoly.zero(max(dims) if max(dims) >= 2 else 2)
                for c, coeff in enumerate(vec):
                    if coeff:
                        poly = poly + coeff * basis.monomial_poly(basis.monomials[c])
                polys.append(poly)
            kernel_polys = tuple(polys)
        return ProbeResult(
            dims,
            k,
            d,
            count,
            nsamples,
            nullity,
            moduli[0],
            tuple(m for m in moduli if m != 0),
            kernel_polys,
        )
    raise RuntimeError("probe failed to stabilise; raise oversample or check inputs")


def membership_check(f, dims, k: int, samples: int = 64, seed: int = 0) -> bool:
    """True iff f vanishes at every sampled rank-<=k tensor.

    f may be a SparsePoly in entry variables or any callable Tensor ->
    scalar.  A False answer certifies non-membership of the sampled locus's
    ideal; True is probabilistic evidence.
    """
    for i in range(samples):
        t, _ = random_rank(dims, k, derive(seed, "member", i))
        value = f(t) if callable(f) else eval_poly(f, t)
        if value != 0:
            return False
    return True
