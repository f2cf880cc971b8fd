"""Dense tensors over exact rationals or binary64 floats.

Entries are stored row-major; modes are numbered 1..p to match word
positions.  Index tuples are 0-based.  Two scalar backends only: exact
values are Python ints/Fractions (certification happens here), float64 is
for numeric work.  All values are immutable and every operation is a pure
function returning a new tensor.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod

import numpy as np

from . import linalg
from .seeds import rng
from .words import Word

RATIONAL = "rational"
FLOAT64 = "float64"

Scalar = int | Fraction | float


def parse_scalar(value, field: str) -> Scalar:
    if field == FLOAT64:
        return float(value)
    if isinstance(value, str):
        if "/" in value:
            num, den = value.split("/")
            return Fraction(int(num), int(den))
        return int(value)
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return value
    raise ValueError(f"not an exact scalar: {value!r}")


def format_scalar(value: Scalar, field: str):
    if field == FLOAT64:
        return float(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _check_entry(value, field: str) -> Scalar:
    if field == RATIONAL:
        if isinstance(value, bool) or not isinstance(value, (int, Fraction)):
            raise TypeError(f"exact tensor entry must be int/Fraction, got {value!r}")
        return value
    return float(value)


@dataclass(frozen=True)
class Tensor:
    """Dense tensor: ``dims`` are the mode sizes, ``entries`` row-major.

    Order-0 tensors (dims = ()) are permitted as the closure of full
    contraction chains; they hold a single scalar.
    """

    dims: tuple[int, ...]
    entries: tuple
    field: str = RATIONAL

    def __post_init__(self):
        if any(d < 1 for d in self.dims):
            raise ValueError("mode sizes must be positive")
        if self.field not in (RATIONAL, FLOAT64):
            raise ValueError(f"unknown field {self.field!r}")
        if len(self.entries) != prod(self.dims):
            raise ValueError("entry count does not match the dims product")

    @property
    def order(self) -> int:
        return len(self.dims)

    def offset(self, idx: tuple[int, ...]) -> int:
        off = 0
        for d, i in zip(self.dims, idx):
            if not 0 <= i < d:
                raise IndexError(f"index {idx} out of range for dims {self.dims}")
            off = off * d + i
        return off

    def __getitem__(self, idx) -> Scalar:
        if isinstance(idx, int):
            idx = (idx,)
        if len(idx) != self.order:
            raise IndexError("index arity mismatch")
        return self.entries[self.offset(tuple(idx))]

    def item(self) -> Scalar:
        if self.order != 0 and prod(self.dims) != 1:
            raise ValueError("item() needs a single-entry tensor")
        return self.entries[0]

    def indices(self):
        return product(*(range(d) for d in self.dims))

    @property
    def is_zero(self) -> bool:
        return all(x == 0 for x in self.entries)

    def to_float(self) -> "Tensor":
        if self.field == FLOAT64:
            return self
        return Tensor(self.dims, tuple(float(x) for x in self.entries), FLOAT64)

    def to_numpy(self) -> np.ndarray:
        return np.array([float(x) for x in self.entries], dtype=np.float64).reshape(
            self.dims or (1,)
        )

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "field": self.field,
            "entries": [format_scalar(x, self.field) for x in self.entries],
        }

    def __str__(self) -> str:  # pragma: no cover - convenience
        shape = "x".join(map(str, self.dims)) or "scalar"
        return f"Tensor({shape}, {self.field})"


def row_major_offset(dims, idx) -> int:
    off = 0
    for d, i in zip(dims, idx):
        off = off * d + i
    return off


def tensor(dims, entries, field: str = RATIONAL) -> Tensor:
    dims = tuple(int(d) for d in dims)
    return Tensor(dims, tuple(_check_entry(x, field) for x in entries), field)


def zero_tensor(dims, field: str = RATIONAL) -> Tensor:
    z = 0.0 if field == FLOAT64 else 0
    return Tensor(tuple(dims), (z,) * prod(dims), field)


def tensor_from_json(data: dict) -> Tensor:
    dims = tuple(int(d) for d in data["dims"])
    field = data.get("field", RATIONAL)
    if "sparse" in data:
        z = 0.0 if field == FLOAT64 else 0
        entries = [z] * prod(dims)
        for item in data["sparse"]:
            idx = tuple(int(i) for i in item["index"])
            if len(idx) != len(dims) or any(not 0 <= i < d for i, d in zip(idx, dims)):
                raise ValueError(f"sparse index {idx} out of range for dims {dims}")
            entries[row_major_offset(dims, idx)] = parse_scalar(item["value"], field)
        return Tensor(dims, tuple(entries), field)
    return Tensor(
        dims, tuple(parse_scalar(x, field) for x in data["entries"]), field
    )


def save_tensor(t: Tensor, path) -> None:
    with open(path, "w") as fh:
        json.dump(t.to_json(), fh)
        fh.write("\n")


def load_tensor(path) -> Tensor:
    with open(path) as fh:
        return tensor_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PureFactorization:
    """An explicit expression as a sum of pure tensors: ``terms[t][j]`` is
    the mode-(j+1) vector of the t-th term.  Serves as a rank witness."""

    dims: tuple[int, ...]
    terms: tuple[tuple[tuple, ...], ...]
    field: str = RATIONAL

    @property
    def rank_bound(self) -> int:
        return len(self.terms)

    def to_tensor(self) -> Tensor:
        total = zero_tensor(self.dims, self.field)
        for vectors in self.terms:
            total = tensor_add(total, pure(vectors, self.field))
        return total

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "field": self.field,
            "terms": [
                [[format_scalar(x, self.field) for x in v] for v in vectors]
                for vectors in self.terms
            ],
        }


def pure(vectors, field: str = RATIONAL) -> Tensor:
    """Outer product of one vector per mode."""
    vectors = [tuple(_check_entry(x, field) for x in v) for v in vectors]
    if not vectors:
        raise ValueError("need at least one vector")
    if any(len(v) == 0 for v in vectors):
        raise ValueError("vectors must be non-empty")
    dims = tuple(len(v) for v in vectors)
    entries = []
    for idx in product(*(range(d) for d in dims)):
        val = vectors[0][idx[0]]
        for j in range(1, len(vectors)):
            val = val * vectors[j][idx[j]]
        entries.append(val)
    return Tensor(dims, tuple(entries), field)


def random_rank(
    dims, r: int, seed: int = 0, coeff_bound: int = 10
) -> tuple[Tensor, PureFactorization]:
    """Sum of r random pure tensors with integer entries in
    [-coeff_bound, coeff_bound]; factor vectors are resampled until nonzero.
    Deterministic per (dims, r, seed, coeff_bound)."""
    if r < 0:
        raise ValueError("rank must be >= 0")
    if coeff_bound < 1:
        raise ValueError("coefficient bound must be >= 1")
    dims = tuple(int(d) for d in dims)
    gen = rng(seed, "random_rank", dims, r, coeff_bound)
    terms = []
    for _ in range(r):
        vectors = []
        for d in dims:
            while True:
                v = tuple(gen.randint(-coeff_bound, coeff_bound) for _ in range(d))
                if any(v):
                    break
            vectors.append(v)
        terms.append(tuple(vectors))
    fact = PureFactorization(dims, tuple(terms))
    return fact.to_tensor(), fact


def tensor_add(a: Tensor, b: Tensor) -> Tensor:
    if a.dims != b.dims or a.field != b.field:
        raise ValueError("shape/field mismatch")
    return Tensor(a.dims, tuple(x + y for x, y in zip(a.entries, b.entries)), a.field)


def tensor_scale(c, a: Tensor) -> Tensor:
    c = _check_entry(c, a.field)
    return Tensor(a.dims, tuple(c * x for x in a.entries), a.field)


# ---------------------------------------------------------------------------
# Flattening and rank
# ---------------------------------------------------------------------------


def _check_modes(t: Tensor, modes) -> tuple[int, ...]:
    modes = tuple(sorted(set(int(j) for j in modes)))
    if any(j < 1 or j > t.order for j in modes):
        raise ValueError(f"modes {modes} out of range 1..{t.order}")
    return modes


def flatten(t: Tensor, row_modes) -> Tensor:
    """Matrix of shape (prod over I) x (prod over complement); both sides
    indexed row-major in ascending mode order."""
    I = _check_modes(t, row_modes)
    J = tuple(j for j in range(1, t.order + 1) if j not in I)
    if not I or not J:
        raise ValueError("row modes must be a nonempty proper subset")
    nrows = prod(t.dims[j - 1] for j in I)
    ncols = prod(t.dims[j - 1] for j in J)
    entries = [None] * (nrows * ncols)
    for idx in t.indices():
        row = 0
        for j in I:
            row = row * t.dims[j - 1] + idx[j - 1]
        col = 0
        for j in J:
            col = col * t.dims[j - 1] + idx[j - 1]
        entries[row * ncols + col] = t[idx]
    return Tensor((nrows, ncols), tuple(entries), t.field)


def matrix_rows(m: Tensor) -> list[list]:
    if m.order != 2:
        raise ValueError("need a 2-mode tensor")
    nr, nc = m.dims
    return [list(m.entries[r * nc : (r + 1) * nc]) for r in range(nr)]


def matrix_rank(m: Tensor, tolerance: float | None = None) -> int:
    """Exact field: fraction-free elimination.  Float field: singular
    values above tolerance * max(rows, cols) * sigma_max (default 1e-9)."""
    if m.order != 2:
        raise ValueError("need a 2-mode tensor")
    if m.field == RATIONAL:
        if tolerance is not None:
            warnings.warn("tolerance is ignored for exact tensors")
        return linalg.integer_rank(matrix_rows(m))
    return linalg.float_rank(np.array(matrix_rows(m)), tolerance or 1e-9)


# ---------------------------------------------------------------------------
# Contraction and mode maps
# ---------------------------------------------------------------------------


def x0_covector(n: int, field: str = RATIONAL):
    one = 1.0 if field == FLOAT64 else 1
    zero = 0.0 if field == FLOAT64 else 0
    return (one,) + (zero,) * (n - 1)


def contract(t: Tensor, mode: int, phi) -> Tensor:
    """Apply the covector phi to one mode, dropping it."""
    mode = int(mode)
    if not 1 <= mode <= t.order:
        raise ValueError(f"mode {mode} out of range")
    phi = tuple(_check_entry(x, t.field) for x in phi)
    if len(phi) != t.dims[mode - 1]:
        raise ValueError("covector length does not match the mode size")
    new_dims = t.dims[: mode - 1] + t.dims[mode :]
    zero = 0.0 if t.field == FLOAT64 else 0
    entries = [zero] * prod(new_dims)
    for idx in t.indices():
        coeff = phi[idx[mode - 1]]
        if coeff == 0:
            continue
        rest = idx[: mode - 1] + idx[mode:]
        entries[row_major_offset(new_dims, rest)] += coeff * t[idx]
    return Tensor(new_dims, tuple(entries), t.field)


def contract_pure(t: Tensor, modes, covectors) -> Tensor:
    """Contract several modes at once along a pure tensor of covectors;
    equals the sequential single-mode contractions in any order."""
    modes = tuple(int(j) for j in modes)
    if len(modes) != len(set(modes)):
        raise ValueError("repeated modes")
    if len(covectors) != len(modes):
        raise ValueError("one covector per contracted mode")
    pairs = sorted(zip(modes, covectors), reverse=True)
    out = t
    for mode, phi in pairs:
        out = contract(out, mode, phi)
    return out


def mode_apply(t: Tensor, maps) -> Tensor:
    """Apply one linear map per mode (None = identity); map j is a matrix
    with dims[j-1] columns, given as a list of rows."""
    if len(maps) != t.order:
        raise ValueError("one map (or None) per mode")
    out = t
    for j in range(1, t.order + 1):
        m = maps[j - 1]
        if m is None:
            continue
        out = _apply_one(out, j, m)
    return out


def _apply_one(t: Tensor, mode: int, m) -> Tensor:
    rows = [tuple(_check_entry(x, t.field) for x in row) for row in m]
    if any(len(r) != t.dims[mode - 1] for r in rows):
        raise ValueError(f"map for mode {mode} has wrong column count")
    new_dims = t.dims[: mode - 1] + (len(rows),) + t.dims[mode:]
    zero = 0.0 if t.field == FLOAT64 else 0
    entries = [zero] * prod(new_dims)
    for idx in t.indices():
        val = t[idx]
        if val == 0:
            continue
        for i_new in range(len(rows)):
            coeff = rows[i_new][idx[mode - 1]]
            if coeff == 0:
                continue
            new_idx = idx[: mode - 1] + (i_new,) + idx[mode:]
            entries[row_major_offset(new_dims, new_idx)] += coeff * val
    return Tensor(new_dims, tuple(entries), t.field)


def permute_modes(t: Tensor, perm) -> Tensor:
    """Entry (i_1..i_p) of the result is t at (i_{perm^-1(1)}..i_{perm^-1(p)})."""
    perm = tuple(int(x) for x in perm)
    if sorted(perm) != list(range(1, t.order + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{t.order}")
    new_dims = tuple(t.dims[perm[q - 1] - 1] for q in range(1, t.order + 1))
    entries = [None] * len(t.entries)
    for idx in t.indices():
        new_idx = tuple(idx[perm[q - 1] - 1] for q in range(1, t.order + 1))
        entries[row_major_offset(new_dims, new_idx)] = t[idx]
    return Tensor(new_dims, tuple(entries), t.field)


# ---------------------------------------------------------------------------
# The embedding/projection pair and word coordinates
# ---------------------------------------------------------------------------


def embed_tau(t: Tensor, size: int | None = None) -> Tensor:
    """Append a mode with slice 0 equal to t and the other slices zero."""
    size = int(size) if size is not None else max(t.dims, default=2)
    if size < 1:
        raise ValueError("appended mode size must be >= 1")
    zero = 0.0 if t.field == FLOAT64 else 0
    entries = []
    for x in t.entries:
        entries.append(x)
        entries.extend([zero] * (size - 1))
    return Tensor(t.dims + (size,), tuple(entries), t.field)


def project_pi(t: Tensor) -> Tensor:
    """Contract the last mode with (1, 0, ..., 0); inverse of embed_tau."""
    if t.order == 0:
        raise ValueError("nothing to project on an order-0 tensor")
    n = t.dims[-1]
    entries = t.entries[::n]
    return Tensor(t.dims[:-1], tuple(entries), t.field)


def coord(t: Tensor, w: Word) -> Scalar:
    """The coordinate x_w of the tensor, read through the trailing-e0
    embedding: positions past the order with symbol 0 read slice 0, a
    nonzero trailing symbol reads an all-zero slice."""
    idx = []
    for j in range(1, t.order + 1):
        sym = w.at(j)
        if sym >= t.dims[j - 1]:
            raise ValueError(
                f"symbol {sym} at position {j} exceeds mode size {t.dims[j - 1]}"
            )
        idx.append(sym)
    if w.max_support > t.order:
        return 0.0 if t.field == FLOAT64 else 0
    return t[tuple(idx)]


def frobenius(t: Tensor) -> float:
    return float(np.sqrt(sum(float(x) * float(x) for x in t.entries)))
