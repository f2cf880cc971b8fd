"""Joint-distribution tensors of the k-state general Markov model on trees.

A tree with a root distribution and one transition matrix per edge defines
a joint distribution over the leaf states: one tensor mode per leaf.  Such
tensors satisfy two families of determinantal constraints: every internal
edge induces a leaf bipartition whose flattening has rank at most k, and
every internal vertex induces a star tensor (modes grouped by the
components around the vertex) of border rank at most k.  ``check_membership``
tests both families; the star tests reuse the border-rank certifiers and
are complete for k <= 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import prod

from .certify import (
    CERTIFIED,
    INCONCLUSIVE,
    VIOLATED,
    TestConfig,
    _inner_test,
    _witness_minor,
)
from .seeds import rng
from .tensor import RATIONAL, Scalar, Tensor, contract, matrix_rank, flatten, permute_modes


class NewickError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass(frozen=True)
class Tree:
    """Rooted tree over node ids 0..N-1 (0 = root), preorder numbering."""

    parent: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    labels: tuple[str | None, ...]
    leaves: tuple[int, ...]  # left-to-right

    @property
    def leaf_names(self) -> tuple[str, ...]:
        return tuple(self.labels[i] for i in self.leaves)

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def is_leaf(self, v: int) -> bool:
        return not self.children[v]

    def internal_nodes(self) -> list[int]:
        return [v for v in range(self.n_nodes) if self.children[v]]

    def leaves_under(self, v: int) -> tuple[int, ...]:
        out = []
        stack = [v]
        while stack:
            u = stack.pop()
            if self.is_leaf(u):
                out.append(u)
            else:
                stack.extend(reversed(self.children[u]))
        return tuple(out)

    def leaf_position(self, v: int) -> int:
        """1-based tensor mode of a leaf node."""
        return self.leaves.index(v) + 1


def parse_newick(text: str) -> Tree:
    """Minimal Newick parser: labels required on leaves, branch lengths
    accepted and ignored, internal labels accepted and kept."""
    s = text.strip()
    pos = 0
    parent: list[int] = []
    children: list[list[int]] = []
    labels: list[str | None] = []

    def new_node(par: int) -> int:
        parent.append(par)
        children.append([])
        labels.append(None)
        nid = len(parent) - 1
        if par >= 0:
            children[par].append(nid)
        return nid

    def parse_label(i: int) -> tuple[str, int]:
        j = i
        while j < len(s) and s[j] not in "(),;:":
            j += 1
        return s[i:j].strip(), j

    def skip_length(i: int) -> int:
        if i < len(s) and s[i] == ":":
            i += 1
            j = i
            while j < len(s) and s[j] not in "(),;":
                j += 1
            if j == i:
                raise NewickError("expected branch length after ':'", i)
            return j
        return i

    def parse_subtree(i: int, par: int) -> int:
        nid = new_node(par)
        if i >= len(s):
            raise NewickError("unexpected end of input", i)
        if s[i] == "(":
            i += 1
            while True:
                i = parse_subtree(i, nid)
                if i >= len(s):
                    raise NewickError("unclosed '('", i)
                if s[i] == ",":
                    i += 1
                    continue
                if s[i] == ")":
                    i += 1
                    break
                raise NewickError(f"unexpected character {s[i]!r}", i)
            label, i = parse_label(i)
            labels[nid] = label or None
            i = skip_length(i)
        else:
            label, i = parse_label(i)
            if not label:
                raise NewickError("leaf label required", i)
            labels[nid] = label
            i = skip_length(i)
        return i

    if not s:
        raise NewickError("empty input", 0)
    pos = parse_subtree(0, -1)
    if pos >= len(s) or s[pos] != ";":
        raise NewickError("expected ';'", pos)
    if pos != len(s) - 1:
        raise NewickError("trailing input after ';'", pos + 1)
    tree = Tree(
        tuple(parent),
        tuple(tuple(c) for c in children),
        tuple(labels),
        tuple(i for i in range(len(parent)) if not children[i]),
    )
    if len(tree.leaves) < 2:
        raise NewickError("a tree needs at least 2 leaves", 0)
    for v in tree.leaves:
        if not tree.labels[v]:
            raise NewickError("leaf label required", 0)
    return tree


@dataclass(frozen=True)
class ModelParams:
    """Root distribution (length k) and one k x m transition matrix per
    non-root node, keyed by the child node id; m = k on internal edges and
    the observed-state count at a leaf."""

    k: int
    root_dist: tuple
    edges: dict[int, tuple[tuple, ...]]

    def leaf_states(self, tree: Tree, v: int) -> int:
        return len(self.edges[v][0])


def random_params(
    tree: Tree,
    k: int,
    seed: int = 0,
    leaf_states: dict[int, int] | None = None,
    stochastic: bool = False,
    coeff_bound: int = 10,
) -> ModelParams:
    gen = rng(seed, "phylo_params", k, stochastic)
    leaf_states = leaf_states or {}

    def vector(m):
        if stochastic:
            raw = [gen.randint(1, coeff_bound) for _ in range(m)]
            total = sum(raw)
            return tuple(Fraction(x, total) for x in raw)
        return tuple(gen.randint(-coeff_bound, coeff_bound) for _ in range(m))

    root = vector(k)
    edges = {}
    for v in range(1, tree.n_nodes):
        m = leaf_states.get(v, k) if tree.is_leaf(v) else k
        edges[v] = tuple(vector(m) for _ in range(k))
    return ModelParams(k, root, edges)


def model_tensor(tree: Tree, params: ModelParams) -> Tensor:
    """Joint leaf distribution: sum over internal-state assignments of the
    root weight times the product of edge transitions."""
    k = params.k
    if len(params.root_dist) != k:
        raise ValueError("root distribution length differs from k")
    internal = tree.internal_nodes()
    for v in range(1, tree.n_nodes):
        if v not in params.edges:
            raise ValueError(f"missing edge matrix for node {v}")
        mat = params.edges[v]
        if len(mat) != k:
            raise ValueError(f"edge matrix for node {v} must have k rows")
        if not tree.is_leaf(v) and any(len(row) != k for row in mat):
            raise ValueError(f"internal edge matrix for node {v} must be k x k")
    dims = tuple(params.leaf_states(tree, v) for v in tree.leaves)
    entries = [0] * prod(dims)
    node_index = {v: i for i, v in enumerate(internal)}
    leaf_mode = {v: i for i, v in enumerate(tree.leaves)}
    for states in product(range(k), repeat=len(internal)):
        weight = params.root_dist[states[node_index[0]]]
        for v in internal:
            if v == 0:
                continue
            weight = weight * params.edges[v][states[node_index[tree.parent[v]]]][
                states[node_index[v]]
            ]
        if weight == 0:
            continue
        vectors = []
        for v in tree.leaves:
            s_par = states[node_index[tree.parent[v]]]
            vectors.append(params.edges[v][s_par])
        for idx in product(*(range(d) for d in dims)):
            val = weight
            for j, v in enumerate(vectors):
                val = val * v[idx[j]]
                if val == 0:
                    break
            if val == 0:
                continue
            o = 0
            for d, i in zip(dims, idx):
                o = o * d + i
            entries[o] += val
    return Tensor(dims, tuple(entries))


def marginalize(t: Tensor, mode: int) -> Tensor:
    ones = (1,) * t.dims[mode - 1] if t.field == RATIONAL else (1.0,) * t.dims[mode - 1]
    return contract(t, mode, ones)


def remove_leaf(tree: Tree, label: str) -> tuple[Tree, dict[int, int]]:
    """Drop a leaf and its pendant edge; returns the new tree and the map
    from surviving old node ids to new ids."""
    victim = next(
        (v for v in tree.leaves if tree.labels[v] == label), None
    )
    if victim is None:
        raise ValueError(f"no leaf labelled {label!r}")
    keep = [v for v in range(tree.n_nodes) if v != victim]
    id_map = {old: new for new, old in enumerate(keep)}
    parent = tuple(
        id_map[tree.parent[v]] if tree.parent[v] >= 0 else -1 for v in keep
    )
    children = tuple(
        tuple(id_map[c] for c in tree.children[v] if c != victim) for v in keep
    )
    labels = tuple(tree.labels[v] for v in keep)
    leaves = tuple(
        id_map[v]
        for v in range(tree.n_nodes)
        if v != victim and (not tree.children[v] or tree.children[v] == (victim,))
    )
    return Tree(parent, children, labels, leaves), id_map


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def internal_splits(tree: Tree) -> list[tuple[int, tuple[int, ...]]]:
    """One (child node, leaf-mode tuple) per distinct internal-edge split."""
    seen = set()
    out = []
    all_modes = frozenset(range(1, len(tree.leaves) + 1))
    for v in range(1, tree.n_nodes):
        if tree.is_leaf(v):
            continue
        side = tuple(sorted(tree.leaf_position(u) for u in tree.leaves_under(v)))
        key = min(frozenset(side), all_modes - frozenset(side), key=sorted)
        if key in seen or not side or len(side) == len(tree.leaves):
            continue
        seen.add(key)
        out.append((v, side))
    return out


def vertex_blocks(tree: Tree, v: int) -> list[tuple[int, ...]]:
    """Leaf modes grouped by the components of the tree with v removed."""
    blocks = []
    for c in tree.children[v]:
        blocks.append(tuple(sorted(tree.leaf_position(u) for u in tree.leaves_under(c))))
    below = {u for c in tree.children[v] for u in tree.leaves_under(c)}
    rest = tuple(
        sorted(tree.leaf_position(u) for u in tree.leaves if u not in below)
    )
    if rest:
        blocks.append(rest)
    blocks.sort(key=lambda b: b[0])
    return blocks


def group_modes(t: Tensor, blocks) -> Tensor:
    """Merge the modes of each block into one (after reordering)."""
    order = [m for block in blocks for m in block]
    if sorted(order) != list(range(1, t.order + 1)):
        raise ValueError("blocks must partition the modes")
    perm = [0] * t.order
    for new_pos, old in enumerate(order, start=1):
        perm[old - 1] = new_pos
    moved = permute_modes(t, perm)
    dims = tuple(
        prod(t.dims[m - 1] for m in block) for block in blocks
    )
    return Tensor(dims, moved.entries, t.field)


@dataclass(frozen=True)
class PhyloReport:
    verdict: str
    k: int
    edge_checks: tuple[dict, ...]
    vertex_checks: tuple[dict, ...]

    @property
    def passed(self) -> bool:
        return self.verdict != VIOLATED

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "k": self.k,
            "edges": list(self.edge_checks),
            "vertices": list(self.vertex_checks),
        }


def check_membership(t: Tensor, tree: Tree, k: int) -> PhyloReport:
    """Edge flattenings must have rank <= k; each vertex star must pass the
    border-rank-<=k test (complete for k <= 2, one-sided beyond)."""
    if t.order != len(tree.leaves):
        raise ValueError(
            f"tensor has {t.order} modes but the tree has {len(tree.leaves)} leaves"
        )
    edge_checks = []
    any_violation = False
    for v, side in internal_splits(tree):
        mat = flatten(t, side)
        rank = matrix_rank(mat)
        entry = {
            "child": v,
            "split": list(side),
            "rank": rank,
            "ok": rank <= k,
        }
        if rank > k:
            any_violation = True
            witness = _witness_minor(t, side, tuple(
                m for m in range(1, t.order + 1) if m not in side
            ), k)
            if witness is not None:
                spec, value = witness
                entry["minor"] = spec.to_json()
                entry["value"] = str(value)
        edge_checks.append(entry)
    vertex_checks = []
    complete = k <= 2
    any_inconclusive = False
    for v in tree.internal_nodes():
        blocks = vertex_blocks(tree, v)
        star = group_modes(t, blocks)
        rep = _inner_test(star, k, TestConfig(k=k))
        vertex_checks.append(
            {
                "vertex": v,
                "blocks": [list(b) for b in blocks],
                "verdict": rep.verdict,
                "detail": rep.detail,
            }
        )
        if rep.verdict == VIOLATED:
            any_violation = True
        elif rep.verdict != CERTIFIED:
            any_inconclusive = True
    if any_violation:
        verdict = VIOLATED
    elif complete and not any_inconclusive:
        verdict = CERTIFIED
    else:
        verdict = INCONCLUSIVE
    return PhyloReport(verdict, k, tuple(edge_checks), tuple(vertex_checks))
