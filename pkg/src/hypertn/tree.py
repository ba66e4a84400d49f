"""Contraction trees, congestion based width/cost metrics and path formats.

A tree over ``n`` leaves is stored in SSA form: leaf ``i`` (a position into
``leaves``, which holds network node ids) has ssa id ``i``; the result of
merge step ``k`` gets ssa id ``n + k``.  A complete tree has ``n - 1`` merge
pairs and root ``2n - 2``.
"""

import math
from dataclasses import dataclass

from .hypergraph import HyperView


@dataclass(frozen=True)
class PathMetrics:
    """Width/cost summary of one contraction tree.

    ``width`` is the log2 size of the largest intermediate tensor (max edge
    congestion over internal vertices), ``cost`` the exact total number of
    scalar multiply-accumulate terms (vertex congestion sum), ``flops`` the
    complex-scalar FLOP count (eight per term).
    """

    width: float
    cost: int
    log10_cost: float
    flops: int
    peak_memory_elements: int


class ContractionTree:
    """Rooted binary tree over the leaves of a network, in SSA pair form."""

    __slots__ = ("leaves", "pairs", "_ann")

    def __init__(self, leaves, pairs):
        self.leaves = tuple(leaves)
        self.pairs = tuple((int(a), int(b)) for a, b in pairs)
        self._ann = None
        n = len(self.leaves)
        if len(set(self.leaves)) != n:
            raise ValueError("duplicate leaf ids")
        if n == 0:
            raise ValueError("empty tree")
        if len(self.pairs) != n - 1:
            raise ValueError(
                f"{len(self.pairs)} merge pairs for {n} leaves, need {n - 1}")
        consumed = set()
        for k, (a, b) in enumerate(self.pairs):
            limit = n + k
            for c in (a, b):
                if not 0 <= c < limit:
                    raise ValueError(f"pair {k} references unbuilt vertex {c}")
                if c in consumed:
                    raise ValueError(f"vertex {c} consumed twice")
                consumed.add(c)

    @property
    def n(self):
        return len(self.leaves)

    @property
    def root(self):
        return 2 * self.n - 2 if self.n > 1 else 0

    def children(self, v):
        """Children (left, right) of internal ssa vertex ``v``."""
        return self.pairs[v - self.n]

    def is_leaf(self, v):
        return v < self.n

    @property
    def incidence(self):
        """ssa vertex -> frozenset of index labels, if annotated."""
        if self._ann is None:
            return None
        return self._ann.label_sets()

    @classmethod
    def from_linear(cls, path, leaves):
        """Build from a linear path of position pairs (contract the i-th and
        j-th entries of the current list, append the result)."""
        n = len(leaves)
        cur = list(range(n))
        pairs = []
        for step, (i, j) in enumerate(path):
            if i == j or not (0 <= i < len(cur)) or not (0 <= j < len(cur)):
                raise ValueError(
                    f"step {step}: positions ({i}, {j}) invalid for "
                    f"{len(cur)} remaining tensors")
            a, b = cur[i], cur[j]
            for p in sorted((i, j), reverse=True):
                cur.pop(p)
            cur.append(n + step)
            pairs.append((a, b))
        return cls(leaves, pairs)

    def to_linear(self):
        """Positional (i, j) pairs, inverse of :meth:`from_linear`."""
        n = self.n
        cur = list(range(n))
        path = []
        for k, (a, b) in enumerate(self.pairs):
            i, j = cur.index(a), cur.index(b)
            if i > j:
                i, j = j, i
            path.append((i, j))
            cur.pop(j)
            cur.pop(i)
            cur.append(n + k)
        return path


class TreeAnnotation:
    """Incidence sets and congestion products for one (tree, network) pair."""

    __slots__ = ("tn", "view", "counts", "cost_terms", "result_sizes")

    def __init__(self, tn, view, counts, cost_terms, result_sizes):
        self.tn = tn
        self.view = view
        self.counts = counts
        self.cost_terms = cost_terms
        self.result_sizes = result_sizes

    def label_sets(self):
        names = self.view.labels
        return {v: frozenset(names[li] for li in c)
                for v, c in enumerate(self.counts)}

    def set_ids(self, v):
        return self.counts[v].keys()


def annotate_incidence(tree, tn):
    """Compute every incidence set of ``tree`` over ``tn``.

    Leaf sets are the full leaf label tuples; an index enters an internal
    set iff it appears in a leaf inside the subtree and either in a leaf
    outside or in the output (the hyperedge-safe generalization of the
    symmetric-difference rule, which it reduces to on plain closed networks).

    Returns the same tree with the annotation attached.
    """
    if tree._ann is not None and tree._ann.tn is tn:
        return tree
    view = HyperView.from_network(tn)
    pos = {nid: p for p, nid in enumerate(view.item_ids)}
    if sorted(tree.leaves) != sorted(view.item_ids):
        raise ValueError("tree leaves do not match network node ids")

    n = tree.n
    counts = [None] * (2 * n - 1 if n > 1 else 1)
    for i, nid in enumerate(tree.leaves):
        counts[i] = view.terms[pos[nid]]

    cost_terms = {}
    result_sizes = {}
    for k, (a, b) in enumerate(tree.pairs):
        v = n + k
        cost_terms[v] = view.union_product(counts[a], counts[b])
        merged = view.merge_counts(counts[a], counts[b])
        counts[v] = merged
        result_sizes[v] = view.term_size(merged)

    tree._ann = TreeAnnotation(tn, view, counts, cost_terms, result_sizes)
    return tree


def metrics(tree, tn):
    """Width, cost, FLOPs and peak memory of a tree over a network.

    Cost is the exact integer sum over internal vertices of the product of
    the dims of all indices of both children (Python integers, so no
    overflow; the log10 value is reported alongside).
    """
    annotate_incidence(tree, tn)
    ann = tree._ann
    if tree.n == 1:
        out_size = 1
        for label in tn.output:
            out_size *= tn.index_table[label]
        return PathMetrics(math.log2(out_size), 0, float("-inf"), 0, out_size)
    cost = sum(ann.cost_terms.values())
    peak = max(ann.result_sizes.values())
    width = math.log2(peak) if peak > 0 else 0.0
    log10_cost = math.log10(cost) if cost > 0 else float("-inf")
    return PathMetrics(width, cost, log10_cost, 8 * cost, peak)


# ------------------------------- path files ------------------------------- #

def tree_to_path_dict(tree, fmt="linear"):
    """Serialize as a path document, ``{"format": "linear"|"ssa", ...}``.

    SSA numbering: leaf positions are 0..n-1 in network node order and the
    result of step k gets id n+k.
    """
    if fmt == "linear":
        return {"format": "linear",
                "path": [list(p) for p in tree.to_linear()]}
    if fmt == "ssa":
        return {"format": "ssa",
                "num_leaves": tree.n,
                "path": [list(p) for p in tree.pairs]}
    raise ValueError(f"unknown path format {fmt!r}")


def tree_from_path_dict(obj, tn):
    """Load a path document against a network (leaves in node order)."""
    if not isinstance(obj, dict) or "format" not in obj or "path" not in obj:
        raise ValueError("path document needs 'format' and 'path'")
    leaves = tn.node_ids
    if obj["format"] == "linear":
        return ContractionTree.from_linear(
            [tuple(p) for p in obj["path"]], leaves)
    if obj["format"] == "ssa":
        if obj.get("num_leaves", len(leaves)) != len(leaves):
            raise ValueError("ssa path leaf count does not match network")
        return ContractionTree(leaves, [tuple(p) for p in obj["path"]])
    raise ValueError(f"unknown path format {obj['format']!r}")


# --------------------------- elimination orders --------------------------- #

def minfill_order(tn, seed=0):
    """Total elimination order of the non-output indices by min-fill.

    Works on the index co-occurrence graph (two labels are adjacent iff some
    node carries both).  Eliminating a label turns its neighborhood into a
    clique; the label with the fewest missing neighborhood edges goes first,
    ties broken uniformly at random under ``seed``.
    """
    import numpy as np

    rng = np.random.default_rng(seed)
    adj = {label: set() for label in tn.index_table}
    for node in tn.nodes:
        for la in node.indices:
            for lb in node.indices:
                if la != lb:
                    adj[la].add(lb)

    remaining = [l for l in tn.index_table if l not in set(tn.output)]
    order = []
    while remaining:
        fills = {}
        for label in remaining:
            nbrs = [x for x in adj[label]]
            fill = 0
            for i in range(len(nbrs)):
                for j in range(i + 1, len(nbrs)):
                    if nbrs[j] not in adj[nbrs[i]]:
                        fill += 1
            fills[label] = fill
        best = min(fills.values())
        ties = sorted(l for l, f in fills.items() if f == best)
        pick = ties[rng.integers(len(ties))] if len(ties) > 1 else ties[0]
        nbrs = sorted(adj[pick])
        for i in range(len(nbrs)):
            for j in range(i + 1, len(nbrs)):
                adj[nbrs[i]].add(nbrs[j])
                adj[nbrs[j]].add(nbrs[i])
        for x in nbrs:
            adj[x].discard(pick)
        del adj[pick]
        remaining.remove(pick)
        order.append(pick)
    return order


def tree_from_edge_order(order, tn, seed=0):
    """Turn an index elimination ordering into a contraction tree.

    For each label in turn the current fragments carrying it are merged;
    merges of more than two fragments are filled in exhaustively when the
    group has at most eight members, greedily otherwise.
    """
    non_output = [l for l in tn.index_table if l not in set(tn.output)]
    if len(set(order)) != len(order):
        raise ValueError("label repeated in elimination order")
    unknown = [l for l in order if l not in tn.index_table]
    if unknown:
        raise ValueError(f"unknown label {unknown[0]} in elimination order")
    bad = [l for l in order if l in set(tn.output)]
    if bad:
        raise ValueError(f"output label {bad[0]} cannot be eliminated")
    missing = set(non_output) - set(order)
    if missing:
        raise ValueError(
            f"order missing non-output indices: {sorted(missing)}")

    view = HyperView.from_network(tn)
    n = len(view.terms)
    frags = {i: view.terms[i] for i in range(n)}
    label2frags = {}
    for fid, counts in frags.items():
        for li in counts:
            label2frags.setdefault(li, set()).add(fid)

    pairs = []
    next_ssa = n

    def merge_group(group):
        nonlocal next_ssa
        group = sorted(group)
        local = _finish_group(view, [frags[f] for f in group], seed)
        ssa_map = list(group)
        for (a, b) in local:
            fa, fb = ssa_map[a], ssa_map[b]
            pairs.append((fa, fb))
            merged = view.merge_counts(frags[fa], frags[fb])
            for fid in (fa, fb):
                for li in frags[fid]:
                    label2frags.get(li, set()).discard(fid)
                del frags[fid]
            frags[next_ssa] = merged
            for li in merged:
                label2frags.setdefault(li, set()).add(next_ssa)
            ssa_map.append(next_ssa)
            next_ssa += 1

    for label in order:
        li = view.label_ids[label]
        group = label2frags.get(li, ())
        if len(group) >= 2:
            merge_group(group)
    if len(frags) > 1:
        merge_group(frags.keys())

    return ContractionTree(tn.node_ids, pairs)


def _finish_group(view, counts_list, seed):
    """Optimally or greedily contract a small group of fragments, returning
    local ssa pairs.  Used by edge-order replay and the divisive driver."""
    from .drivers.greedy import greedy_pairs
    from .drivers.optimal import optimal_pairs

    sub = view.subview(None, counts_list)
    if len(counts_list) == 1:
        return []
    if len(counts_list) <= 8:
        return optimal_pairs(sub, target="cost")
    return greedy_pairs(sub, alpha=1.0, tau=0.0, seed=seed)
