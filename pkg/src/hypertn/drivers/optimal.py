"""Exhaustive dynamic-programming driver over connected subgraphs.

Builds the provably best tree (for total cost or width) while never forming
an outer product inside a connected component; disconnected components are
contracted separately and their optimal trees joined at the end.  Search is
pruned with a metric cap seeded by a greedy solution, which preserves
optimality because both metrics are monotone over subtrees.
"""

from ..hypergraph import HyperView
from .greedy import greedy_pairs, pairs_cost

DEFAULT_CAP = 18


def optimal_dp(tn, target="cost", cap=DEFAULT_CAP):
    """Best contraction tree of ``tn`` for the chosen target metric.

    Parameters
    ----------
    tn : TensorNetwork
    target : 'cost' or 'width'
    cap : int
        Refuse networks with more nodes than this (the search is
        exponential in the worst case).
    """
    from ..tree import ContractionTree

    view = HyperView.from_network(tn)
    n = len(view.terms)
    if n > cap:
        raise ValueError(f"network has {n} > {cap} nodes; raise the cap "
                         "or use a heuristic driver")
    pairs = optimal_pairs(view, target)
    return ContractionTree(tn.node_ids, pairs)


def optimal_pairs(view, target="cost"):
    """Optimal ssa pairs over a view's items."""
    if target not in ("cost", "width"):
        raise ValueError(f"unknown target {target!r}")
    n = len(view.terms)
    if n == 1:
        return []

    comps = _components(view)
    structs = []
    root_counts = []
    for comp in comps:
        struct, counts = _dp_component(view, comp, target)
        structs.append(struct)
        root_counts.append(counts)

    if len(comps) == 1:
        join = 0
    elif len(comps) <= 8:
        join, _ = _dp_items(view, root_counts, target, require_adjacent=False)
    else:
        # degenerate many-component case: join smallest first
        order = sorted(range(len(comps)),
                       key=lambda i: (view.term_size(root_counts[i]), i))
        join = order[0]
        for i in order[1:]:
            join = (join, i)

    struct = _substitute(join, structs)
    return _flatten(struct, n)


def _components(view):
    n = len(view.terms)
    label2items = {}
    for i, counts in enumerate(view.terms):
        for li in counts:
            label2items.setdefault(li, []).append(i)
    seen = [False] * n
    comps = []
    for start in range(n):
        if seen[start]:
            continue
        stack = [start]
        seen[start] = True
        comp = []
        while stack:
            i = stack.pop()
            comp.append(i)
            for li in view.terms[i]:
                for j in label2items[li]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
        comps.append(sorted(comp))
    return comps


def _metric_cap(view, counts_list, target):
    """Upper bound from greedy runs (a feasible tree's metric)."""
    sub = view.subview(None, counts_list)
    best = None
    for alpha in (1.0, 0.0):
        pairs = greedy_pairs(sub, alpha=alpha, tau=0.0, seed=0)
        cost, peak = pairs_cost(sub, pairs)
        value = cost if target == "cost" else peak
        best = value if best is None else min(best, value)
    return best


def _dp_component(view, members, target):
    """DP over one connected set of items; returns (structure, root counts).

    Structures are nested tuples over member positions (global item ids).
    """
    if len(members) == 1:
        return members[0], view.terms[members[0]]
    counts_list = [view.terms[i] for i in members]
    struct_local, counts = _dp_items(view, counts_list, target,
                                     require_adjacent=True)
    return _substitute(struct_local, members), counts


def _dp_items(view, counts_list, target, require_adjacent=True):
    """Core bitmask DP over a list of count dicts.

    Returns the best structure (nested tuples over list positions) and the
    merged count dict of the root.
    """
    m = len(counts_list)
    cap = _metric_cap(view, counts_list, target)

    label2bits = {}
    for i, counts in enumerate(counts_list):
        for li in counts:
            label2bits[li] = label2bits.get(li, 0) | (1 << i)
    adj = []
    for i, counts in enumerate(counts_list):
        mask = 0
        for li in counts:
            mask |= label2bits[li]
        adj.append(mask & ~(1 << i))
    full_adj = (1 << m) - 1

    # entry: mask -> (metric, counts, neighborhood mask, structure)
    by_size = [dict() for _ in range(m + 1)]
    for i, counts in enumerate(counts_list):
        neigh = adj[i] if require_adjacent else full_adj & ~(1 << i)
        by_size[1][1 << i] = (0, counts, neigh, i)

    for s in range(2, m + 1):
        table = by_size[s]
        for s1 in range(1, s // 2 + 1):
            s2 = s - s1
            items1 = list(by_size[s1].items())
            items2 = list(by_size[s2].items())
            for ma, (met_a, cnt_a, ng_a, st_a) in items1:
                for mb, (met_b, cnt_b, ng_b, st_b) in items2:
                    if s1 == s2 and ma >= mb:
                        continue
                    if ma & mb:
                        continue
                    if not (ng_a & mb):
                        continue
                    if target == "cost":
                        metric = met_a + met_b + view.union_product(cnt_a,
                                                                    cnt_b)
                        if metric > cap:
                            continue
                        merged = view.merge_counts(cnt_a, cnt_b)
                    else:
                        merged = view.merge_counts(cnt_a, cnt_b)
                        metric = max(met_a, met_b, view.term_size(merged))
                        if metric > cap:
                            continue
                    mask = ma | mb
                    cur = table.get(mask)
                    if cur is None or metric < cur[0]:
                        neigh = (ng_a | ng_b) & ~mask
                        table[mask] = (metric, merged, neigh, (st_a, st_b))

    full = (1 << m) - 1
    entry = by_size[m].get(full)
    if entry is None:
        raise RuntimeError("dp table lost the optimal solution")
    return entry[3], entry[1]


def _substitute(struct, leaf_map):
    """Replace integer leaves of a structure via ``leaf_map``."""
    if isinstance(struct, int):
        repl = leaf_map[struct]
        return repl
    a, b = struct
    return (_substitute(a, leaf_map), _substitute(b, leaf_map))


def _flatten(struct, n):
    """Post-order ssa pairs of a nested tuple structure over item ids."""
    pairs = []
    next_ssa = [n]

    def rec(node):
        if isinstance(node, int):
            return node
        a = rec(node[0])
        b = rec(node[1])
        pairs.append((a, b))
        sid = next_ssa[0]
        next_ssa[0] += 1
        return sid

    rec(struct)
    return pairs
