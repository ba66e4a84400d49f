"""Agglomerative driver: score pairwise merges, sample by Boltzmann weight.

The score of merging fragments i and j into k is

    cost(i, j) = size(k) - alpha * (size(i) + size(j))

and a candidate is drawn with probability proportional to
``exp(-cost / tau)``.  ``tau = 0`` degenerates to the deterministic argmin
with ties broken by the seed; ``alpha = 0`` scores by output size alone,
which is the rank-targeting mode the simplifier reuses.
"""

import math

import numpy as np

from ..hypergraph import HyperView

_CLAMP = 1000.0


class GreedyState:
    """Mutable fragment pool with adjacency-tracked merge candidates."""

    def __init__(self, view):
        self.view = view
        n = len(view.terms)
        self.frags = {i: view.terms[i] for i in range(n)}
        self.label2frags = {}
        for fid, counts in self.frags.items():
            for li in counts:
                self.label2frags.setdefault(li, set()).add(fid)
        self.next_ssa = n
        self.sizes = {f: self._fsize(c) for f, c in self.frags.items()}

    def _fsize(self, counts):
        total = self.view.log2_size(counts)
        return 2.0 ** min(_CLAMP, total)

    def neighbors(self, fid):
        seen = set()
        for li in self.frags[fid]:
            seen.update(self.label2frags.get(li, ()))
        seen.discard(fid)
        return seen

    def adjacent_pairs(self):
        pairs = set()
        for fid in self.frags:
            for nb in self.neighbors(fid):
                pairs.add((fid, nb) if fid < nb else (nb, fid))
        return pairs

    def merged(self, fa, fb):
        return self.view.merge_counts(self.frags[fa], self.frags[fb])

    def score(self, fa, fb, alpha):
        out = self.merged(fa, fb)
        return self._fsize(out) - alpha * (self.sizes[fa] + self.sizes[fb])

    def rank_ok(self, fa, fb):
        out = self.merged(fa, fb)
        return len(out) <= max(len(self.frags[fa]), len(self.frags[fb]))

    def merge(self, fa, fb):
        counts = self.merged(fa, fb)
        for fid in (fa, fb):
            for li in self.frags[fid]:
                peers = self.label2frags.get(li)
                if peers is not None:
                    peers.discard(fid)
            del self.frags[fid]
            del self.sizes[fid]
        fid = self.next_ssa
        self.next_ssa += 1
        self.frags[fid] = counts
        self.sizes[fid] = self._fsize(counts)
        for li in counts:
            self.label2frags.setdefault(li, set()).add(fid)
        return fid


def _run(state, alpha, tau, rng, rank_filter=False):
    """Drive merges to exhaustion; returns the emitted ssa pairs."""
    pairs = []
    candidates = {}
    for key in state.adjacent_pairs():
        candidates[key] = state.score(*key, alpha)

    while len(state.frags) > 1:
        pool = sorted(candidates.items())
        if rank_filter:
            pool = [(k, c) for k, c in pool if state.rank_ok(*k)]
        if not pool:
            # no (eligible) adjacent pair left: consider outer products
            keys = sorted(state.frags)
            fallback = [(a, b) for i, a in enumerate(keys)
                        for b in keys[i + 1:]]
            if rank_filter:
                fallback = [k for k in fallback if state.rank_ok(*k)]
            if not fallback:
                break
            pool = sorted((k, state.score(*k, alpha)) for k in fallback)
        if tau <= 0.0:
            best = min(c for _, c in pool)
            ties = [k for k, c in pool if c == best]
            key = ties[rng.integers(len(ties))] if len(ties) > 1 else ties[0]
        else:
            costs = np.array([c for _, c in pool])
            logits = -(costs - costs.min()) / tau
            weights = np.exp(logits - logits.max())
            p = weights / weights.sum()
            key = pool[rng.choice(len(pool), p=p)][0]

        fa, fb = key
        touched = state.neighbors(fa) | state.neighbors(fb) | {fa, fb}
        fid = state.merge(fa, fb)
        pairs.append(key)
        for k in list(candidates):
            if k[0] in touched or k[1] in touched:
                del candidates[k]
        for f in (touched - {fa, fb}) | {fid}:
            if f not in state.frags:
                continue
            for nb in state.neighbors(f):
                k = (f, nb) if f < nb else (nb, f)
                if k not in candidates:
                    candidates[k] = state.score(*k, alpha)
    return pairs


def greedy_pairs(view, alpha=1.0, tau=0.0, seed=0):
    rng = np.random.default_rng(seed)
    return _run(GreedyState(view), alpha, tau, rng)


def rank_absorb_pairs(view):
    """Rank-targeting deterministic mode: alpha = tau = 0, merging only
    while the output rank does not exceed either input rank."""
    rng = np.random.default_rng(0)
    return _run(GreedyState(view), 0.0, 0.0, rng, rank_filter=True)


def greedy_sample(tn, alpha=1.0, tau=0.0, seed=0):
    """Sample one complete contraction tree for a network.

    Candidate pairs are the fragments currently sharing an index, falling
    back to all pairs once no adjacency remains (disconnected networks).
    """
    if alpha < 0 or tau < 0:
        raise ValueError("alpha and tau must be non-negative")
    from ..tree import ContractionTree

    view = HyperView.from_network(tn)
    if len(view.terms) == 0:
        raise ValueError("empty network")
    pairs = greedy_pairs(view, alpha, tau, seed)
    return ContractionTree(tn.node_ids, pairs)


def pairs_cost(view, pairs):
    """Exact (cost, peak) of an ssa pair sequence over a view's items."""
    n = len(view.terms)
    counts = list(view.terms)
    cost = 0
    peak = 0
    for a, b in pairs:
        cost += view.union_product(counts[a], counts[b])
        merged = view.merge_counts(counts[a], counts[b])
        counts.append(merged)
        peak = max(peak, view.term_size(merged))
    del n
    return cost, peak
