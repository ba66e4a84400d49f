"""Lightweight hypergraph view of a network used by the path drivers.

Labels are interned to integer ids.  Each item (a leaf tensor, or a merged
fragment) is a dict mapping label id -> number of leaves below it carrying
that label.  A label is live on an item iff its count is below the total
appearance count (leaf carriers plus one if it is an output index); once the
count saturates the label has been fully absorbed and is summed there.
"""

import math


class HyperView:
    """Interned label-count view over a set of items.

    Attributes
    ----------
    dims : list[int]
        Dimension per label id.
    appearances : list[int]
        Total appearance count per label id (output bumps by one).
    terms : list[dict[int, int]]
        Count dict per item.
    item_ids : list
        External identity of each item (network node ids, fragment keys...).
    """

    __slots__ = ("labels", "label_ids", "dims", "appearances", "terms",
                 "item_ids")

    def __init__(self, labels, dims, appearances, terms, item_ids):
        self.labels = labels
        self.label_ids = {l: i for i, l in enumerate(labels)}
        self.dims = dims
        self.appearances = appearances
        self.terms = terms
        self.item_ids = item_ids

    @classmethod
    def from_network(cls, tn):
        labels = list(tn.index_table)
        ids = {l: i for i, l in enumerate(labels)}
        dims = [tn.index_table[l] for l in labels]
        app = [0] * len(labels)
        terms = []
        item_ids = []
        for node in tn.nodes:
            counts = {}
            for label in node.indices:
                li = ids[label]
                counts[li] = 1
                app[li] += 1
            terms.append(counts)
            item_ids.append(node.id)
        for label in tn.output:
            app[ids[label]] += 1
        return cls(labels, dims, app, terms, item_ids)

    def subview(self, positions, counts_list=None):
        """View of a subset of items, treating outside-live labels as open.

        ``positions`` selects items; ``counts_list`` optionally overrides the
        count dicts (for merged fragments).  Labels still live outside the
        subset get their appearance bumped so they are never summed inside.
        """
        if counts_list is None:
            counts_list = [self.terms[p] for p in positions]
        inside = {}
        for counts in counts_list:
            for li, c in counts.items():
                inside[li] = inside.get(li, 0) + c
        labels = sorted(inside)
        app = []
        for li in labels:
            a = inside[li]
            if self.appearances[li] > inside[li]:
                a += 1
            app.append(a)
        remap = {li: i for i, li in enumerate(labels)}
        terms = [{remap[li]: c for li, c in counts.items()}
                 for counts in counts_list]
        return HyperView(
            [self.labels[li] for li in labels],
            [self.dims[li] for li in labels],
            app,
            terms,
            list(range(len(terms))),
        )

    def term_size(self, counts):
        """Exact element count of the tensor this item represents.

        Count dicts of merged fragments hold live labels only, while leaf
        dicts hold every leaf label, so the size is the plain key product.
        """
        size = 1
        dims = self.dims
        for li in counts:
            size *= dims[li]
        return size

    def log2_size(self, counts):
        dims = self.dims
        return sum(math.log2(dims[li]) for li in counts)

    def merge_counts(self, a, b):
        """Combine two count dicts, dropping saturated (summed) labels."""
        app = self.appearances
        out = {}
        for li, c in a.items():
            cb = b.get(li)
            if cb is not None:
                c = c + cb
            if c < app[li]:
                out[li] = c
        for li, c in b.items():
            if li not in a and c < app[li]:
                out[li] = c
        return out

    def union_product(self, a, b):
        """Multiply-accumulate count of merging two items: product of the
        dims of the union of their labels (exact integer)."""
        dims = self.dims
        total = 1
        for li in a:
            total *= dims[li]
        for li in b:
            if li not in a:
                total *= dims[li]
        return total


def product(dims, labels):
    total = 1
    for li in labels:
        total *= dims[li]
    return total
