"""Minimal dense complex tensor kernel: labelled arrays, pairwise
contraction, exact rank factorization and sparsity pattern tests."""

import string

import numpy as np

DEFAULT_TOL = 1e-12

_SYMBOLS = string.ascii_letters


class DenseTensor:
    """A row-major complex array with ordered index labels."""

    __slots__ = ("labels", "array")

    def __init__(self, labels, array):
        self.labels = tuple(labels)
        self.array = np.asarray(array, dtype=np.complex128)
        if self.array.ndim != len(self.labels):
            raise ValueError(
                f"{len(self.labels)} labels for array of rank {self.array.ndim}")

    @property
    def dims(self):
        return self.array.shape

    @property
    def size(self):
        return self.array.size

    def axis(self, label):
        return self.labels.index(label)

    def transpose_to(self, labels):
        """Reorder axes to the given label order."""
        if tuple(labels) == self.labels:
            return self
        perm = [self.labels.index(l) for l in labels]
        return DenseTensor(labels, np.transpose(self.array, perm))

    def __repr__(self):
        return f"DenseTensor({list(self.labels)}, shape={self.array.shape})"


def _einsum_pair(x, y, out_labels):
    """np.einsum over two labelled tensors with an explicit output."""
    mapping = {}
    for label in (*x.labels, *y.labels):
        if label not in mapping:
            mapping[label] = _SYMBOLS[len(mapping)]
    sub = "{},{}->{}".format(
        "".join(mapping[l] for l in x.labels),
        "".join(mapping[l] for l in y.labels),
        "".join(mapping[l] for l in out_labels),
    )
    return np.einsum(sub, x.array, y.array, optimize=True)


def pairwise_contract(x, y, keep):
    """Contract two tensors, keeping exactly the labels in ``keep``.

    Shared labels not in ``keep`` are summed; shared labels in ``keep``
    behave elementwise (hyperedge semantics).  The multiply-accumulate count
    of this operation is the product of the dims of the union of labels.

    Returns the new tensor with output labels in (x then y) first-seen order.
    """
    for label in x.labels:
        if label in y.labels:
            if x.array.shape[x.axis(label)] != y.array.shape[y.axis(label)]:
                raise ValueError(f"dim mismatch on shared index {label}")
    out = [l for l in x.labels if l in keep]
    out += [l for l in y.labels if l in keep and l not in x.labels]
    return DenseTensor(out, _einsum_pair(x, y, out))


def pair_op_count(x, y):
    """Multiply-accumulate count of ``pairwise_contract``: prod of the union
    of index dims (exact integer)."""
    dims = {}
    for t in (x, y):
        for label, d in zip(t.labels, t.array.shape):
            dims[label] = d
    total = 1
    for d in dims.values():
        total *= int(d)
    return total


def exact_rank_factorize(m, rel_tol=DEFAULT_TOL):
    """Exact low-rank factorization of a matrix, ``m ~= L @ R``.

    Singular values below ``rel_tol * sigma_max`` are dropped; the kept
    weights are split symmetrically (sqrt into each factor).  Returns
    ``(L, R, r)`` with ``L`` of shape (rows, r) and ``R`` of shape (r, cols),
    and r minimal such that ``||L @ R - m||_F <= rel_tol * ||m||_F``.
    """
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError("expected a matricized (2d) input")
    if not np.all(np.isfinite(m)):
        raise ValueError("non-finite input to factorization")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return m[:, :0], m[:0, :], 0
    r = int(np.sum(s > rel_tol * s[0]))
    root = np.sqrt(s[:r])
    left = u[:, :r] * root
    right = root[:, None] * vh[:r]
    return left, right, r


def zero_pattern(t, kind, axes=None, axis=None, rel_tol=DEFAULT_TOL):
    """Test a tensor for a structural zero pattern.

    kind='diag' / 'antidiag' take ``axes=(ax1, ax2)`` of equal dim d and
    return a descriptor dict iff the tensor vanishes whenever the two index
    values differ (resp. differ from ``d - 1 - other``).  kind='column' takes
    ``axis`` and returns the unique column c with the tensor zero for all
    other values of that index, if any.  An entry counts as zero when its
    magnitude is at most ``rel_tol * max|t|``.  Returns None on no match.
    """
    arr = t.array
    thresh = rel_tol * (np.max(np.abs(arr)) if arr.size else 0.0)

    if kind in ("diag", "antidiag"):
        ax1, ax2 = axes
        if not (0 <= ax1 < arr.ndim and 0 <= ax2 < arr.ndim) or ax1 == ax2:
            raise ValueError(f"bad axis pair {axes}")
        d = arr.shape[ax1]
        if arr.shape[ax2] != d:
            raise ValueError(
                f"axes {axes} have unequal dims {arr.shape[ax1]}, {arr.shape[ax2]}")
        moved = np.moveaxis(arr, (ax1, ax2), (0, 1)).reshape(d, d, -1)
        mask = np.eye(d, dtype=bool)
        if kind == "antidiag":
            mask = mask[:, ::-1]
        off = moved[~mask]
        if off.size == 0 or np.all(np.abs(off) <= thresh):
            return {"kind": kind, "axes": (ax1, ax2)}
        return None

    if kind == "column":
        if axis is None or not (0 <= axis < arr.ndim):
            raise ValueError(f"axis {axis} out of range")
        d = arr.shape[axis]
        moved = np.moveaxis(arr, axis, 0).reshape(d, -1)
        nonzero = np.any(np.abs(moved) > thresh, axis=1)
        hits = np.flatnonzero(nonzero)
        if hits.size == 0:
            return {"kind": "column", "axis": axis, "column": 0}
        if hits.size == 1:
            return {"kind": "column", "axis": axis, "column": int(hits[0])}
        return None

    raise ValueError(f"unknown pattern kind {kind!r}")


def fix_index(t, label, value):
    """Slice out one index at a fixed value, dropping that axis."""
    ax = t.axis(label)
    d = t.array.shape[ax]
    if not 0 <= value < d:
        raise ValueError(f"value {value} out of range for dim {d} index {label}")
    sl = [slice(None)] * t.array.ndim
    sl[ax] = value
    labels = t.labels[:ax] + t.labels[ax + 1:]
    return DenseTensor(labels, t.array[tuple(sl)])
