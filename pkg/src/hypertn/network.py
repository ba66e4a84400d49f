"""Hypergraph tensor-network data model, validation and interchange formats.

A network is a collection of tensor nodes over a shared table of labelled,
dimensioned indices.  An index appearing in three or more nodes (or in two
nodes plus the output) is a hyperedge and is a first class citizen here: it
denotes a COPY constraint rather than a pairwise bond.
"""

import base64
import json
import string

import numpy as np

_LETTERS = frozenset(string.ascii_letters)


class DataError(Exception):
    """Malformed file, spec string or inconsistent tensor data."""


def _as_complex(data):
    arr = np.ascontiguousarray(data, dtype=np.complex128)
    return arr


class TensorNode:
    """A single tensor: integer id, ordered index labels, optional dense data.

    If ``data`` is given its shape must match the network dims of ``indices``
    in order.  Nodes are treated as immutable once constructed.
    """

    __slots__ = ("id", "indices", "data")

    def __init__(self, nid, indices, data=None):
        self.id = int(nid)
        self.indices = tuple(indices)
        self.data = None if data is None else _as_complex(data)

    def __repr__(self):
        tag = "dense" if self.data is not None else "structural"
        return f"TensorNode({self.id}, {list(self.indices)}, {tag})"


class TensorNetwork:
    """An edge-weighted hypergraph of tensors with a designated output.

    Parameters
    ----------
    nodes : iterable of TensorNode
    index_table : dict[str, int]
        Label to dimension.  Dimensions are positive integers.
    output : sequence of str
        Ordered open indices of the full contraction.
    norm_exponent : float
        Base-10 exponent stripped from the data during renormalization; the
        represented value is ``(contracted value) * 10**norm_exponent``.

    Networks are value objects: safe to share across threads, mutate by
    building a replacement via :meth:`replace`.
    """

    __slots__ = ("nodes", "index_table", "output", "norm_exponent",
                 "_node_map", "_carriers")

    def __init__(self, nodes, index_table, output=(), norm_exponent=0.0):
        self.nodes = tuple(nodes)
        self.index_table = {str(k): int(v) for k, v in index_table.items()}
        self.output = tuple(output)
        self.norm_exponent = float(norm_exponent)

        self._node_map = {}
        for node in self.nodes:
            if node.id in self._node_map:
                raise DataError(f"duplicate node id {node.id}")
            self._node_map[node.id] = node

        carriers = {label: [] for label in self.index_table}
        for node in self.nodes:
            for label in node.indices:
                if label in carriers:
                    carriers[label].append(node.id)
        self._carriers = {k: tuple(v) for k, v in carriers.items()}

    @property
    def num_nodes(self):
        return len(self.nodes)

    def node(self, nid):
        return self._node_map[nid]

    @property
    def node_ids(self):
        return tuple(n.id for n in self.nodes)

    def dim(self, label):
        return self.index_table[label]

    def carriers(self, label):
        """Ids of the nodes that carry ``label``, in node order."""
        return self._carriers[label]

    def is_hyper(self, label):
        nc = len(self._carriers.get(label, ()))
        return nc >= 3 or (nc >= 2 and label in set(self.output))

    def hyperedges(self):
        return tuple(l for l in self.index_table if self.is_hyper(l))

    @property
    def has_hyperedges(self):
        return any(self.is_hyper(l) for l in self.index_table)

    def state_space(self):
        """Product of all index dimensions (exact integer)."""
        total = 1
        for d in self.index_table.values():
            total *= d
        return total

    def has_all_data(self):
        return all(n.data is not None for n in self.nodes)

    def replace(self, nodes=None, index_table=None, output=None,
                norm_exponent=None):
        return TensorNetwork(
            self.nodes if nodes is None else nodes,
            self.index_table if index_table is None else index_table,
            self.output if output is None else output,
            self.norm_exponent if norm_exponent is None else norm_exponent,
        )

    def __repr__(self):
        return (f"TensorNetwork(|V|={self.num_nodes}, "
                f"|E|={len(self.index_table)}, output={list(self.output)})")


# ------------------------------- validation ------------------------------- #

def validate(tn):
    """Check every structural invariant, returning a list of violations.

    An empty list means the network is well formed.  Violations are data,
    not exceptions: generators and loaders assert on the result.
    """
    problems = []
    output_set = set(tn.output)

    for label, dim in tn.index_table.items():
        if not isinstance(dim, int) or dim < 1:
            problems.append(f"index {label} has non-positive dim {dim}")

    for node in tn.nodes:
        seen = set()
        for label in node.indices:
            if label not in tn.index_table:
                problems.append(f"unknown index {label}@node{node.id}")
            if label in seen:
                problems.append(f"repeated index {label}@node{node.id}")
            seen.add(label)
        if node.data is not None:
            dims = tuple(tn.index_table.get(l, -1) for l in node.indices)
            if node.data.shape != dims:
                problems.append(
                    f"data shape {node.data.shape} != dims {dims}@node{node.id}"
                )
            elif not np.all(np.isfinite(node.data)):
                problems.append(f"non-finite data@node{node.id}")

    seen_out = set()
    for label in tn.output:
        if label not in tn.index_table:
            problems.append(f"unknown output index {label}")
        elif not tn.carriers(label):
            problems.append(f"output index {label} appears in no node")
        if label in seen_out:
            problems.append(f"repeated output index {label}")
        seen_out.add(label)

    del output_set
    return problems


# ------------------------------ einsum specs ------------------------------ #

def _tokenize_term(term):
    """Split one einsum term into labels; multi-char labels use brackets."""
    labels = []
    i = 0
    while i < len(term):
        ch = term[i]
        if ch == "[":
            j = term.find("]", i)
            if j < 0:
                raise DataError(f"unterminated '[' in term {term!r}")
            if j == i + 1:
                raise DataError(f"empty bracketed label in term {term!r}")
            labels.append(term[i + 1:j])
            i = j + 1
        elif ch in _LETTERS:
            labels.append(ch)
            i += 1
        else:
            raise DataError(f"bad character {ch!r} in term {term!r}")
    return labels


def format_label(label):
    """Render a label for einsum display, bracketing multi-char ones."""
    if len(label) == 1 and label in _LETTERS:
        return label
    return f"[{label}]"


def parse_einsum_spec(subscripts, shapes):
    """Build a network from an einsum spec string plus one shape per term.

    Parameters
    ----------
    subscripts : str
        ``"in1,in2,...->out"``.  Labels are single ASCII letters or
        bracketed multi-character strings like ``"[q17_t3]"``.
    shapes : sequence of tuple of int
        One shape per input term, giving the index dimensions.

    Returns
    -------
    TensorNetwork
        One (structural) node per term, dims from the shapes, output from
        the right-hand side.
    """
    spec = subscripts.replace(" ", "")
    if "->" not in spec:
        raise DataError("missing '->' in einsum spec")
    lhs, rhs = spec.split("->", 1)
    if "->" in rhs:
        raise DataError("multiple '->' in einsum spec")
    terms = [_tokenize_term(t) for t in lhs.split(",")]
    out = _tokenize_term(rhs)

    if len(terms) != len(shapes):
        raise DataError(
            f"{len(terms)} terms but {len(shapes)} shapes supplied")

    table = {}
    nodes = []
    for nid, (labels, shape) in enumerate(zip(terms, shapes)):
        shape = tuple(int(d) for d in shape)
        if len(labels) != len(shape):
            raise DataError(
                f"term {nid} has {len(labels)} indices but shape {shape}")
        if len(set(labels)) != len(labels):
            raise DataError(
                f"repeated index within term {nid}: {labels}")
        for label, d in zip(labels, shape):
            if d < 1:
                raise DataError(f"index {label} has non-positive dim {d}")
            if table.setdefault(label, d) != d:
                raise DataError(
                    f"index {label} has conflicting dims {table[label]} and {d}")
        nodes.append(TensorNode(nid, labels))

    if len(set(out)) != len(out):
        raise DataError(f"repeated output index in {rhs!r}")
    for label in out:
        if label not in table:
            raise DataError(f"unknown output index {label}")

    return TensorNetwork(nodes, table, out)


def from_arrays(subscripts, arrays):
    """Like :func:`parse_einsum_spec` but attaching the given dense arrays."""
    arrays = [np.asarray(a) for a in arrays]
    tn = parse_einsum_spec(subscripts, [a.shape for a in arrays])
    nodes = [TensorNode(n.id, n.indices, a) for n, a in zip(tn.nodes, arrays)]
    return tn.replace(nodes=nodes)


# ------------------------------ JSON format ------------------------------- #

def network_to_dict(tn):
    """Serialize to the JSON interchange structure.

    ``{"indices": {label: dim}, "output": [...], "tensors": [{"id",
    "indices", "data": base64 | null}], "norm_exponent": float}`` where data
    is little-endian complex128, row-major.
    """
    tensors = []
    for node in tn.nodes:
        if node.data is None:
            blob = None
        else:
            raw = np.ascontiguousarray(node.data, dtype="<c16").tobytes()
            blob = base64.b64encode(raw).decode("ascii")
        tensors.append({
            "id": node.id,
            "indices": list(node.indices),
            "data": blob,
        })
    return {
        "indices": {k: int(v) for k, v in tn.index_table.items()},
        "output": list(tn.output),
        "tensors": tensors,
        "norm_exponent": tn.norm_exponent,
    }


def network_from_dict(obj):
    """Inverse of :func:`network_to_dict`, with schema checking."""
    if not isinstance(obj, dict):
        raise DataError("network document must be a JSON object")
    for key in ("indices", "output", "tensors"):
        if key not in obj:
            raise DataError(f"missing key {key!r} in network document")
    table = obj["indices"]
    if not isinstance(table, dict):
        raise DataError("'indices' must be an object")
    nodes = []
    for entry in obj["tensors"]:
        if not isinstance(entry, dict) or "id" not in entry or "indices" not in entry:
            raise DataError("each tensor needs 'id' and 'indices'")
        labels = entry["indices"]
        blob = entry.get("data")
        if blob is None:
            data = None
        else:
            try:
                raw = base64.b64decode(blob, validate=True)
            except Exception as exc:
                raise DataError(f"bad base64 data: {exc}") from None
            dims = tuple(int(table[l]) for l in labels if l in table)
            if len(dims) != len(labels):
                missing = [l for l in labels if l not in table]
                raise DataError(f"unknown index {missing[0]} in tensor data")
            want = 16
            for d in dims:
                want *= d
            if len(raw) != want:
                raise DataError(
                    f"data length {len(raw)} != 16*prod(dims)={want} "
                    f"for node {entry['id']}")
            data = np.frombuffer(raw, dtype="<c16").reshape(dims).astype(
                np.complex128)
        nodes.append(TensorNode(entry["id"], labels, data))
    tn = TensorNetwork(nodes, table, obj["output"],
                       obj.get("norm_exponent", 0.0))
    problems = validate(tn)
    if problems:
        raise DataError("invalid network: " + "; ".join(problems))
    return tn


def save_network(tn, path):
    with open(path, "w") as fh:
        json.dump(network_to_dict(tn), fh, sort_keys=True)
        fh.write("\n")


def load_network(path):
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"not valid JSON: {exc}") from None
    return network_from_dict(obj)


def canonical_form(tn):
    """A comparable canonical structure: node/data content sorted by id."""
    obj = network_to_dict(tn)
    obj["tensors"] = sorted(obj["tensors"], key=lambda t: t["id"])
    return obj
