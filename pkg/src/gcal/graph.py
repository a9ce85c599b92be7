"""Undirected graph storage, GCN normalization and homophily statistics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import InvalidArgument, InvalidState, UndefinedValue


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable undirected graph in CSR form.

    Every undirected edge is stored as two arcs, column indices are strictly
    increasing within each row and no self-loops are kept. ``features`` is a
    dense ``(n, m)`` float64 matrix; ``labels`` is optional.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    features: np.ndarray
    labels: np.ndarray | None = None
    num_classes: int | None = None
    _adj: sp.csr_array | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.n)
        object.__setattr__(self, "n", n)
        indptr = np.asarray(self.indptr, dtype=np.int64)
        indices = np.asarray(self.indices, dtype=np.int64)
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim != 2 or features.shape[0] != n:
            raise InvalidArgument(f"features must have shape (n, m) with n={n}, got {features.shape}")
        if indptr.shape != (n + 1,) or indptr[0] != 0 or indptr[-1] != len(indices):
            raise InvalidArgument("malformed CSR row offsets")
        if np.any(np.diff(indptr) < 0):
            raise InvalidArgument("CSR row offsets must be non-decreasing")
        if len(indices) and (indices.min() < 0 or indices.max() >= n):
            raise InvalidArgument("CSR column index out of range")
        rows = np.repeat(np.arange(n), np.diff(indptr))
        if np.any(rows == indices):
            raise InvalidArgument("self-loops are not stored in a Graph")
        # strictly increasing columns within a row
        same_row = rows[1:] == rows[:-1]
        if np.any(np.diff(indices)[same_row] <= 0):
            raise InvalidArgument("column indices must be strictly increasing within each row")
        adj = sp.csr_array((np.ones(len(indices)), indices, indptr), shape=(n, n))
        if (adj != adj.T).nnz:
            raise InvalidArgument("adjacency must be symmetric")
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (n,):
                raise InvalidArgument(f"labels must have length {n}")
            C = int(self.num_classes) if self.num_classes is not None else int(labels.max(initial=-1)) + 1
            if len(labels) and (labels.min() < 0 or labels.max() >= C):
                raise InvalidArgument(f"labels must lie in [0, {C})")
            object.__setattr__(self, "labels", _frozen(labels))
            object.__setattr__(self, "num_classes", C)
        object.__setattr__(self, "indptr", _frozen(indptr))
        object.__setattr__(self, "indices", _frozen(indices))
        object.__setattr__(self, "features", _frozen(features))
        object.__setattr__(self, "_adj", adj)

    @classmethod
    def from_edges(cls, n, edges, features, labels=None, num_classes=None):
        """Build a graph from an edge list, symmetrizing and deduplicating it.

        Self-loops in ``edges`` are dropped.
        """
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(edges) and (edges.min() < 0 or edges.max() >= n):
            raise InvalidArgument("edge endpoint out of range")
        edges = edges[edges[:, 0] != edges[:, 1]]
        rows = np.concatenate([edges[:, 0], edges[:, 1]])
        cols = np.concatenate([edges[:, 1], edges[:, 0]])
        a = sp.coo_array((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        a.sum_duplicates()
        a.sort_indices()
        return cls(n, a.indptr, a.indices, features, labels, num_classes)

    @property
    def num_edges(self):
        """Number of undirected edges."""
        return len(self.indices) // 2

    @property
    def num_features(self):
        return self.features.shape[1]

    def adjacency(self):
        """Binary adjacency as a scipy CSR array (no self-loops)."""
        return self._adj

    def degrees(self):
        return np.diff(self.indptr)

    def neighbors(self, v):
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edge_list(self):
        """Undirected edges as an ``(E, 2)`` array with ``u < v``, sorted."""
        rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = rows < self.indices
        return np.stack([rows[keep], self.indices[keep]], axis=1)

    def with_edges(self, edges, features=None):
        """A new graph over the same nodes with a different edge set."""
        return Graph.from_edges(
            self.n,
            edges,
            self.features if features is None else features,
            self.labels,
            self.num_classes,
        )


def normalize_adjacency(g):
    """Return ``D^-1/2 (A + I) D^-1/2`` as a CSR array.

    Entry ``(u, v)`` is computed as ``1 / sqrt(d_u * d_v)`` so that regular
    graphs give exactly ``1 / (k + 1)``.
    """
    a = g.adjacency() + sp.eye_array(g.n, format="csr")
    a = sp.csr_array(a)
    a.sort_indices()
    deg = np.asarray(a.sum(axis=1)).ravel()
    rows = np.repeat(np.arange(g.n), np.diff(a.indptr))
    values = 1.0 / np.sqrt(deg[rows] * deg[a.indices])
    return sp.csr_array((values, a.indices.copy(), a.indptr.copy()), shape=(g.n, g.n))


def _check_node(g, v):
    if not 0 <= int(v) < g.n:
        raise InvalidArgument(f"node {v} out of range for graph with {g.n} nodes")


def k_hop_neighbors(g, v, k):
    """Nodes at shortest-path distance 1..k from ``v`` (``v`` itself excluded)."""
    _check_node(g, v)
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    seen = {int(v)}
    frontier = [int(v)]
    for _ in range(k):
        nxt = []
        for u in frontier:
            for w in g.neighbors(u):
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        if not nxt:
            break
        frontier = nxt
    seen.discard(int(v))
    return seen


def k_hop_matrix(g, k):
    """Boolean CSR pattern whose row ``i`` holds the k-hop neighbor set of ``i``."""
    if k < 1:
        raise InvalidArgument("k must be >= 1")
    step = sp.csr_array(g.adjacency() + sp.eye_array(g.n, format="csr"), dtype=bool)
    reach = step
    for _ in range(k - 1):
        reach = sp.csr_array(reach @ step, dtype=bool)
    reach = sp.csr_array(reach.astype(np.int8))
    reach.setdiag(0)
    reach.eliminate_zeros()
    reach.sort_indices()
    return reach


def _require_labels(g):
    if g.labels is None:
        raise InvalidState("graph has no labels")


def ego_homophily(g, v):
    """Fraction of intra-class edges in the closed 1-ego network of ``v``.

    The ego network holds ``v``, its neighbors, and every edge among them.
    Raises :class:`UndefinedValue` for an isolated node.
    """
    _require_labels(g)
    _check_node(g, v)
    nbrs = g.neighbors(v)
    if len(nbrs) == 0:
        raise UndefinedValue(f"node {v} is isolated; ego homophily is undefined")
    members = set(nbrs.tolist()) | {int(v)}
    total = intra = 0
    for u in members:
        for w in g.neighbors(u):
            w = int(w)
            if u < w and w in members:
                total += 1
                intra += g.labels[u] == g.labels[w]
    return intra / total


def ego_homophily_all(g):
    """Ego homophily for every node at once; NaN marks isolated nodes.

    Edges in the closed ego of v are its ``deg(v)`` incident edges plus the
    edges among its neighbors, i.e. ``deg(v) + (A^3)_vv / 2``.
    """
    _require_labels(g)
    a = g.adjacency()
    lab = g.labels
    rows = np.repeat(np.arange(g.n), np.diff(g.indptr))
    same = (lab[rows] == lab[g.indices]).astype(np.float64)
    a_same = sp.csr_array((same, g.indices, g.indptr), shape=(g.n, g.n))
    deg = g.degrees().astype(np.float64)
    among = (a @ a).multiply(a).sum(axis=1) / 2.0
    among_same = (a @ a_same).multiply(a).sum(axis=1) / 2.0
    total = deg + np.asarray(among).ravel()
    intra = np.asarray(a_same.sum(axis=1)).ravel() + np.asarray(among_same).ravel()
    out = np.full(g.n, np.nan)
    ok = deg > 0
    out[ok] = intra[ok] / total[ok]
    return out


def mean_graph_homophily(g):
    """Mean ego homophily over all non-isolated nodes."""
    _require_labels(g)
    if g.num_edges == 0:
        raise InvalidState("graph has no edges")
    h = ego_homophily_all(g)
    return float(np.mean(h[~np.isnan(h)]))
