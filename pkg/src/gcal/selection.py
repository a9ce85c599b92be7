"""Active-learning query strategies.

Every strategy picks from the unlabeled part of the pool and breaks ties by
the smallest node id, so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .errors import InvalidArgument, InvalidState
from .graph import k_hop_matrix
from .objective import PositiveSets

STRATEGIES = ("minimax", "random", "degree", "entropy", "featprop")


class ALState:
    """Labeled set, unlabeled pool and budget of one active-learning run."""

    def __init__(self, pool, budget):
        self.pool = np.array(sorted(int(v) for v in pool), dtype=np.int64)
        if budget > len(self.pool):
            raise InvalidArgument(f"budget {budget} exceeds pool size {len(self.pool)}")
        self.budget = int(budget)
        self.labeled = {}
        self.unlabeled = set(self.pool.tolist())

    @property
    def round(self):
        return len(self.labeled)

    @property
    def done(self):
        return len(self.labeled) >= self.budget

    def unlabeled_array(self):
        return np.array(sorted(self.unlabeled), dtype=np.int64)

    def labeled_pairs(self):
        return list(self.labeled.items())

    def label(self, node, y):
        node = int(node)
        if node not in self.unlabeled:
            raise InvalidState(f"node {node} is not in the unlabeled pool")
        if self.done:
            raise InvalidState("budget exhausted")
        self.unlabeled.remove(node)
        self.labeled[node] = int(y)

    def positive_sets(self, n, max_positives=None):
        return PositiveSets(n, self.labeled_pairs(), max_positives)


@dataclass(frozen=True)
class SelectionScore:
    node: int
    score: float
    strategy: str


def _candidates(state):
    cand = state.unlabeled_array()
    if len(cand) == 0:
        raise InvalidState("no unlabeled nodes left")
    return cand


def minimax_scores(g, h, nodes, k=1, chunk=512):
    """Largest squared embedding distance from each node to its k-hop neighbors.

    Nodes without neighbors score ``inf``.
    """
    h = np.asarray(h, dtype=np.float64)
    nodes = np.asarray(nodes, dtype=np.int64)
    if k == 1:
        indptr, indices = g.indptr, g.indices
    else:
        reach = k_hop_matrix(g, k)
        indptr, indices = reach.indptr, reach.indices
    scores = np.full(len(nodes), np.inf)
    for start in range(0, len(nodes), chunk):
        block = nodes[start:start + chunk]
        lo, hi = indptr[block], indptr[block + 1]
        counts = hi - lo
        if counts.sum() == 0:
            continue
        cols = np.concatenate([indices[a:b] for a, b in zip(lo, hi)])
        rows = np.repeat(block, counts)
        diff = h[rows] - h[cols]
        dist = np.sum(diff * diff, axis=1)
        nz = counts > 0
        offsets = np.concatenate([[0], np.cumsum(counts)[:-1]])[nz]
        scores[start:start + chunk][nz] = np.maximum.reduceat(dist, offsets)
    return scores


def random_select(state, seed):
    """Uniform draw from the unlabeled pool, seeded by ``(seed, round)``."""
    cand = _candidates(state)
    rng = np.random.default_rng([int(seed), state.round])
    return int(cand[rng.integers(len(cand))])


def minimax_select(g, h, state, k=1, seed=0):
    """Unlabeled node whose farthest k-hop neighbor in embedding space is nearest.

    Isolated candidates are skipped; if every candidate is isolated the
    choice falls back to :func:`random_select`.
    """
    if np.shape(h)[0] != g.n:
        raise InvalidArgument("embedding rows must match node count")
    cand = _candidates(state)
    scores = minimax_scores(g, h, cand, k)
    if np.all(np.isinf(scores)):
        return random_select(state, seed)
    return int(cand[np.argmin(scores)])


def degree_select(g, state):
    cand = _candidates(state)
    return int(cand[np.argmax(g.degrees()[cand])])


def prediction_entropy(probs):
    """Row-wise Shannon entropy in nats, with ``0 log 0 = 0``."""
    probs = np.asarray(probs, dtype=np.float64)
    logs = np.log(probs, out=np.zeros_like(probs), where=probs > 0)
    return -np.sum(probs * logs, axis=1)


def entropy_select(state, probs):
    """Unlabeled node with the most uncertain predicted label distribution."""
    probs = np.asarray(probs, dtype=np.float64)
    if np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-6) or np.any(probs < 0):
        raise InvalidArgument("every probability row must be non-negative and sum to 1")
    cand = _candidates(state)
    return int(cand[np.argmax(prediction_entropy(probs[cand]))])


def k_medoids(points, k, seed, max_iter=100):
    """Alternating (Voronoi iteration) k-medoids on Euclidean distances.

    Returns ``(medoids, assignment)`` where ``medoids`` are sorted row
    indices into ``points`` and ``assignment[i]`` is the position of
    point ``i``'s medoid in that array.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= k <= n:
        raise InvalidArgument(f"k must lie in [1, {n}]")
    dist = cdist(points, points)
    rng = np.random.default_rng(seed)
    medoids = np.sort(rng.choice(n, size=k, replace=False))
    for _ in range(max_iter):
        assign = np.argmin(dist[:, medoids], axis=1)
        assign[medoids] = np.arange(k)
        new = medoids.copy()
        for c in range(k):
            members = np.flatnonzero(assign == c)
            cost = dist[np.ix_(members, members)].sum(axis=1)
            new[c] = members[np.argmin(cost)]
        new = np.sort(new)
        if np.array_equal(new, medoids):
            break
        medoids = new
    assign = np.argmin(dist[:, medoids], axis=1)
    assign[medoids] = np.arange(k)
    return medoids, assign


def featprop_select(g, state, b_remaining, seed=0):
    """Cluster unlabeled pool nodes on raw features; return medoids, largest cluster first."""
    cand = _candidates(state)
    if not 1 <= b_remaining <= len(cand):
        raise InvalidArgument(f"b_remaining must lie in [1, {len(cand)}]")
    medoids, assign = k_medoids(g.features[cand], b_remaining, seed)
    sizes = np.bincount(assign, minlength=len(medoids))
    nodes = cand[medoids]
    order = sorted(range(len(nodes)), key=lambda c: (-sizes[c], nodes[c]))
    return [int(nodes[c]) for c in order if int(nodes[c]) not in state.labeled]
