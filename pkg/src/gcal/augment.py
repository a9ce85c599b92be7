"""Stochastic graph views: edge removal and feature-dimension masking."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .graph import Graph


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise InvalidArgument(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class AugmentConfig:
    p_e: float = 0.2
    p_n: float = 0.2
    seed: int | None = 0
    per_node_mask: bool = False

    def __post_init__(self):
        _check_prob("p_e", self.p_e)
        _check_prob("p_n", self.p_n)


@dataclass(frozen=True, eq=False)
class GraphView:
    graph: Graph
    feature_mask: np.ndarray
    seed: object


def drop_edges(g, p_e, seed):
    """Keep each undirected edge with probability ``1 - p_e``.

    One Bernoulli draw per undirected edge, so both arcs share a fate.
    Returns the kept edges as an ``(E', 2)`` array with ``u < v``.
    """
    _check_prob("p_e", p_e)
    edges = g.edge_list()
    keep = np.random.default_rng(seed).random(len(edges)) >= p_e
    return edges[keep]


def mask_features(x, p_n, seed, per_node=False):
    """Zero whole feature dimensions with probability ``p_n``.

    A single mask of length ``m`` is shared by every row. With ``per_node``
    each row draws its own mask and the returned mask is ``(n, m)``.
    """
    _check_prob("p_n", p_n)
    x = np.asarray(x, dtype=np.float64)
    rng = np.random.default_rng(seed)
    shape = x.shape if per_node else x.shape[1:]
    mask = (rng.random(shape) >= p_n).astype(np.float64)
    return x * mask, mask


def make_view(g, cfg):
    """Draw one augmented view; edge and feature draws use independent substreams."""
    edge_seed, feat_seed = np.random.SeedSequence(cfg.seed).spawn(2)
    edges = drop_edges(g, cfg.p_e, edge_seed)
    x, mask = mask_features(g.features, cfg.p_n, feat_seed, per_node=cfg.per_node_mask)
    return GraphView(g.with_edges(edges, x), mask, cfg.seed)
