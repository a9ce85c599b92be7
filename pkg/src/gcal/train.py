"""Joint contrastive training: loss, gradients and the epoch loop."""

from __future__ import annotations

from .graph import normalize_adjacency
from .model import adam_step, backward, encode, gcn_forward
from .objective import total_objective_and_grad


def view_inputs(view):
    """Normalized adjacency and features of a :class:`GraphView`."""
    return normalize_adjacency(view.graph), view.graph.features


def loss_and_grads(params, inputs1, inputs2, positives, cfg):
    """Objective value and parameter gradients for a pair of views.

    ``inputs1`` and ``inputs2`` are ``(normalized adjacency, features)``.
    """
    z1, c1 = encode(*inputs1, params, return_cache=True)
    z2, c2 = encode(*inputs2, params, return_cache=True)
    value, dz1, dz2 = total_objective_and_grad(z1, z2, positives, cfg)
    return value, backward([c1, c2], [dz1, dz2], params)


def train_epochs(params, state, inputs1, inputs2, positives, cfg, epochs):
    """Run ``epochs`` full-batch Adam steps on fixed views.

    Returns ``(params, state, losses)``.
    """
    losses = []
    for _ in range(epochs):
        value, grads = loss_and_grads(params, inputs1, inputs2, positives, cfg)
        params, state = adam_step(params, grads, state)
        losses.append(value)
    return params, state, losses


def embed(g, params, adj=None):
    """Encoder output on the unaugmented graph (no projection head)."""
    if adj is None:
        adj = normalize_adjacency(g)
    return gcn_forward(adj, g.features, params)
