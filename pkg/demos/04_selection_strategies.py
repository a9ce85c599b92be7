"""Compare what each query strategy picks on one embedded graph."""

import numpy as np

from gcal.datasets import generate_sbm
from gcal.evaluation import predict_proba, train_probe
from gcal.graph import ego_homophily, mean_graph_homophily
from gcal.selection import (
    ALState,
    degree_select,
    entropy_select,
    featprop_select,
    minimax_scores,
    minimax_select,
    random_select,
)

g = generate_sbm([30, 30, 30], p_in=0.3, p_out=0.03, feat_dim=8, feat_noise=1.0, seed=3)
# stand-in embeddings: a linear image of the features
h = g.features @ np.random.default_rng(0).normal(size=(8, 6))
state = ALState(range(g.n), 10)

v = minimax_select(g, h, state)
print("minimax picks", v, "score", minimax_scores(g, h, [v])[0].round(4))
print("  its ego homophily", round(ego_homophily(g, v), 3), "vs graph mean", round(mean_graph_homophily(g), 3))
print("random picks", random_select(state, seed=0))
print("degree picks", degree_select(g, state), "with degree", g.degrees().max())
print("featprop batch", featprop_select(g, state, 5))

# entropy needs a classifier; here a probe fitted on three labeled nodes
for node in (0, 30, 60):
    state.label(node, g.labels[node])
probs = predict_proba(train_probe(h, state.labeled_pairs(), g.num_classes), h)
print("entropy picks", entropy_select(state, probs))
