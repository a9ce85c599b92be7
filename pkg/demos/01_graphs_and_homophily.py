"""Build small graphs and look at ego-network homophily."""

import numpy as np

from gcal.datasets import generate_sbm, sbm_expected_edges
from gcal.graph import Graph, ego_homophily, ego_homophily_all, mean_graph_homophily, normalize_adjacency

# a path 0-1-2-3 whose halves carry different labels
path = Graph.from_edges(4, np.array([[0, 1], [1, 2], [2, 3]]), np.eye(4), labels=[0, 0, 1, 1], num_classes=2)
print("degrees:", path.degrees())

# normalized adjacency with self-loops; the end nodes see themselves and one neighbour
print(normalize_adjacency(path).toarray().round(3))

# ego homophily counts same-label edges inside each node's closed 1-hop ego network
for v in range(path.n):
    print(f"node {v}: ego homophily {ego_homophily(path, v):.3f}")
print("graph mean:", round(mean_graph_homophily(path), 3))

# a stochastic block model with dense blocks is strongly homophilous
g = generate_sbm([60, 60, 60], p_in=0.25, p_out=0.02, feat_dim=32, feat_noise=1.0, seed=0)
mean, sd = sbm_expected_edges([60, 60, 60], 0.25, 0.02)
print(f"SBM: n={g.n}, |E|={g.num_edges} (expected {mean:.0f} +/- {sd:.0f})")

h = ego_homophily_all(g)
print("ego homophily quartiles:", np.nanpercentile(h, [25, 50, 75]).round(3))
print("graph mean:", round(mean_graph_homophily(g), 3))
