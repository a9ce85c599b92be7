"""Two stochastic views of one graph: edge dropping and feature masking."""

import numpy as np

from gcal.augment import AugmentConfig, make_view
from gcal.datasets import generate_sbm

g = generate_sbm([50, 50], p_in=0.2, p_out=0.02, feat_dim=16, feat_noise=1.0, seed=1)
print("original edges:", g.num_edges)

cfg1 = AugmentConfig(p_e=0.2, p_n=0.3, seed=10)
cfg2 = AugmentConfig(p_e=0.2, p_n=0.3, seed=11)
v1, v2 = make_view(g, cfg1), make_view(g, cfg2)

# about 80% of the edges survive in each view, and the two views differ
print("view edges:", v1.graph.num_edges, v2.graph.num_edges)
shared = set(map(tuple, v1.graph.edge_list())) & set(map(tuple, v2.graph.edge_list()))
print("edges kept by both views:", len(shared))

# one mask over feature dimensions, shared by all nodes of a view
print("masked dims in view 1:", np.flatnonzero(v1.feature_mask == 0))
print("masked dims in view 2:", np.flatnonzero(v2.feature_mask == 0))

# the same seed always reproduces the same view
again = make_view(g, cfg1)
print("reproducible:", np.array_equal(again.graph.edge_list(), v1.graph.edge_list()))
