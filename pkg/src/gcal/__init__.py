"""Graph active learning with a contrastive GCN encoder and minimax node selection."""

from .augment import AugmentConfig, GraphView, drop_edges, make_view, mask_features
from .datasets import Split, generate_sbm, load_bundle, make_split, write_bundle
from .graph import (
    Graph,
    ego_homophily,
    k_hop_neighbors,
    mean_graph_homophily,
    normalize_adjacency,
)
from .model import AdamState, ModelParams, adam_step, gcn_forward, init_params, project
from .objective import ObjectiveConfig, PositiveSets, critic, total_objective
from .selection import ALState

__version__ = "0.1.0"
