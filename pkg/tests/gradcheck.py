"""Central finite-difference oracle for the full training objective."""

import numpy as np

from gcal.augment import AugmentConfig, make_view
from gcal.graph import Graph
from gcal.model import PARAM_NAMES, ModelParams, encode, init_params
from gcal.objective import ObjectiveConfig, PositiveSets, total_objective
from gcal.train import view_inputs


def random_instance(seed, n=12, m=5, h=4, d=3, n_labeled=5, num_classes=3):
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < 0.3
    g = Graph.from_edges(
        n, np.stack([iu[keep], ju[keep]], axis=1), rng.normal(size=(n, m)),
        rng.integers(num_classes, size=n), num_classes,
    )
    views = [view_inputs(make_view(g, AugmentConfig(0.2, 0.2, (seed, v)))) for v in (0, 1)]
    # perturb so biases are non-zero
    params = init_params(m, h, d, seed).map(lambda a: a + 0.1 * rng.normal(size=a.shape))
    labeled = [(int(i), int(g.labels[i])) for i in rng.choice(n, n_labeled, replace=False)]
    return params, views[0], views[1], PositiveSets(n, labeled)


def objective_value(params, inputs1, inputs2, positives, cfg):
    return total_objective(encode(*inputs1, params), encode(*inputs2, params), positives, cfg)


def finite_difference(params, inputs1, inputs2, positives, cfg=ObjectiveConfig(), step=1e-4):
    base = params.as_dict()
    out = {}
    for name in PARAM_NAMES:
        fd = np.zeros_like(base[name])
        for idx in np.ndindex(fd.shape):
            vals = []
            for sign in (1.0, -1.0):
                arr = base[name].copy()
                arr[idx] += sign * step
                p = ModelParams(**{**base, name: arr})
                vals.append(objective_value(p, inputs1, inputs2, positives, cfg))
            fd[idx] = (vals[0] - vals[1]) / (2 * step)
        out[name] = fd
    return out


def relative_error(analytic, numeric):
    """Largest absolute discrepancy over the tensor, relative to its largest numeric entry."""
    scale = max(np.abs(numeric).max(), np.abs(analytic).max(), 1e-12)
    return float(np.abs(analytic - numeric).max() / scale)
