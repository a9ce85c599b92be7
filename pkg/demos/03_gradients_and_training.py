"""Check the hand-written gradients, then train the encoder for a few epochs."""

import numpy as np

from gcal.augment import AugmentConfig, make_view
from gcal.datasets import generate_sbm
from gcal.model import PARAM_NAMES, AdamState, ModelParams, encode, init_params
from gcal.objective import ObjectiveConfig, PositiveSets, total_objective
from gcal.train import embed, loss_and_grads, train_epochs, view_inputs

g = generate_sbm([8, 8], p_in=0.5, p_out=0.05, feat_dim=5, feat_noise=1.0, seed=0)
i1 = view_inputs(make_view(g, AugmentConfig(seed=1)))
i2 = view_inputs(make_view(g, AugmentConfig(seed=2)))
params = init_params(5, 4, 3, seed=0)
positives = PositiveSets(g.n, [(0, int(g.labels[0])), (3, int(g.labels[3])), (9, int(g.labels[9]))])
cfg = ObjectiveConfig(tau=0.5, lam=1.0)

loss, grads = loss_and_grads(params, i1, i2, positives, cfg)
print(f"loss {loss:.6f}")

# central differences on a handful of entries of every parameter
base = params.as_dict()
step = 1e-5
for name in PARAM_NAMES:
    idx = tuple(0 for _ in base[name].shape)
    vals = []
    for sign in (1, -1):
        arr = base[name].copy()
        arr[idx] += sign * step
        p = ModelParams(**{**base, name: arr})
        vals.append(total_objective(encode(*i1, p), encode(*i2, p), positives, cfg))
    fd = (vals[0] - vals[1]) / (2 * step)
    print(f"{name}{list(idx)}: analytic {getattr(grads, name)[idx]: .8f}  numeric {fd: .8f}")

# Adam on fixed views: the loss should go down
state = AdamState.zeros_like(params, lr=0.01)
params, state, losses = train_epochs(params, state, i1, i2, positives, cfg, epochs=100)
print("loss every 20 epochs:", np.round(losses[::20], 4))
print("embedding shape:", embed(g, params).shape)
