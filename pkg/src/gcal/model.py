"""Two-layer GCN encoder with an MLP projection head, gradients and Adam.

Shapes, with ``n`` nodes, ``m`` input features, ``h`` hidden units and
``d`` output units::

    H = A relu(A X W1) W2                 (n, d)   encoder
    Z = elu(H G1^T + b1) G2^T + b2        (n, d)   projection head

Gradients are written out by hand. Each ``*_forward`` returns the output
together with a cache that the matching ``*_backward`` consumes.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import InvalidArgument, NumericFailure

PARAM_NAMES = ("W1", "W2", "G1", "b1", "G2", "b2")


@dataclass(frozen=True, eq=False)
class ModelParams:
    W1: np.ndarray
    W2: np.ndarray
    G1: np.ndarray
    b1: np.ndarray
    G2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        m, h = self.W1.shape
        h2, d = self.W2.shape
        if h2 != h:
            raise InvalidArgument(f"W1 is {self.W1.shape} but W2 is {self.W2.shape}")
        for name, shape in (("G1", (d, d)), ("b1", (d,)), ("G2", (d, d)), ("b2", (d,))):
            if getattr(self, name).shape != shape:
                raise InvalidArgument(f"{name} must have shape {shape}")

    def as_dict(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}

    @classmethod
    def from_dict(cls, d):
        return cls(**{name: np.asarray(d[name], dtype=np.float64) for name in PARAM_NAMES})

    def map(self, fn):
        return ModelParams(**{name: fn(getattr(self, name)) for name in PARAM_NAMES})

    @property
    def dims(self):
        return self.W1.shape[0], self.W1.shape[1], self.W2.shape[1]


def glorot_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_params(m, hidden=128, out_dim=128, seed=None):
    """Glorot-uniform weights, zero biases."""
    rng = np.random.default_rng(seed)
    return ModelParams(
        W1=glorot_uniform(rng, m, hidden),
        W2=glorot_uniform(rng, hidden, out_dim),
        G1=glorot_uniform(rng, out_dim, out_dim),
        b1=np.zeros(out_dim),
        G2=glorot_uniform(rng, out_dim, out_dim),
        b2=np.zeros(out_dim),
    )


def _elu(x):
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def gcn_forward(adj, x, p, return_cache=False):
    """Encoder output ``A relu(A X W1) W2`` (ReLU hidden layer, linear output)."""
    x = np.asarray(x, dtype=np.float64)
    if adj.shape != (x.shape[0], x.shape[0]):
        raise InvalidArgument(f"adjacency {adj.shape} does not match {x.shape[0]} feature rows")
    if x.shape[1] != p.W1.shape[0]:
        raise InvalidArgument(f"feature dim {x.shape[1]} != W1 rows {p.W1.shape[0]}")
    ax = adj @ x
    pre = ax @ p.W1
    hid = np.maximum(pre, 0.0)
    ah = adj @ hid
    out = ah @ p.W2
    if not np.all(np.isfinite(out)):
        raise NumericFailure("non-finite encoder output")
    if return_cache:
        return out, (adj, ax, pre, ah)
    return out


def gcn_backward(cache, grad_out, p):
    """Gradients of the encoder w.r.t. ``W1`` and ``W2`` given ``dL/dH``."""
    adj, ax, pre, ah = cache
    dW2 = ah.T @ grad_out
    dhid = adj.T @ (grad_out @ p.W2.T)
    dpre = dhid * (pre > 0)
    dW1 = ax.T @ dpre
    return dW1, dW2


def project(h, p, return_cache=False):
    """Projection head ``G2 elu(G1 h + b1) + b2``; accepts one row or a matrix of rows."""
    h = np.asarray(h, dtype=np.float64)
    a = h @ p.G1.T + p.b1
    e = _elu(a)
    z = e @ p.G2.T + p.b2
    if return_cache:
        return z, (h, a, e)
    return z


def project_backward(cache, grad_z, p):
    """Returns ``(dH, dG1, db1, dG2, db2)``."""
    h, a, e = cache
    dG2 = grad_z.T @ e
    db2 = grad_z.sum(axis=0)
    de = grad_z @ p.G2
    da = de * np.where(a > 0, 1.0, e + 1.0)
    dG1 = da.T @ h
    db1 = da.sum(axis=0)
    dh = da @ p.G1
    return dh, dG1, db1, dG2, db2


def encode(adj, x, p, return_cache=False):
    """Encoder followed by the projection head for one view."""
    if not return_cache:
        return project(gcn_forward(adj, x, p), p)
    h, gcache = gcn_forward(adj, x, p, return_cache=True)
    z, pcache = project(h, p, return_cache=True)
    return z, (gcache, pcache)


def backward(caches, grads_z, p):
    """Accumulate parameter gradients over views.

    ``caches`` and ``grads_z`` hold one entry per view, as returned by
    :func:`encode` and by the loss. The result is a ``ModelParams`` of
    gradients; a non-finite entry raises :class:`NumericFailure` naming
    the parameter.
    """
    acc = {name: np.zeros_like(v) for name, v in p.as_dict().items()}
    for (gcache, pcache), gz in zip(caches, grads_z):
        dh, dG1, db1, dG2, db2 = project_backward(pcache, gz, p)
        dW1, dW2 = gcn_backward(gcache, dh, p)
        for name, g in zip(PARAM_NAMES, (dW1, dW2, dG1, db1, dG2, db2)):
            acc[name] += g
    for name, g in acc.items():
        if not np.all(np.isfinite(g)):
            raise NumericFailure(f"non-finite gradient for {name}", parameter=name)
    return ModelParams(**acc)


@dataclass(frozen=True, eq=False)
class AdamState:
    m: ModelParams
    v: ModelParams
    t: int = 0
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros_like(cls, p, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        zero = p.map(np.zeros_like)
        return cls(zero, zero, 0, lr, beta1, beta2, eps)


def adam_step(p, grads, s):
    """One bias-corrected Adam update. Returns new ``(params, state)``."""
    if s.lr <= 0:
        raise InvalidArgument("learning rate must be positive")
    t = s.t + 1
    bc1 = 1.0 - s.beta1 ** t
    bc2 = 1.0 - s.beta2 ** t
    new_p, new_m, new_v = {}, {}, {}
    for name in PARAM_NAMES:
        g = getattr(grads, name)
        m = s.beta1 * getattr(s.m, name) + (1.0 - s.beta1) * g
        v = s.beta2 * getattr(s.v, name) + (1.0 - s.beta2) * (g * g)
        new_m[name], new_v[name] = m, v
        step = (s.lr / bc1) * m / (np.sqrt(v / bc2) + s.eps)
        new_p[name] = getattr(p, name) - step
    state = replace(s, m=ModelParams(**new_m), v=ModelParams(**new_v), t=t)
    return ModelParams(**new_p), state


# Checkpoint layout: 8-byte little-endian unsigned header length, the UTF-8
# JSON header, then every tensor in header order as little-endian float64,
# C order.
CHECKPOINT_FORMAT = "gcal-checkpoint-v1"


def save_checkpoint(path, params, state=None):
    tensors = [(name, getattr(params, name)) for name in PARAM_NAMES]
    header = {"format": CHECKPOINT_FORMAT, "dtype": "<f8", "tensors": []}
    if state is not None:
        tensors += [(f"adam.m.{k}", getattr(state.m, k)) for k in PARAM_NAMES]
        tensors += [(f"adam.v.{k}", getattr(state.v, k)) for k in PARAM_NAMES]
        header["adam"] = {f.name: getattr(state, f.name) for f in fields(state) if f.name not in ("m", "v")}
    header["tensors"] = [{"name": name, "shape": list(a.shape)} for name, a in tensors]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(Path(path), "wb") as fh:
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for _, a in tensors:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns ``(params, state)``; ``state`` is None when none was saved."""
    raw = Path(path).read_bytes()
    (size,) = struct.unpack_from("<Q", raw, 0)
    header = json.loads(raw[8:8 + size].decode("utf-8"))
    if header.get("format") != CHECKPOINT_FORMAT:
        raise InvalidArgument("not a gcal checkpoint")
    offset = 8 + size
    arrays = {}
    for spec in header["tensors"]:
        count = int(np.prod(spec["shape"], dtype=np.int64))
        a = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        arrays[spec["name"]] = a.reshape(spec["shape"]).astype(np.float64)
        offset += 8 * count
    params = ModelParams.from_dict(arrays)
    if "adam" not in header:
        return params, None
    m = ModelParams.from_dict({k: arrays[f"adam.m.{k}"] for k in PARAM_NAMES})
    v = ModelParams.from_dict({k: arrays[f"adam.v.{k}"] for k in PARAM_NAMES})
    return params, AdamState(m, v, **header["adam"])
