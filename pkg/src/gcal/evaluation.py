"""Downstream probe classifier, F1 scores and homophily reporting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidState
from .graph import ego_homophily, mean_graph_homophily


@dataclass(frozen=True)
class ProbeConfig:
    lr: float = 0.01
    max_iter: int = 2000
    tol: float = 1e-7
    normalize: bool = True


@dataclass(frozen=True, eq=False)
class ProbeModel:
    weights: np.ndarray  # (d, C)
    bias: np.ndarray  # (C,)
    normalize: bool = True
    losses: tuple = ()

    @property
    def num_classes(self):
        return len(self.bias)


def _prepare(h, normalize):
    h = np.asarray(h, dtype=np.float64)
    if not normalize:
        return h
    norms = np.linalg.norm(h, axis=1, keepdims=True)
    return np.divide(h, norms, out=np.zeros_like(h), where=norms > 0)


def _softmax(logits):
    logits = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def train_probe(h, labeled, num_classes, cfg=ProbeConfig(), seed=None):
    """Multinomial logistic regression on ``h`` by full-batch gradient descent.

    ``labeled`` is a sequence of ``(node, label)`` pairs indexing rows of
    ``h``. Weights start at zero, so ``seed`` is accepted for interface
    symmetry but the fit is deterministic regardless.
    """
    labeled = list(labeled)
    if not labeled:
        raise InvalidState("cannot train a probe without labeled nodes")
    nodes = np.array([v for v, _ in labeled], dtype=np.int64)
    y = np.array([c for _, c in labeled], dtype=np.int64)
    if y.min() < 0 or y.max() >= num_classes:
        raise InvalidArgument("label outside [0, num_classes)")
    x = _prepare(h, cfg.normalize)[nodes]
    N = len(y)
    onehot = np.zeros((N, num_classes))
    onehot[np.arange(N), y] = 1.0
    W = np.zeros((x.shape[1], num_classes))
    b = np.zeros(num_classes)
    losses = []
    prev = np.inf
    for _ in range(cfg.max_iter):
        p = _softmax(x @ W + b)
        loss = -np.mean(np.log(np.maximum(p[np.arange(N), y], 1e-300)))
        losses.append(loss)
        if prev - loss < cfg.tol and np.isfinite(prev):
            break
        prev = loss
        grad = (p - onehot) / N
        W -= cfg.lr * (x.T @ grad)
        b -= cfg.lr * grad.sum(axis=0)
    return ProbeModel(W, b, cfg.normalize, tuple(losses))


def predict_proba(model, h):
    x = _prepare(h, model.normalize)
    if x.shape[1] != model.weights.shape[0]:
        raise InvalidArgument("embedding width does not match the probe")
    return _softmax(x @ model.weights + model.bias)


def predict(model, h):
    return np.argmax(predict_proba(model, h), axis=1)


def f1_scores(pred, truth, num_classes):
    """Micro- and macro-averaged F1. A class with no support and no predictions scores 0."""
    pred, truth = np.asarray(pred, dtype=np.int64), np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape:
        raise InvalidArgument("pred and truth must have equal length")
    if len(truth) == 0:
        raise InvalidArgument("empty label vectors")
    for arr in (pred, truth):
        if arr.min() < 0 or arr.max() >= num_classes:
            raise InvalidArgument("label outside [0, num_classes)")
    tp = np.bincount(truth[pred == truth], minlength=num_classes).astype(float)
    n_pred = np.bincount(pred, minlength=num_classes).astype(float)
    n_true = np.bincount(truth, minlength=num_classes).astype(float)
    denom = n_pred + n_true
    per_class = np.divide(2 * tp, denom, out=np.zeros(num_classes), where=denom > 0)
    micro = 2 * tp.sum() / (len(pred) + len(truth))
    return float(micro), float(per_class.mean())


def per_class_scores(pred, truth, num_classes):
    """Per-class ``(precision, recall, f1)`` arrays."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    tp = np.bincount(truth[pred == truth], minlength=num_classes).astype(float)
    n_pred = np.bincount(pred, minlength=num_classes).astype(float)
    n_true = np.bincount(truth, minlength=num_classes).astype(float)
    precision = np.divide(tp, n_pred, out=np.zeros(num_classes), where=n_pred > 0)
    recall = np.divide(tp, n_true, out=np.zeros(num_classes), where=n_true > 0)
    s = precision + recall
    f1 = np.divide(2 * precision * recall, s, out=np.zeros(num_classes), where=s > 0)
    return precision, recall, f1


def homophily_report(g, selected):
    """``(selected mean, graph mean, relative improvement in %)`` of ego homophily."""
    selected = list(selected)
    if not selected:
        raise InvalidArgument("no selected nodes")
    sel = float(np.mean([ego_homophily(g, v) for v in selected]))
    base = mean_graph_homophily(g)
    return sel, base, 100.0 * (sel - base) / base
