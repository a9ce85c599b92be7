"""Contrastive objectives over two projected views.

Notation used below: ``z1`` and ``z2`` are the projected embeddings of the
two views (``n x d``), ``theta(u, v) = exp(cos(u, v) / tau)`` is the critic,
and ``P(i)`` is the set of other labeled nodes sharing node ``i``'s label.

The per-anchor functions (:func:`pairwise_loss`,
:func:`supervised_pairwise_loss`) evaluate one term directly and serve as
the readable definition. :func:`total_objective_and_grad` evaluates every
anchor at once from the similarity matrices and also returns the gradient
with respect to ``z1`` and ``z2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class ObjectiveConfig:
    tau: float = 0.5
    lam: float = 1.0
    # "same": positives h_p come from the anchor's own view; "both": from both views
    positive_views: str = "same"
    # drop supervised positives from the negative sum (sensitivity option)
    exclude_positives_from_negatives: bool = False
    max_positives: int | None = None

    def __post_init__(self):
        if not self.tau > 0:
            raise InvalidArgument("tau must be positive")
        if self.lam < 0:
            raise InvalidArgument("lambda must be non-negative")
        if self.positive_views not in ("same", "both"):
            raise InvalidArgument("positive_views must be 'same' or 'both'")
        if self.max_positives is not None and self.max_positives < 0:
            raise InvalidArgument("max_positives must be non-negative")


class PositiveSets:
    """Per-node supervised positive index sets.

    Built from the labeled pairs in acquisition order. ``P(i)`` holds the
    other labeled nodes with ``i``'s label; unlabeled nodes get an empty
    set. With ``max_positives`` each set keeps only the earliest-acquired
    members, which can break the symmetry ``j in P(i) <=> i in P(j)``.
    """

    def __init__(self, n, labeled=(), max_positives=None):
        self.n = int(n)
        self._sets = [np.empty(0, dtype=np.int64) for _ in range(self.n)]
        by_class = {}
        for node, label in labeled:
            by_class.setdefault(int(label), []).append(int(node))
        for members in by_class.values():
            for i in members:
                others = [j for j in members if j != i]
                if max_positives is not None:
                    others = others[:max_positives]
                self._sets[i] = np.array(sorted(others), dtype=np.int64)

    @classmethod
    def empty(cls, n):
        return cls(n)

    def __getitem__(self, i):
        return self._sets[i]

    def __len__(self):
        return self.n

    def sizes(self):
        return np.array([len(s) for s in self._sets], dtype=np.float64)

    def mask(self):
        """Dense ``n x n`` 0/1 matrix with ``mask[i, j] = 1`` iff ``j in P(i)``."""
        out = np.zeros((self.n, self.n))
        for i, s in enumerate(self._sets):
            out[i, s] = 1.0
        return out

    def is_empty(self):
        return all(len(s) == 0 for s in self._sets)


def _unit(z):
    z = np.asarray(z, dtype=np.float64)
    return z / np.maximum(np.linalg.norm(z, axis=-1, keepdims=True), NORM_FLOOR)


def critic(u, v, tau):
    """``exp(cos(u, v) / tau)``; norms are floored at 1e-12 so zero vectors give cos 0."""
    return float(np.exp(np.dot(_unit(u), _unit(v)) / tau))


def _check_views(z1, z2):
    if z1.shape != z2.shape or z1.ndim != 2:
        raise InvalidArgument("both views must be n x d matrices of the same shape")
    if z1.shape[0] < 2:
        raise InvalidArgument("need at least two nodes so that negatives exist")


def _anchor_terms(i, z1, z2, tau):
    """Critic values from anchor ``z1[i]`` to every row of ``z1`` and ``z2``."""
    u = _unit(z1[i])
    s_same = np.exp(_unit(z1) @ u / tau)
    s_other = np.exp(_unit(z2) @ u / tau)
    return s_same, s_other


def pairwise_loss(i, z1, z2, cfg):
    """NT-Xent loss for anchor ``z1[i]`` with positive ``z2[i]``."""
    z1, z2 = np.asarray(z1, float), np.asarray(z2, float)
    _check_views(z1, z2)
    s_same, s_other = _anchor_terms(i, z1, z2, cfg.tau)
    pos = s_other[i]
    others = np.arange(len(z1)) != i
    neg = s_same[others].sum() + s_other[others].sum()
    return float(-np.log(pos / (pos + neg)))


def supervised_pairwise_loss(i, z1, z2, positives, cfg):
    """NT-Xent loss for anchor ``z1[i]`` with the supervised positives of ``P(i)`` added.

    The weighted positive sum enters numerator and denominator alike; the
    negative sum over ``j != i`` is left untouched unless
    ``cfg.exclude_positives_from_negatives`` is set.
    """
    z1, z2 = np.asarray(z1, float), np.asarray(z2, float)
    _check_views(z1, z2)
    s_same, s_other = _anchor_terms(i, z1, z2, cfg.tau)
    P = positives[i] if cfg.lam > 0 else np.empty(0, dtype=np.int64)
    pos = s_other[i]
    sup = s_same[P].sum()
    if cfg.positive_views == "both":
        sup += s_other[P].sum()
    pos = pos + cfg.lam * sup
    others = np.arange(len(z1)) != i
    if cfg.exclude_positives_from_negatives:
        others[P] = False
    neg = s_same[others].sum() + s_other[others].sum()
    return float(-np.log(pos / (pos + neg)))


def contrastive_objective(z1, z2, cfg):
    """Unsupervised objective: mean of both view orders of :func:`pairwise_loss`."""
    n = len(z1)
    total = 0.0
    for i in range(n):
        total += pairwise_loss(i, z1, z2, cfg) + pairwise_loss(i, z2, z1, cfg)
    return total / (2 * n)


def total_objective(z1, z2, positives, cfg):
    return total_objective_and_grad(z1, z2, positives, cfg, need_grad=False)


def total_objective_and_grad(z1, z2, positives, cfg, need_grad=True):
    """Label-augmented objective averaged over nodes, weighted by ``1 / (|P(i)| + 1)``.

    With ``lam == 0`` the positive sets are ignored, so the value equals
    :func:`contrastive_objective`.

    Returns the value, or ``(value, dz1, dz2)`` when ``need_grad``.
    """
    z1, z2 = np.asarray(z1, float), np.asarray(z2, float)
    _check_views(z1, z2)
    n = len(z1)
    tau, lam = cfg.tau, cfg.lam
    # lambda = 0 switches supervision off entirely, weights included
    if positives is None or cfg.lam == 0:
        positives = PositiveSets.empty(n)
    pm = positives.mask()
    w = 1.0 / (positives.sizes() + 1.0)
    coef = w / (2 * n)

    r1 = np.linalg.norm(z1, axis=1, keepdims=True)
    r2 = np.linalg.norm(z2, axis=1, keepdims=True)
    u1, u2 = z1 / np.maximum(r1, NORM_FLOOR), z2 / np.maximum(r2, NORM_FLOOR)
    s11 = np.exp(u1 @ u1.T / tau)
    s12 = np.exp(u1 @ u2.T / tau)
    s22 = np.exp(u2 @ u2.T / tau)
    s21 = s12.T

    neg_mask = 1.0 - np.eye(n)
    if cfg.exclude_positives_from_negatives:
        neg_mask = neg_mask * (1.0 - pm)
    both = 1.0 if cfg.positive_views == "both" else 0.0

    def side(s_same, s_cross):
        num = np.diag(s_cross) + lam * ((pm * s_same).sum(1) + both * (pm * s_cross).sum(1))
        den = num + (neg_mask * (s_same + s_cross)).sum(1)
        return num, den

    num1, den1 = side(s11, s12)
    num2, den2 = side(s22, s21)
    loss = np.log(den1) - np.log(num1) + np.log(den2) - np.log(num2)
    value = float(np.sum(coef * loss))
    if not need_grad:
        return value

    eye = np.eye(n)

    def coeffs(num, den):
        c = coef[:, None]
        inv_num, inv_den = (1.0 / num)[:, None], (1.0 / den)[:, None]
        d_same = c * ((lam * pm + neg_mask) * inv_den - lam * pm * inv_num)
        cross_pos = eye + both * lam * pm
        d_cross = c * ((cross_pos + neg_mask) * inv_den - cross_pos * inv_num)
        return d_same, d_cross

    d11, d12 = coeffs(num1, den1)
    d22, d21 = coeffs(num2, den2)
    # derivatives with respect to the logits cos/tau
    g11, g12, g22, g21 = d11 * s11, d12 * s12, d22 * s22, d21 * s21
    du1 = ((g11 + g11.T) @ u1 + g12 @ u2 + g21.T @ u2) / tau
    du2 = ((g22 + g22.T) @ u2 + g12.T @ u1 + g21 @ u1) / tau

    def through_norm(du, z, r):
        # below the floor the normalization is a constant scaling
        above = r > NORM_FLOOR
        denom = np.maximum(r, NORM_FLOOR)
        radial = np.sum(du * z, axis=1, keepdims=True)
        scale = np.divide(radial, r ** 3, out=np.zeros_like(r), where=above)
        return du / denom - z * scale

    return value, through_norm(du1, z1, r1), through_norm(du2, z2, r2)
