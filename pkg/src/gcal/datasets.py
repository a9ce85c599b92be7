"""Dataset bundles on disk, synthetic SBM graphs and evaluation splits.

A bundle is a directory holding four UTF-8 files::

    meta.json     {"name": ..., "n": ..., "m": ..., "C": ..., "directed": false}
    edges.tsv     one undirected edge per line: "<u>\\t<v>", 0-based ids
    features.csv  n rows of m comma-separated reals
    labels.txt    n lines, one class id each
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CountMismatchError,
    InvalidArgument,
    LabelRangeError,
    MalformedRowError,
    MissingFileError,
    NonFiniteFeatureError,
)
from .graph import Graph

BUNDLE_FILES = ("meta.json", "edges.tsv", "features.csv", "labels.txt")


def _read_text(path):
    if not path.is_file():
        raise MissingFileError(f"missing bundle file: {path}")
    return path.read_text(encoding="utf-8")


def load_bundle(path):
    """Read a dataset bundle directory into a :class:`Graph`."""
    path = Path(path)
    if not path.is_dir():
        raise MissingFileError(f"bundle directory not found: {path}")
    texts = {name: _read_text(path / name) for name in BUNDLE_FILES}

    try:
        meta = json.loads(texts["meta.json"])
        n, m, C = int(meta["n"]), int(meta["m"]), int(meta["C"])
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedRowError(f"bad meta.json: {exc}") from exc

    edges = []
    for lineno, line in enumerate(texts["edges.tsv"].splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise MalformedRowError(f"edges.tsv:{lineno}: expected two tab-separated ids")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise MalformedRowError(f"edges.tsv:{lineno}: non-integer node id") from None
        if not (0 <= u < n and 0 <= v < n):
            raise CountMismatchError(f"edges.tsv:{lineno}: node id outside [0, {n})")
        edges.append((u, v))

    rows = [r for r in texts["features.csv"].splitlines() if r.strip()]
    if len(rows) != n:
        raise CountMismatchError(f"features.csv has {len(rows)} rows, meta says n={n}")
    features = np.empty((n, m), dtype=np.float64)
    for i, row in enumerate(rows):
        cells = row.split(",")
        if len(cells) != m:
            raise CountMismatchError(f"features.csv:{i + 1}: {len(cells)} columns, meta says m={m}")
        try:
            features[i] = [float(c) for c in cells]
        except ValueError:
            raise MalformedRowError(f"features.csv:{i + 1}: unparsable value") from None
    if not np.all(np.isfinite(features)):
        raise NonFiniteFeatureError("features.csv contains non-finite values")

    lines = [r for r in texts["labels.txt"].splitlines() if r.strip()]
    if len(lines) != n:
        raise CountMismatchError(f"labels.txt has {len(lines)} lines, meta says n={n}")
    try:
        labels = np.array([int(x) for x in lines], dtype=np.int64)
    except ValueError:
        raise MalformedRowError("labels.txt: non-integer label") from None
    if labels.size and (labels.min() < 0 or labels.max() >= C):
        raise LabelRangeError(f"labels must lie in [0, {C})")

    return Graph.from_edges(n, np.array(edges, dtype=np.int64).reshape(-1, 2), features, labels, C)


def write_bundle(g, path, name="graph"):
    """Write ``g`` as a bundle. Features are written with ``repr`` so they round-trip exactly."""
    if g.labels is None:
        raise InvalidArgument("only labeled graphs can be written as bundles")
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    meta = {"name": name, "n": g.n, "m": g.num_features, "C": g.num_classes, "directed": False}
    (path / "meta.json").write_text(json.dumps(meta) + "\n", encoding="utf-8")
    (path / "edges.tsv").write_text(
        "".join(f"{u}\t{v}\n" for u, v in g.edge_list()), encoding="utf-8"
    )
    (path / "features.csv").write_text(
        "".join(",".join(repr(float(x)) for x in row) + "\n" for row in g.features),
        encoding="utf-8",
    )
    (path / "labels.txt").write_text("".join(f"{y}\n" for y in g.labels), encoding="utf-8")
    return path


def row_normalize(features):
    """Scale each row to unit L1 norm; all-zero rows stay zero."""
    s = np.abs(features).sum(axis=1, keepdims=True)
    return np.divide(features, s, out=np.zeros_like(features), where=s > 0)


def generate_sbm(blocks, p_in, p_out, feat_dim, feat_noise, seed):
    """Sample a stochastic block model graph with noisy one-hot block features."""
    blocks = [int(b) for b in blocks]
    if len(blocks) < 2 or min(blocks) < 1:
        raise InvalidArgument("need at least two non-empty blocks")
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise InvalidArgument("require 0 <= p_out <= p_in <= 1")
    if feat_dim < len(blocks):
        raise InvalidArgument("feat_dim must be at least the number of blocks")
    if feat_noise < 0:
        raise InvalidArgument("feat_noise must be non-negative")

    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(len(blocks)), blocks)
    n = len(labels)
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(labels[iu] == labels[ju], p_in, p_out)
    keep = rng.random(len(iu)) < prob
    edges = np.stack([iu[keep], ju[keep]], axis=1)

    features = np.zeros((n, feat_dim))
    features[np.arange(n), labels] = 1.0
    features += feat_noise * rng.standard_normal((n, feat_dim))
    return Graph.from_edges(n, edges, features, labels, len(blocks))


def sbm_expected_edges(blocks, p_in, p_out):
    """Closed-form mean and standard deviation of the SBM edge count."""
    blocks = [int(b) for b in blocks]
    n_in = sum(b * (b - 1) // 2 for b in blocks)
    n_out = (sum(blocks) ** 2 - sum(b * b for b in blocks)) // 2
    mean = n_in * p_in + n_out * p_out
    var = n_in * p_in * (1 - p_in) + n_out * p_out * (1 - p_out)
    return mean, math.sqrt(var)


@dataclass(frozen=True)
class Split:
    val: np.ndarray
    test: np.ndarray
    pool: np.ndarray
    seed: int
    fallback: bool


FULL_VAL, FULL_TEST = 500, 1000


def make_split(g, seed):
    """Uniform validation/test/pool split.

    Graphs with more than 1500 nodes get 500 validation and 1000 test nodes;
    smaller graphs fall back to 10% / 20% and the split records it.
    """
    n = g.n if isinstance(g, Graph) else int(g)
    fallback = n <= FULL_VAL + FULL_TEST
    if fallback:
        n_val, n_test = n // 10, n // 5
    else:
        n_val, n_test = FULL_VAL, FULL_TEST
    perm = np.random.default_rng(seed).permutation(n)
    val = np.sort(perm[:n_val])
    test = np.sort(perm[n_val:n_val + n_test])
    pool = np.sort(perm[n_val + n_test:])
    return Split(val, test, pool, seed, fallback)
