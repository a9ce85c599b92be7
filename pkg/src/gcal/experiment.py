"""End-to-end active-learning runs, record files and summaries.

A run alternates contrastive training with label acquisition: after a
warm-up, each round draws two fresh views, trains for a few epochs with the
current supervised positives, embeds the unaugmented graph, queries one
node and records probe metrics. A last training block after the final
query produces the embeddings that are evaluated on the test split.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .augment import AugmentConfig, make_view
from .datasets import generate_sbm, load_bundle, make_split, row_normalize
from .errors import ConfigError, InvalidArgument, NumericFailure
from .evaluation import ProbeConfig, f1_scores, predict, predict_proba, train_probe
from .graph import Graph, ego_homophily_all, mean_graph_homophily, normalize_adjacency
from .model import AdamState, gcn_forward, init_params, save_checkpoint
from .objective import ObjectiveConfig
from .selection import (
    STRATEGIES,
    ALState,
    degree_select,
    entropy_select,
    featprop_select,
    minimax_scores,
    minimax_select,
    prediction_entropy,
    random_select,
)
from .train import train_epochs, view_inputs

# Published Cora and Citeseer results at b = 20C, (Micro-F1, Macro-F1) in percent.
# Kept for side-by-side reporting only.
REFERENCE_20C = {
    "cora": {
        "random": (78.31, 79.11),
        "degree": (80.68, 79.42),
        "entropy": (84.50, 82.92),
        "featprop": (83.94, 82.63),
        "minimax": (85.35, 84.02),
    },
    "citeseer": {
        "random": (67.80, 62.91),
        "degree": (67.21, 59.93),
        "entropy": (70.18, 64.91),
        "featprop": (69.95, 63.97),
        "minimax": (71.98, 66.44),
    },
}
# Mean ego homophily, original graph vs nodes selected by minimax at b = 20C.
REFERENCE_HOMOPHILY = {
    "cora": (0.810, 0.921),
    "citeseer": (0.736, 0.816),
    "pubmed": (0.802, 0.872),
    "computer": (0.778, 0.858),
    "photo": (0.828, 0.929),
}

STREAM_SPLIT, STREAM_INIT, STREAM_AUGMENT, STREAM_SELECT = 0, 1, 2, 3


def substream(seed, stream, *keys):
    return np.random.SeedSequence([int(seed), stream, *keys])


def _int_seed(seed, stream):
    return int(substream(seed, stream).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str | None = None
    sbm_blocks: tuple = (60, 60, 60)
    sbm_p_in: float = 0.25
    sbm_p_out: float = 0.02
    sbm_feat_dim: int = 32
    sbm_feat_noise: float = 1.0
    sbm_seed: int = 0
    row_normalize: bool = False
    budget: str = "20C"
    strategy: str = "minimax"
    p_e: float = 0.2
    p_n: float = 0.2
    per_node_mask: bool = False
    tau: float = 0.5
    lam: float = 1.0
    positive_views: str = "same"
    exclude_positives_from_negatives: bool = False
    max_positives: int | None = None
    hidden: int = 128
    out_dim: int = 128
    lr: float = 0.001
    warmup_epochs: int = 50
    epochs_per_round: int = 10
    max_epochs: int | None = None
    k_hops: int = 1
    seeds: tuple = (0,)
    out: str = "runs"
    featprop_recluster: bool = False
    probe_lr: float = 0.01
    probe_max_iter: int = 2000
    probe_tol: float = 1e-7
    round_metrics: bool = True
    tag: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        for name in ("p_e", "p_n"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1]")
        if not self.tau > 0:
            raise ConfigError("tau must be positive")
        if self.lam < 0:
            raise ConfigError("lam must be non-negative")
        if self.positive_views not in ("same", "both"):
            raise ConfigError("positive_views must be 'same' or 'both'")
        if not self.lr > 0:
            raise ConfigError("lr must be positive")
        if self.k_hops < 1:
            raise ConfigError("k_hops must be >= 1")
        if min(self.hidden, self.out_dim) < 1:
            raise ConfigError("hidden and out_dim must be positive")
        if min(self.warmup_epochs, self.epochs_per_round) < 0:
            raise ConfigError("epoch counts must be non-negative")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.dataset is None and not 0.0 <= self.sbm_p_out <= self.sbm_p_in <= 1.0:
            raise ConfigError("require 0 <= sbm_p_out <= sbm_p_in <= 1")
        parse_budget(self.budget, 1)

    def objective(self):
        return ObjectiveConfig(
            tau=self.tau,
            lam=self.lam,
            positive_views=self.positive_views,
            exclude_positives_from_negatives=self.exclude_positives_from_negatives,
            max_positives=self.max_positives,
        )

    def probe(self):
        return ProbeConfig(lr=self.probe_lr, max_iter=self.probe_max_iter, tol=self.probe_tol)


def parse_budget(budget, num_classes):
    """Literal count (``"60"``) or per-class form (``"20C"``)."""
    text = str(budget).strip()
    m = re.fullmatch(r"(\d+)\s*[Cc]", text)
    if m:
        value = int(m.group(1)) * num_classes
    elif text.isdigit():
        value = int(text)
    else:
        raise ConfigError(f"budget must be an integer or '<k>C', got {budget!r}")
    if value < 1:
        raise ConfigError("budget must be at least 1")
    return value


def _coerce(f, raw):
    """Parse a config value for dataclass field ``f`` from text."""
    raw = raw.strip()
    t = str(f.type)
    if raw.lower() in ("none", "") and "None" in t:
        return None
    try:
        if f.name in ("sbm_blocks", "seeds"):
            return tuple(int(x) for x in raw.split(",") if x.strip())
        if t.startswith("bool"):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if t.startswith("int"):
            return int(raw)
        if t.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {f.name}: {raw!r}") from None
    return raw


_FIELDS = {f.name: f for f in fields(ExperimentConfig)}
_ALIASES = {"lambda": "lam", "k": "k_hops", "budget_b": "budget"}


def config_from_mapping(values, base=None):
    """Apply string-valued overrides to ``base`` (defaults when None)."""
    updates = {}
    for key, raw in values.items():
        name = _ALIASES.get(key, key).replace("-", "_")
        if name not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        updates[name] = raw if not isinstance(raw, str) else _coerce(_FIELDS[name], raw)
    return replace(base or ExperimentConfig(), **updates)


def parse_config(text, base=None):
    """Parse flat ``key = value`` text; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = line.split("=", 1)
        values[key.strip()] = raw
    return config_from_mapping(values, base)


def load_config(path, base=None):
    return parse_config(Path(path).read_text(encoding="utf-8"), base)


def format_config(cfg):
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def load_graph(cfg):
    if cfg.dataset:
        g = load_bundle(cfg.dataset)
    else:
        g = generate_sbm(
            cfg.sbm_blocks, cfg.sbm_p_in, cfg.sbm_p_out, cfg.sbm_feat_dim, cfg.sbm_feat_noise, cfg.sbm_seed
        )
    if cfg.row_normalize:
        g = Graph(g.n, g.indptr, g.indices, row_normalize(g.features), g.labels, g.num_classes)
    return g


def dataset_name(cfg):
    if not cfg.dataset:
        return "sbm"
    meta = Path(cfg.dataset) / "meta.json"
    try:
        return str(json.loads(meta.read_text(encoding="utf-8")).get("name", "")).lower()
    except (OSError, ValueError):
        return ""


@dataclass(frozen=True)
class ExperimentRecord:
    tag: str
    strategy: str
    seed: int
    kind: str  # "round" or "final"
    round: int
    n_labeled: int
    node: int | None
    label: int | None
    score: float | None
    micro_f1: float | None
    macro_f1: float | None
    node_homophily: float | None
    graph_homophily: float
    epochs: int


CSV_COLUMNS = tuple(f.name for f in fields(ExperimentRecord))


def _evaluate(h, state, test, labels, C, probe_cfg):
    model = train_probe(h, state.labeled_pairs(), C, probe_cfg)
    return f1_scores(predict(model, h[test]), labels[test], C)


def run_experiment(cfg, seed, graph=None, checkpoint_dir=None):
    """Run one seed; yields one record per acquisition round plus a final record."""
    g = graph if graph is not None else load_graph(cfg)
    if g.labels is None:
        raise InvalidArgument("active learning needs ground-truth labels to query")
    C = g.num_classes
    budget = parse_budget(cfg.budget, C)
    split = make_split(g, substream(seed, STREAM_SPLIT))
    if budget > len(split.pool):
        raise ConfigError(f"budget {budget} exceeds pool size {len(split.pool)}")
    state = ALState(split.pool, budget)

    params = init_params(g.num_features, cfg.hidden, cfg.out_dim, substream(seed, STREAM_INIT))
    opt = AdamState.zeros_like(params, lr=cfg.lr)
    obj = cfg.objective()
    probe_cfg = cfg.probe()
    adj = normalize_adjacency(g)
    graph_h = mean_graph_homophily(g) if g.num_edges else math.nan
    ego = ego_homophily_all(g)
    select_seed = _int_seed(seed, STREAM_SELECT)
    epochs_used = 0
    queue = None

    def train(block, epochs):
        nonlocal params, opt, epochs_used
        if cfg.max_epochs is not None:
            epochs = min(epochs, cfg.max_epochs - epochs_used)
        if epochs <= 0:
            return
        views = [
            make_view(g, AugmentConfig(cfg.p_e, cfg.p_n, (int(seed), STREAM_AUGMENT, block, v), cfg.per_node_mask))
            for v in (0, 1)
        ]
        positives = state.positive_sets(g.n, cfg.max_positives)
        try:
            params, opt, _ = train_epochs(
                params, opt, view_inputs(views[0]), view_inputs(views[1]), positives, obj, epochs
            )
        except NumericFailure as exc:
            exc.round_index = state.round
            if checkpoint_dir is not None:
                Path(checkpoint_dir).mkdir(parents=True, exist_ok=True)
                save_checkpoint(Path(checkpoint_dir) / f"failed_seed{seed}_round{state.round}.ckpt", params, opt)
            raise
        epochs_used += epochs

    def choose(h):
        nonlocal queue
        s = cfg.strategy
        if s == "minimax":
            node = minimax_select(g, h, state, cfg.k_hops, select_seed)
            return node, float(minimax_scores(g, h, [node], cfg.k_hops)[0])
        if s == "random":
            return random_select(state, select_seed), None
        if s == "degree":
            node = degree_select(g, state)
            return node, float(g.degrees()[node])
        if s == "entropy":
            if not state.labeled:
                return random_select(state, select_seed), None
            probs = predict_proba(train_probe(h, state.labeled_pairs(), C, probe_cfg), h)
            node = entropy_select(state, probs)
            return node, float(prediction_entropy(probs[[node]])[0])
        # featprop: one clustering up front, unless re-clustering each round
        if cfg.featprop_recluster or queue is None:
            queue = featprop_select(g, state, state.budget - state.round, select_seed)
        node = queue.pop(0)
        return node, None

    train(0, cfg.warmup_epochs)
    for c in range(budget):
        train(c + 1, cfg.epochs_per_round)
        h = gcn_forward(adj, g.features, params)
        node, score = choose(h)
        y = int(g.labels[node])
        state.label(node, y)
        micro = macro = None
        if cfg.round_metrics:
            micro, macro = _evaluate(h, state, split.test, g.labels, C, probe_cfg)
        hom = float(ego[node])
        yield ExperimentRecord(
            cfg.tag, cfg.strategy, int(seed), "round", c, state.round, node, y, score,
            micro, macro, None if math.isnan(hom) else hom, graph_h, epochs_used,
        )

    train(budget + 1, cfg.epochs_per_round)
    h = gcn_forward(adj, g.features, params)
    micro, macro = _evaluate(h, state, split.test, g.labels, C, probe_cfg)
    yield ExperimentRecord(
        cfg.tag, cfg.strategy, int(seed), "final", budget, state.round, None, None, None,
        micro, macro, None, graph_h, epochs_used,
    )


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _parse_cell(name, text):
    if name in ("tag", "strategy", "kind"):
        return text
    if text == "":
        return None
    if name in ("seed", "round", "n_labeled", "node", "label", "epochs"):
        return int(text)
    return float(text)


def records_from_csv(text):
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames is None or tuple(rows.fieldnames) != CSV_COLUMNS:
        raise InvalidArgument("not a gcal records file")
    return [ExperimentRecord(**{k: _parse_cell(k, v) for k, v in row.items()}) for row in rows]


def _mean_std(values):
    a = np.asarray(values, dtype=np.float64)
    return float(a.mean()), float(a.std())


def summarize(records, dataset=None):
    """Per (tag, strategy) mean and population std of final F1 over seeds, plus homophily."""
    records = list(records)
    if not records:
        raise InvalidArgument("no records to summarize")
    groups = {}
    for r in records:
        groups.setdefault((r.tag, r.strategy), []).append(r)
    rows = []
    for (tag, strategy), recs in sorted(groups.items()):
        finals = sorted((r for r in recs if r.kind == "final"), key=lambda r: r.seed)
        row = {"tag": tag, "strategy": strategy, "n_seeds": len(finals)}
        if finals:
            row["micro_f1_mean"], row["micro_f1_std"] = _mean_std([r.micro_f1 for r in finals])
            row["macro_f1_mean"], row["macro_f1_std"] = _mean_std([r.macro_f1 for r in finals])
        per_seed = {}
        for r in recs:
            if r.kind == "round" and r.node_homophily is not None:
                per_seed.setdefault(r.seed, []).append(r.node_homophily)
        original = float(np.mean([r.graph_homophily for r in recs]))
        row["homophily_original"] = original
        if per_seed:
            selected = float(np.mean([np.mean(v) for _, v in sorted(per_seed.items())]))
            row["homophily_selected"] = selected
            row["homophily_improvement_pct"] = 100.0 * (selected - original) / original
        if dataset in REFERENCE_20C and strategy in REFERENCE_20C[dataset]:
            row["reference_micro_f1"], row["reference_macro_f1"] = REFERENCE_20C[dataset][strategy]
        rows.append(row)
    return rows


SUMMARY_COLUMNS = (
    "tag", "strategy", "n_seeds", "micro_f1_mean", "micro_f1_std", "macro_f1_mean", "macro_f1_std",
    "homophily_original", "homophily_selected", "homophily_improvement_pct",
)


def summary_to_csv(rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in SUMMARY_COLUMNS])
    return buf.getvalue()


def summary_to_json(rows, dataset=None):
    doc = {"dataset": dataset, "groups": rows}
    if dataset in REFERENCE_HOMOPHILY:
        doc["reference_homophily"] = dict(zip(("original", "selected"), REFERENCE_HOMOPHILY[dataset]))
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def run_many(cfg, seeds=None, graph=None, checkpoint_dir=None):
    """Run every seed of ``cfg`` and return all records."""
    g = graph if graph is not None else load_graph(cfg)
    out = []
    for seed in seeds if seeds is not None else cfg.seeds:
        out.extend(run_experiment(cfg, seed, g, checkpoint_dir))
    return out


def write_outputs(records, out_dir, dataset=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "records.csv").write_text(records_to_csv(records), encoding="utf-8")
    rows = summarize(records, dataset)
    (out / "summary.json").write_text(summary_to_json(rows, dataset), encoding="utf-8")
    return rows


SWEEP_PARAMS = {"lambda": "lam", "lam": "lam", "k": "k_hops", "k_hops": "k_hops"}


def sweep(cfg, param, values, graph=None):
    """Run ``cfg`` for each value of ``param`` (``lambda`` or ``k``); records are tagged ``param=value``."""
    if param not in SWEEP_PARAMS:
        raise ConfigError(f"sweep parameter must be one of {sorted(SWEEP_PARAMS)}")
    name = SWEEP_PARAMS[param]
    g = graph if graph is not None else load_graph(cfg)
    records = []
    for raw in values:
        sub = config_from_mapping({name: str(raw), "tag": f"{param}={raw}"}, cfg)
        records.extend(run_many(sub, graph=g))
    return records
