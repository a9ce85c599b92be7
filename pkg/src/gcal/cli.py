"""Command-line entry point: ``gcal run | sweep | gen-sbm | report``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric
failure during training.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .datasets import generate_sbm, write_bundle
from .errors import ConfigError, DataError, InvalidArgument, NumericFailure
from .experiment import (
    ExperimentConfig,
    config_from_mapping,
    dataset_name,
    format_config,
    load_config,
    load_graph,
    records_from_csv,
    run_many,
    summarize,
    summary_to_csv,
    summary_to_json,
    sweep,
    write_outputs,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


def _base_config(args):
    if args.config is None:
        return ExperimentConfig()
    try:
        return load_config(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None


def _overrides(args, cfg):
    values = {}
    for key in ("strategy", "budget", "out"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = str(v)
    if getattr(args, "seed", None) is not None:
        values["seeds"] = str(args.seed)
    if getattr(args, "seeds", None) is not None:
        values["seeds"] = args.seeds
    return config_from_mapping(values, cfg) if values else cfg


def _print_summary(rows):
    for row in rows:
        mi, ma = row.get("micro_f1_mean"), row.get("macro_f1_mean")
        label = f"{row['tag']} {row['strategy']}".strip()
        if mi is None:
            print(f"{label}: no final records")
            continue
        print(
            f"{label}: Micro-F1 {100 * mi:.2f} ± {100 * row['micro_f1_std']:.2f}, "
            f"Macro-F1 {100 * ma:.2f} ± {100 * row['macro_f1_std']:.2f} over {row['n_seeds']} seed(s)"
        )


def cmd_run(args):
    cfg = _overrides(args, _base_config(args))
    graph = load_graph(cfg)
    records = run_many(cfg, graph=graph, checkpoint_dir=Path(cfg.out) / "checkpoints")
    out = Path(cfg.out)
    rows = write_outputs(records, out, dataset_name(cfg))
    (out / "config.txt").write_text(format_config(cfg), encoding="utf-8")
    _print_summary(rows)
    print(f"wrote {out / 'records.csv'} and {out / 'summary.json'}")


def cmd_sweep(args):
    cfg = _overrides(args, _base_config(args))
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values must list at least one value")
    graph = load_graph(cfg)
    records = sweep(cfg, args.param, values, graph)
    out = Path(cfg.out)
    rows = write_outputs(records, out, dataset_name(cfg))
    (out / "config.txt").write_text(format_config(cfg), encoding="utf-8")
    _print_summary(rows)
    print(f"wrote {out / 'records.csv'} and {out / 'summary.json'}")


def _parse_blocks(text):
    try:
        blocks = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"--blocks must be comma-separated integers, got {text!r}") from None
    if not blocks or min(blocks) < 1:
        raise ConfigError("--blocks needs at least one positive block size")
    return blocks


def cmd_gen_sbm(args):
    blocks = _parse_blocks(args.blocks)
    try:
        g = generate_sbm(blocks, args.p_in, args.p_out, args.feat_dim, args.feat_noise, args.seed)
    except InvalidArgument as exc:
        raise ConfigError(str(exc)) from None
    path = write_bundle(g, args.out, name=args.name)
    print(f"wrote SBM bundle with n={g.n}, |E|={g.num_edges}, C={g.num_classes} to {path}")


def cmd_report(args):
    path = Path(args.input)
    records_file = path / "records.csv" if path.is_dir() else path
    try:
        text = records_file.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read records: {exc}") from None
    try:
        records = records_from_csv(text)
        rows = summarize(records)
    except (InvalidArgument, ValueError, TypeError) as exc:
        raise DataError(f"bad records file {records_file}: {exc}") from None
    if args.format == "csv":
        sys.stdout.write(summary_to_csv(rows))
    else:
        sys.stdout.write(summary_to_json(rows))


def build_parser():
    parser = argparse.ArgumentParser(prog="gcal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run active learning for every configured seed")
    run.add_argument("--config", help="flat key = value config file")
    run.add_argument("--strategy")
    run.add_argument("--budget", help="node count or per-class form such as 20C")
    run.add_argument("--seed", type=int, help="run this single seed instead of the configured list")
    run.add_argument("--out", help="output directory")
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="repeat a run over a grid of lambda or k values")
    sw.add_argument("--config")
    sw.add_argument("--param", required=True, choices=("lambda", "k"))
    sw.add_argument("--values", required=True, help="comma-separated values, e.g. 0.2,0.5,0.8,1.0")
    sw.add_argument("--strategy")
    sw.add_argument("--budget")
    sw.add_argument("--seeds", help="comma-separated seed list")
    sw.add_argument("--out")
    sw.set_defaults(func=cmd_sweep)

    gen = sub.add_parser("gen-sbm", help="write a stochastic block model graph as a dataset bundle")
    gen.add_argument("--blocks", required=True, help="comma-separated block sizes, e.g. 50,50")
    gen.add_argument("--p-in", type=float, required=True)
    gen.add_argument("--p-out", type=float, required=True)
    gen.add_argument("--out", required=True)
    gen.add_argument("--feat-dim", type=int, default=32)
    gen.add_argument("--feat-noise", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--name", default="sbm")
    gen.set_defaults(func=cmd_gen_sbm)

    rep = sub.add_parser("report", help="summarize a records.csv file")
    rep.add_argument("--in", dest="input", required=True, help="run directory or records.csv path")
    rep.add_argument("--format", choices=("csv", "json"), default="json")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericFailure as exc:
        where = f" in round {exc.round_index}" if exc.round_index is not None else ""
        print(f"numeric failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
