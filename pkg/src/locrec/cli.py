"""``locrec`` command-line entry point.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 scenario error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

from locrec import synthgen
from locrec.errors import ConfigError, DataError, LocrecError, ScenarioError
from locrec.evaluation import ScenarioRunner
from locrec.experiment import format_table, load_config, load_dataset, run_matrix, write_reports
from locrec.ingest import (
    build_catalog,
    build_sessions,
    dataset_stats,
    ingest,
    read_catalog,
    read_sessions,
    write_audit,
    write_catalog,
    write_sessions,
)
from locrec.presets import PRESETS
from locrec.recommenders import dump_model

GENERATOR_PRESETS = {
    "default": synthgen.GeneratorConfig,
    "category-contrast": synthgen.category_contrast_config,
}


def cmd_ingest(args) -> int:
    result = ingest(args.events, args.rules, args.tz)
    if not result.sessions:
        raise DataError("empty dataset: no session has two or more clicks")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sessions(result.sessions, out / "sessions.tsv")
    write_catalog(result.catalog, out / "catalog.tsv")
    write_audit(result.unmatched, out / "audit.tsv")
    rejected = out / "rejected.tsv"
    if result.rejected:
        rejected.write_text("".join(f"{r.row}\t{r}\n" for r in result.rejected), encoding="utf-8")
    elif rejected.exists():
        rejected.unlink()
    print(dataset_stats(result.catalog, result.sessions).to_text(), end="")
    print(f"rows\t{result.total_rows}\nrejected rows\t{len(result.rejected)}\nunmatched articles\t{len(result.unmatched)}")
    return 0


def cmd_generate(args) -> int:
    if args.config:
        cfg = synthgen.load_config(args.config)
    else:
        cfg = GENERATOR_PRESETS[args.preset]()
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    paths, events = synthgen.write_dataset(cfg, args.out)
    ingested, _ = build_catalog(events, synthgen.tagging_rules())
    sessions = build_sessions(events, ingested)
    print(dataset_stats(ingested, sessions).to_text(), end="")
    for name, path in paths.items():
        print(f"{name}\t{path}")
    return 0


def cmd_stats(args) -> int:
    catalog = read_catalog(args.catalog)
    sessions = read_sessions(args.sessions)
    print(dataset_stats(catalog, sessions).to_text(), end="")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config, args.preset)
    out = Path(args.out) if args.out else cfg.output_dir
    if out is None:
        raise ConfigError("no output directory: pass --out or set output_dir in the config")
    dataset = load_dataset(cfg)
    outcomes = run_matrix(dataset, cfg)
    write_reports(outcomes, out)
    if args.dump_models:
        runner = ScenarioRunner(dataset, cfg.split, **cfg.model_options)
        (out / "models").mkdir(exist_ok=True)
        for key in dict.fromkeys((o.spec.train_filter, o.spec.method) for o in outcomes if o.report):
            name = f"{key[1].value.lower()}_{key[0].label.replace(' ', '-').replace('/', '-').lower()}.tsv"
            with open(out / "models" / name, "w", encoding="utf-8") as fh:
                dump_model(runner.model(*key), fh)
    print(format_table(outcomes), end="")
    failed = [o for o in outcomes if not o.ok]
    if failed:
        for o in failed:
            reason = o.error or "no evaluation events"
            print(f"scenario {o.spec.method.value} {o.spec.train_filter} -> {o.spec.test_filter}: {reason}", file=sys.stderr)
        return ScenarioError.exit_code
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="locrec", description="Localized session-based news recommendation experiments.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="tag articles and build day-long sessions from a clickstream")
    p.add_argument("--events", required=True, help="events CSV: user_id,timestamp,url,title[,main_category]")
    p.add_argument("--rules", required=True, help="tagging rules (YAML/JSON)")
    p.add_argument("--out", required=True, help="output directory for sessions.tsv, catalog.tsv, audit.tsv")
    p.add_argument("--tz", default="UTC", help="timezone defining calendar days (default: UTC)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("generate", help="write a seeded synthetic dataset")
    p.add_argument("--config", help="generator config (YAML); defaults to the built-in corpus")
    p.add_argument("--preset", choices=sorted(GENERATOR_PRESETS), default="default", help="built-in generator config used when --config is absent")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("run", help="run a scenario matrix and write reports")
    p.add_argument("--config", required=True, help="run config (YAML)")
    p.add_argument("--preset", choices=sorted(PRESETS), help="add a built-in scenario matrix")
    p.add_argument("--out", help="report directory (default: output_dir from the config)")
    p.add_argument("--dump-models", action="store_true", help="also write trained model tables for debugging")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("stats", help="summarize an ingested dataset")
    p.add_argument("--sessions", required=True)
    p.add_argument("--catalog", required=True)
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LocrecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
