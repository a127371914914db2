"""Config-driven scenario matrices and report files.

Run config (YAML)::

    data:                       # one of the three forms below
      events: events.csv        #   raw clickstream + tagging rules
      rules: rules.yaml
      tz: UTC
      # sessions: sessions.tsv  #   an ingested session store + catalog
      # catalog: catalog.tsv
      # generator: {seed: 42}   #   synthetic corpus generated in memory
    split: {test_window_days: 10}
    cutoffs: [10, 20]
    preset: table3              # and/or an explicit scenario list
    scenarios:
      - {method: SKNN, train: Local, test: Local News}
    models: {sr_decay: inverse, sr_max_back: 10, knn_k: 20}
    table5_subcategories: [News/crime, Sports/orange-basketball]

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import concurrent.futures
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from locrec.errors import ConfigError, ScenarioError
from locrec.evaluation import Dataset, ScenarioRunner, SplitSpec, chronological_split
from locrec.ingest import build_catalog, build_sessions, ingest, read_catalog, read_sessions
from locrec.model import DEFAULT_CUTOFFS, ItemFilter, Method, MetricsReport, ScenarioSpec
from locrec.presets import preset
from locrec.recommenders import SR_DECAYS
from locrec import synthgen

MODEL_OPTIONS = ("sr_decay", "sr_max_back", "knn_k")


@dataclass
class ExperimentConfig:
    data: dict
    scenarios: list[ScenarioSpec]
    split: SplitSpec = SplitSpec()
    model_options: dict = field(default_factory=dict)
    base_dir: Path = Path(".")
    output_dir: Optional[Path] = None

    @classmethod
    def from_mapping(cls, raw: dict, base_dir=".", preset_name: Optional[str] = None) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("run config must be a mapping")
        base = Path(base_dir)
        try:
            cutoffs = tuple(int(k) for k in raw.get("cutoffs", DEFAULT_CUTOFFS))
            split = SplitSpec(int((raw.get("split") or {}).get("test_window_days", 10)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad run config: {exc}") from exc

        scenarios: list[ScenarioSpec] = []
        name = preset_name or raw.get("preset")
        try:
            if name:
                scenarios += preset(name, cutoffs, raw.get("table5_subcategories"))
            for entry in raw.get("scenarios") or ():
                scenarios.append(
                    ScenarioSpec(
                        ItemFilter.parse(str(entry.get("train", "All"))),
                        ItemFilter.parse(str(entry.get("test", "All"))),
                        Method.parse(str(entry["method"])),
                        tuple(int(k) for k in entry.get("cutoffs", cutoffs)),
                    )
                )
        except (KeyError, ValueError, TypeError, AttributeError) as exc:
            raise ConfigError(f"bad scenario definition: {exc}") from exc
        if not scenarios:
            raise ConfigError("no scenarios: give a preset or a scenarios list")

        options = dict(raw.get("models") or {})
        unknown = set(options) - set(MODEL_OPTIONS)
        if unknown:
            raise ConfigError(f"unknown model options: {', '.join(sorted(unknown))}")
        if options.get("sr_decay", "inverse") not in SR_DECAYS:
            raise ConfigError(f"sr_decay must be one of {sorted(SR_DECAYS)}")

        data = dict(raw.get("data") or {})
        for key in ("events", "rules", "sessions", "catalog"):
            if key in data:
                path = base / str(data[key])
                if not path.exists():
                    raise ConfigError(f"data.{key} does not exist: {path}")
                data[key] = path
        forms = [("events" in data and "rules" in data), ("sessions" in data and "catalog" in data), "generator" in data]
        if sum(bool(f) for f in forms) != 1:
            raise ConfigError("data needs exactly one of: events+rules, sessions+catalog, generator")
        out = raw.get("output_dir")
        return cls(data, scenarios, split, options, base, base / out if out else None)


def load_config(path, preset_name: Optional[str] = None) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return ExperimentConfig.from_mapping(raw, Path(path).parent, preset_name)


def load_dataset(cfg: ExperimentConfig) -> Dataset:
    data = cfg.data
    if "generator" in data:
        gen = synthgen.GeneratorConfig.from_mapping(data["generator"] or {})
        _, events = synthgen.generate(gen)
        catalog, _ = build_catalog(events, synthgen.tagging_rules())
        return Dataset(catalog, build_sessions(events, catalog, data.get("tz", "UTC")))
    if "sessions" in data:
        catalog = read_catalog(data["catalog"])
        sessions = read_sessions(data["sessions"])
        missing = {i for s in sessions for i in s.items if i not in catalog}
        if missing:
            raise ConfigError(f"{len(missing)} session items are missing from the catalog")
        return Dataset(catalog, sessions)
    result = ingest(data["events"], data["rules"], data.get("tz", "UTC"))
    return Dataset(result.catalog, result.sessions)


# -- running -------------------------------------------------------------------


@dataclass
class ScenarioOutcome:
    spec: ScenarioSpec
    report: Optional[MetricsReport] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.report is not None and not self.report.zero_events


def worker_count(n_tasks: int) -> int:
    raw = os.environ.get("LOCREC_THREADS", "0").strip() or "0"
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"LOCREC_THREADS must be an integer, got {raw!r}") from None
    if cap < 0:
        raise ConfigError("LOCREC_THREADS must be >= 0")
    workers = cap or os.cpu_count() or 1
    return max(1, min(workers, n_tasks))


_worker_runner: Optional[ScenarioRunner] = None


def _init_worker(dataset, split, options):
    global _worker_runner
    _worker_runner = ScenarioRunner(dataset, split, **options)


def _run_one(runner: ScenarioRunner, spec: ScenarioSpec) -> ScenarioOutcome:
    try:
        return ScenarioOutcome(spec, report=runner.run(spec))
    except ScenarioError as exc:
        return ScenarioOutcome(spec, error=str(exc))


def _run_in_worker(spec):
    return _run_one(_worker_runner, spec)


def run_matrix(dataset: Dataset, cfg: ExperimentConfig) -> list[ScenarioOutcome]:
    """Run every scenario; outcomes come back in scenario order.

    A bad split is a configuration problem and raises; failures of single
    scenarios are captured in their outcome.
    """
    chronological_split(dataset.sessions, cfg.split)
    workers = worker_count(len(cfg.scenarios))
    if workers == 1:
        runner = ScenarioRunner(dataset, cfg.split, **cfg.model_options)
        return [_run_one(runner, s) for s in cfg.scenarios]
    with concurrent.futures.ProcessPoolExecutor(
        workers, initializer=_init_worker, initargs=(dataset, cfg.split, cfg.model_options)
    ) as pool:
        return list(pool.map(_run_in_worker, cfg.scenarios))


# -- reports -------------------------------------------------------------------


def report_columns(cutoffs) -> list[str]:
    cols = ["method", "train_filter", "test_filter"]
    for metric in ("HR", "MRR", "NDCG"):
        cols += [f"{metric}@{k}" for k in cutoffs]
    return cols + ["events", "skipped", "sessions"]


def report_row(outcome: ScenarioOutcome, cutoffs) -> list[str]:
    spec, rep = outcome.spec, outcome.report
    row = [spec.method.value, spec.train_filter.label, spec.test_filter.label]
    for metric in ("hr", "mrr", "ndcg"):
        values = getattr(rep, metric) if rep else {}
        row += [f"{values[k]:.4f}" if k in values else "" for k in cutoffs]
    if rep is None:
        return row + ["", "", ""]
    return row + [str(rep.evaluation_events), str(rep.skipped_targets_unknown_to_model), str(rep.sessions_evaluated)]


def _all_cutoffs(outcomes) -> tuple[int, ...]:
    return tuple(sorted({k for o in outcomes for k in o.spec.cutoffs}))


def format_csv(outcomes) -> str:
    cutoffs = _all_cutoffs(outcomes)
    lines = [",".join(report_columns(cutoffs))]
    lines += [",".join(_csv_cell(c) for c in report_row(o, cutoffs)) for o in outcomes]
    return "\n".join(lines) + "\n"


def _csv_cell(text: str) -> str:
    return f'"{text}"' if "," in text or '"' in text else text


def format_table(outcomes) -> str:
    """Aligned plain-text table; zero-event and failed rows are flagged."""
    cutoffs = _all_cutoffs(outcomes)
    rows = [report_columns(cutoffs) + ["note"]]
    for o in outcomes:
        note = f"ERROR: {o.error}" if o.error else ("ZERO EVENTS" if o.report.zero_events else "")
        rows.append(report_row(o, cutoffs) + [note])
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = []
    for n, r in enumerate(rows):
        cells = [c.ljust(w) if i < 3 or i == len(r) - 1 else c.rjust(w) for i, (c, w) in enumerate(zip(r, widths))]
        lines.append("  ".join(cells).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", text).strip("-").lower() or "all"


def write_reports(outcomes, out_dir) -> list[Path]:
    out = Path(out_dir)
    (out / "scenarios").mkdir(parents=True, exist_ok=True)
    written = []
    for path, text in ((out / "report.csv", format_csv(outcomes)), (out / "report.txt", format_table(outcomes))):
        path.write_text(text, encoding="utf-8")
        written.append(path)
    for n, o in enumerate(outcomes, start=1):
        s = o.spec
        path = out / "scenarios" / f"{n:02d}_{s.method.value.lower()}_{_slug(s.train_filter.label)}_{_slug(s.test_filter.label)}.csv"
        path.write_text(format_csv([o]), encoding="utf-8")
        written.append(path)
    errors = [o for o in outcomes if o.error]
    err_path = out / "errors.txt"
    if errors:
        err_path.write_text("".join(f"{o.spec.method.value}\t{o.spec.train_filter}\t{o.spec.test_filter}\t{o.error}\n" for o in errors), encoding="utf-8")
        written.append(err_path)
    elif err_path.exists():
        err_path.unlink()
    return written
