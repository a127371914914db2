"""Offline next-click evaluation: chronological split, scenario filters, metrics."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from locrec.errors import ConfigError, ScenarioError
from locrec.model import (
    Article,
    ItemFilter,
    MetricsReport,
    ScenarioSpec,
    Session,
    apply_filter,
)
from locrec.recommenders import SessionModel, make_model


@dataclass(frozen=True)
class SplitSpec:
    test_window_days: int = 10


@dataclass(frozen=True)
class EvaluationEvent:
    session_id: str
    prefix: tuple[str, ...]
    target: str


@dataclass
class Dataset:
    catalog: Mapping[str, Article]
    sessions: list[Session]


def chronological_split(sessions: Sequence[Session], spec: SplitSpec = SplitSpec()):
    """Last ``test_window_days`` calendar days go to test, the rest to train."""
    if not sessions:
        raise ConfigError("cannot split an empty session list")
    first = min(s.day for s in sessions)
    last = max(s.day for s in sessions)
    span = (last - first).days + 1
    if not 1 <= spec.test_window_days < span:
        raise ConfigError(f"test_window_days must be in [1, {span - 1}] for a {span}-day dataset")
    boundary = last - dt.timedelta(days=spec.test_window_days - 1)
    train = [s for s in sessions if s.day < boundary]
    test = [s for s in sessions if s.day >= boundary]
    if not train or not test:
        raise ConfigError(f"split at {boundary} leaves an empty partition")
    return train, test


def filter_train(sessions: Iterable[Session], f: ItemFilter, catalog: Mapping[str, Article]) -> list[Session]:
    """Keep only clicks on articles passing ``f``; drop sessions left with < 2 clicks."""
    out = []
    for s in sessions:
        kept = tuple(e for e in s.events if apply_filter(f, catalog[e.article_id]))
        if len(kept) >= 2:
            out.append(s if len(kept) == len(s.events) else Session(s.session_id, s.user_id, s.day, kept))
    if not out:
        raise ScenarioError(f"no training sessions survive filter {f}")
    return out


def next_click_events(
    sessions: Iterable[Session],
    f_test: ItemFilter,
    catalog: Mapping[str, Article],
    known_items=None,
) -> tuple[list[EvaluationEvent], int]:
    """Unroll each test session into (prefix -> next click) events.

    Only targets passing ``f_test`` are kept; the prefix is never filtered.
    Targets outside ``known_items`` (when given) are not scored but counted.
    Returns ``(events, skipped_unknown_targets)``.
    """
    events, skipped = [], 0
    for s in sessions:
        items = s.items
        for p in range(1, len(items)):
            target = items[p]
            if not apply_filter(f_test, catalog[target]):
                continue
            if known_items is not None and target not in known_items:
                skipped += 1
                continue
            events.append(EvaluationEvent(s.session_id, items[:p], target))
    return events, skipped


def target_rank(ranked, target) -> Optional[int]:
    for pos, (item, _) in enumerate(ranked, start=1):
        if item == target:
            return pos
    return None


def metrics_from_ranks(ranks: Sequence[Optional[int]], cutoffs: Sequence[int], sessions: int = 0) -> MetricsReport:
    """HR, MRR and NDCG (binary relevance, ideal DCG = 1) at each cutoff.

    ``None`` marks a miss. With no events every metric is 0.
    """
    cutoffs = tuple(cutoffs)
    n = len(ranks)
    hr, mrr, ndcg = {}, {}, {}
    for k in cutoffs:
        hits = [r for r in ranks if r is not None and r <= k]
        hr[k] = len(hits) / n if n else 0.0
        mrr[k] = math.fsum(1.0 / r for r in hits) / n if n else 0.0
        ndcg[k] = math.fsum(1.0 / math.log2(r + 1) for r in hits) / n if n else 0.0
    return MetricsReport(cutoffs, hr, mrr, ndcg, n, 0, sessions)


def evaluate(model: SessionModel, events: Sequence[EvaluationEvent], cutoffs: Sequence[int] = (10, 20)) -> MetricsReport:
    depth = max(cutoffs)
    ranks = [target_rank(model.score(ev.prefix, n=depth), ev.target) for ev in events]
    sessions = len({ev.session_id for ev in events})
    return metrics_from_ranks(ranks, cutoffs, sessions)


class ScenarioRunner:
    """Runs scenarios over one dataset, reusing the split and trained models.

    Models are cached per (training filter, method), so scenarios that differ
    only in their test filter train once.
    """

    def __init__(self, dataset: Dataset, split: SplitSpec = SplitSpec(), **model_options):
        self.dataset = dataset
        self.split = split
        self.model_options = model_options
        self._split = None
        self._models = {}

    def partitions(self):
        if self._split is None:
            self._split = chronological_split(self.dataset.sessions, self.split)
        return self._split

    def model(self, train_filter: ItemFilter, method) -> SessionModel:
        key = (train_filter, method)
        if key not in self._models:
            train = filter_train(self.partitions()[0], train_filter, self.dataset.catalog)
            self._models[key] = make_model(method, **self.model_options).fit(s.items for s in train)
        return self._models[key]

    def run(self, spec: ScenarioSpec) -> MetricsReport:
        model = self.model(spec.train_filter, spec.method)
        events, skipped = next_click_events(self.partitions()[1], spec.test_filter, self.dataset.catalog, model.items)
        return evaluate(model, events, spec.cutoffs).with_counts(skipped, spec)


def run_scenario(
    dataset: Dataset,
    spec: ScenarioSpec,
    split: SplitSpec = SplitSpec(),
    **model_options,
) -> MetricsReport:
    """split -> filter training data -> train -> unroll test sessions -> score."""
    return ScenarioRunner(dataset, split, **model_options).run(spec)
