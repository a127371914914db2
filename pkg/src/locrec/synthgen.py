"""Seeded synthetic catalogs and clickstreams with planted local-interest structure.

Articles get a locality (Bernoulli on ``locality_mix``), a main category drawn
from the per-locality ``category_mix`` and a subcategory. Articles of the same
(category, subcategory) are grouped into small story threads; threads stay
within one locality unless the category is listed in ``mixed_categories``.

Every user belongs to one archetype. Each user-day produces one session: the
first click picks a (locality, category) bucket from the archetype profile and
an article by within-bucket popularity; each further click stays in the
current story thread with probability ``stickiness`` and otherwise redraws a
bucket from the profile.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import os
from dataclasses import dataclass, field, fields
from typing import Mapping, Optional

import numpy as np
import yaml

from locrec.errors import ConfigError
from locrec.ingest import RawEvent, TaggingRules, article_id_for, write_catalog
from locrec.model import Article, Locality, MainCategory

L, N = Locality.LOCAL, Locality.NONLOCAL
NEWS, SPORTS, LIFE, OTHER = MainCategory.NEWS, MainCategory.SPORTS, MainCategory.LIFE_CULTURE, MainCategory.OTHER

Bucket = tuple[Locality, MainCategory]

# Local/non-local shares of each main category, in percent of all articles.
_CATEGORY_SHARES = {
    L: {NEWS: 34.02, SPORTS: 30.35, LIFE: 11.43, OTHER: 0.0},
    N: {NEWS: 13.92, SPORTS: 3.4, LIFE: 6.89, OTHER: 0.0},
}


def _normalized(row: Mapping) -> dict:
    total = sum(row.values())
    return {k: v / total for k, v in row.items()}


DEFAULT_CATEGORY_MIX = {loc: _normalized(row) for loc, row in _CATEGORY_SHARES.items()}

DEFAULT_SUBCATEGORIES = {
    NEWS: {"news": 0.35, "crime": 0.25, "politics": 0.2, "weather": 0.1, "business": 0.1},
    SPORTS: {"sports": 0.4, "highschool-sports": 0.3, "orange-basketball": 0.2, "football": 0.1},
    LIFE: {"entertainment": 0.35, "food": 0.3, "arts": 0.2, "auto": 0.15},
    OTHER: {"opinion": 1.0},
}

LOCAL_KEYWORDS = ("Syracuse", "Onondaga County", "Central New York", "Binghamton", "Utica")
NONLOCAL_KEYWORDS = ("US Government", "Celebrity", "Lottery", "Washington", "Nationwide")

_TOPIC_WORDS = ("council", "season", "storm", "festival", "budget", "coach", "market", "school", "trial", "museum")


@dataclass(frozen=True)
class Archetype:
    name: str
    weight: float
    profile: Mapping[Bucket, float]
    stickiness: Optional[float] = None


DEFAULT_ARCHETYPES = (
    Archetype(
        "local-enthusiast",
        0.6,
        {(L, NEWS): 0.3, (L, SPORTS): 0.3, (L, LIFE): 0.2, (N, NEWS): 0.1, (N, SPORTS): 0.05, (N, LIFE): 0.05},
        stickiness=0.8,
    ),
    Archetype(
        "global-reader",
        0.4,
        {(L, NEWS): 0.1, (L, SPORTS): 0.05, (L, LIFE): 0.05, (N, NEWS): 0.4, (N, SPORTS): 0.15, (N, LIFE): 0.25},
        stickiness=0.5,
    ),
)


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int = 42
    n_users: int = 400
    n_days: int = 30
    n_articles: int = 1500
    start_date: dt.date = dt.date(2018, 12, 1)
    locality_mix: float = 8145 / 10971
    category_mix: Mapping[Locality, Mapping[MainCategory, float]] = field(
        default_factory=lambda: DEFAULT_CATEGORY_MIX
    )
    subcategories: Mapping[MainCategory, Mapping[str, float]] = field(
        default_factory=lambda: DEFAULT_SUBCATEGORIES
    )
    archetypes: tuple[Archetype, ...] = DEFAULT_ARCHETYPES
    stickiness: float = 0.7
    session_length_mean: float = 4.0
    session_length_max: int = 20
    thread_size: int = 6
    mixed_categories: tuple[MainCategory, ...] = ()
    popularity_skew: float = 1.0

    def validate(self) -> None:
        if self.n_users < 1 or self.n_days < 1 or self.n_articles < 1:
            raise ConfigError("n_users, n_days and n_articles must be positive")
        if not 0.0 <= self.locality_mix <= 1.0:
            raise ConfigError("locality_mix must lie in [0, 1]")
        for loc in Locality:
            _check_distribution(self.category_mix.get(loc, {}), f"category_mix[{loc.value}]")
        for cat, subs in self.subcategories.items():
            _check_distribution(subs, f"subcategories[{cat.value}]")
        if not self.archetypes:
            raise ConfigError("at least one archetype is required")
        _check_distribution({a.name: a.weight for a in self.archetypes}, "archetype weights")
        for a in self.archetypes:
            _check_distribution(a.profile, f"profile of archetype {a.name}")
            s = self.stickiness if a.stickiness is None else a.stickiness
            if not 0.0 <= s <= 1.0:
                raise ConfigError(f"stickiness of archetype {a.name} must lie in [0, 1]")
        if not 0.0 <= self.stickiness <= 1.0:
            raise ConfigError("stickiness must lie in [0, 1]")
        if self.session_length_mean < 1 or self.session_length_max < 1:
            raise ConfigError("session length parameters must be >= 1")
        if self.thread_size < 1:
            raise ConfigError("thread_size must be >= 1")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "GeneratorConfig":
        data = dict(data or {})
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown generator settings: {', '.join(sorted(unknown))}")
        try:
            if "start_date" in data and not isinstance(data["start_date"], dt.date):
                data["start_date"] = dt.date.fromisoformat(str(data["start_date"]))
            if "category_mix" in data:
                data["category_mix"] = {
                    Locality.parse(loc): {MainCategory.parse(c): float(v) for c, v in row.items()}
                    for loc, row in data["category_mix"].items()
                }
            if "subcategories" in data:
                data["subcategories"] = {
                    MainCategory.parse(c): {str(s).lower(): float(v) for s, v in subs.items()}
                    for c, subs in data["subcategories"].items()
                }
            if "archetypes" in data:
                data["archetypes"] = tuple(_parse_archetype(a) for a in data["archetypes"])
            if "mixed_categories" in data:
                data["mixed_categories"] = tuple(MainCategory.parse(c) for c in data["mixed_categories"])
            for name in ("seed", "n_users", "n_days", "n_articles", "session_length_max", "thread_size"):
                if name in data:
                    data[name] = int(data[name])
            for name in ("locality_mix", "stickiness", "session_length_mean", "popularity_skew"):
                if name in data:
                    data[name] = float(data[name])
        except (ValueError, TypeError, AttributeError, KeyError) as exc:
            raise ConfigError(f"bad generator config: {exc}") from exc
        return cls(**data)

    def to_mapping(self) -> dict:
        return {
            "seed": self.seed,
            "n_users": self.n_users,
            "n_days": self.n_days,
            "n_articles": self.n_articles,
            "start_date": self.start_date.isoformat(),
            "locality_mix": self.locality_mix,
            "category_mix": {
                loc.value: {c.value: v for c, v in row.items()} for loc, row in self.category_mix.items()
            },
            "subcategories": {c.value: dict(subs) for c, subs in self.subcategories.items()},
            "archetypes": [
                {
                    "name": a.name,
                    "weight": a.weight,
                    "stickiness": a.stickiness,
                    "profile": {f"{loc.value} {c.value}": p for (loc, c), p in a.profile.items()},
                }
                for a in self.archetypes
            ],
            "stickiness": self.stickiness,
            "session_length_mean": self.session_length_mean,
            "session_length_max": self.session_length_max,
            "thread_size": self.thread_size,
            "mixed_categories": [c.value for c in self.mixed_categories],
            "popularity_skew": self.popularity_skew,
        }


def _check_distribution(weights: Mapping, what: str) -> None:
    values = list(weights.values())
    if not values or any(v < 0 for v in values) or not math.isclose(sum(values), 1.0, abs_tol=1e-6):
        raise ConfigError(f"{what} must be non-negative proportions summing to 1")


def _parse_bucket(text: str) -> Bucket:
    loc, cat = str(text).split(None, 1)
    return Locality.parse(loc), MainCategory.parse(cat)


def _parse_archetype(data: Mapping) -> Archetype:
    return Archetype(
        name=str(data["name"]),
        weight=float(data["weight"]),
        profile={_parse_bucket(k): float(v) for k, v in data["profile"].items()},
        stickiness=None if data.get("stickiness") is None else float(data["stickiness"]),
    )


def load_config(path) -> GeneratorConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read generator config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse generator config {path}: {exc}") from exc
    return GeneratorConfig.from_mapping(data.get("generator", data))


def category_contrast_config(seed: int = 7) -> GeneratorConfig:
    """Corpus where local Sports draws intense local interest while News is
    dominated by national stories with occasional local angles."""
    return GeneratorConfig(
        seed=seed,
        category_mix={
            L: {NEWS: 0.15, SPORTS: 0.85, LIFE: 0.0, OTHER: 0.0},
            N: {NEWS: 0.85, SPORTS: 0.15, LIFE: 0.0, OTHER: 0.0},
        },
        locality_mix=0.5,
        archetypes=(
            Archetype(
                "local-enthusiast", 0.6, {(L, SPORTS): 0.7, (L, NEWS): 0.1, (N, NEWS): 0.2}, stickiness=0.85
            ),
            Archetype(
                "global-reader", 0.4, {(N, NEWS): 0.6, (N, SPORTS): 0.2, (L, SPORTS): 0.2}, stickiness=0.7
            ),
        ),
        mixed_categories=(NEWS,),
    )


# -- generation ----------------------------------------------------------------


def _slug_date(start: dt.date, offset: int) -> str:
    d = start + dt.timedelta(days=offset)
    return f"{d.year}/{d.month:02d}"


def _make_catalog(cfg: GeneratorConfig, rng: np.random.Generator):
    n = cfg.n_articles
    is_local = rng.random(n) < cfg.locality_mix
    cats = list(MainCategory)
    articles = []
    for i in range(n):
        loc = L if is_local[i] else N
        mix = cfg.category_mix[loc]
        cat = cats[rng.choice(len(cats), p=np.array([mix.get(c, 0.0) for c in cats]))]
        subs = cfg.subcategories.get(cat) or {"misc": 1.0}
        names = sorted(subs)
        sub = names[rng.choice(len(names), p=np.array([subs[s] for s in names]))]
        keywords = LOCAL_KEYWORDS if loc is L else NONLOCAL_KEYWORDS
        kw = keywords[rng.integers(len(keywords))]
        topic = _TOPIC_WORDS[rng.integers(len(_TOPIC_WORDS))]
        title = f"{kw}: {topic} update on {sub.replace('-', ' ')} #{i}"
        url = (
            f"https://news.example.com/{sub}/{_slug_date(cfg.start_date, int(rng.integers(cfg.n_days)))}"
            f"/{topic}_{sub.replace('-', '_')}_{i:05d}.html"
        )
        articles.append(Article(article_id_for(url), url, title, loc, cat, sub))
    return articles


def generate(cfg: GeneratorConfig = GeneratorConfig()) -> tuple[dict[str, Article], list[RawEvent]]:
    """Return ``(catalog keyed by article_id, raw click events sorted by time)``."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    articles = _make_catalog(cfg, rng)

    buckets: dict[Bucket, list[int]] = {}
    for idx, a in enumerate(articles):
        buckets.setdefault((a.locality, a.main_category), []).append(idx)
    for arch in cfg.archetypes:
        if arch.weight <= 0:
            continue
        for bucket, p in arch.profile.items():
            if p > 0 and not buckets.get(bucket):
                raise ConfigError(
                    f"archetype {arch.name} reads {bucket[0].value} {bucket[1].value} but that bucket has no articles"
                )

    popularity = np.zeros(len(articles))
    for members in buckets.values():
        ranks = rng.permutation(len(members)) + 1
        popularity[members] = 1.0 / ranks ** cfg.popularity_skew

    thread_of = np.zeros(len(articles), dtype=int)
    threads: list[np.ndarray] = []
    groups: dict[tuple, list[int]] = {}
    for idx, a in enumerate(articles):
        loc_key = None if a.main_category in cfg.mixed_categories else a.locality
        groups.setdefault((a.main_category.value, a.subcategory, loc_key and loc_key.value), []).append(idx)
    for key in sorted(groups, key=lambda k: tuple("" if x is None else x for x in k)):
        members = rng.permutation(groups[key])
        for start in range(0, len(members), cfg.thread_size):
            chunk = np.sort(members[start : start + cfg.thread_size])
            thread_of[chunk] = len(threads)
            threads.append(chunk)
    bucket_arrays = {b: np.array(m) for b, m in buckets.items()}

    arch_p = np.array([a.weight for a in cfg.archetypes])
    user_arch = rng.choice(len(cfg.archetypes), size=cfg.n_users, p=arch_p / arch_p.sum())
    profiles = []
    for a in cfg.archetypes:
        keys = [b for b, p in a.profile.items() if p > 0]
        probs = np.array([a.profile[b] for b in keys])
        profiles.append((keys, probs / probs.sum(), cfg.stickiness if a.stickiness is None else a.stickiness))

    lengths = np.arange(1, cfg.session_length_max + 1)
    q = 1.0 - 1.0 / cfg.session_length_mean
    length_p = q ** (lengths - 1)
    length_p /= length_p.sum()

    def pick(candidates: np.ndarray, read: set) -> Optional[int]:
        pool = candidates[[c not in read for c in candidates]] if read else candidates
        if len(pool) == 0:
            return None
        w = popularity[pool]
        return int(pool[rng.choice(len(pool), p=w / w.sum())])

    events: list[RawEvent] = []
    epoch0 = int(dt.datetime.combine(cfg.start_date, dt.time(), dt.timezone.utc).timestamp())
    for day in range(cfg.n_days):
        for user in range(cfg.n_users):
            keys, probs, stick = profiles[user_arch[user]]
            n_clicks = int(rng.choice(lengths, p=length_p))
            clicks: list[int] = []
            read: set = set()
            for step in range(n_clicks):
                choice = None
                if clicks and rng.random() < stick:
                    cur = clicks[-1]
                    choice = pick(threads[thread_of[cur]], read)
                    if choice is None:
                        a = articles[cur]
                        choice = pick(bucket_arrays[(a.locality, a.main_category)], read)
                if choice is None:
                    bucket = keys[rng.choice(len(keys), p=probs)]
                    choice = pick(bucket_arrays[bucket], read)
                if choice is None:
                    break
                clicks.append(choice)
                read.add(choice)
            if not clicks:
                continue
            gaps = rng.integers(20, 600, size=len(clicks))
            gaps[0] = 0
            offsets = np.cumsum(gaps)
            start = int(rng.integers(0, 86400 - int(offsets[-1])))
            uid = f"u{user:05d}"
            for c, off in zip(clicks, offsets):
                a = articles[c]
                events.append(RawEvent(uid, a.url, a.title, epoch0 + day * 86400 + start + int(off), a.main_category.value))

    events.sort(key=lambda e: (e.timestamp, e.user_id))
    return {a.article_id: a for a in articles}, events


def tagging_rules() -> TaggingRules:
    return TaggingRules(local_keywords=LOCAL_KEYWORDS, nonlocal_keywords=NONLOCAL_KEYWORDS)


def write_events(events, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "timestamp", "url", "title", "main_category"])
        for e in events:
            w.writerow([e.user_id, e.timestamp, e.url, e.title, e.main_category or ""])


def write_dataset(cfg: GeneratorConfig, out_dir) -> tuple[dict[str, str], list[RawEvent]]:
    """Generate and write ``events.csv``, ``rules.yaml``, ``catalog_truth.tsv``
    and ``generator.yaml``. Returns the written paths and the events."""
    os.makedirs(out_dir, exist_ok=True)
    catalog, events = generate(cfg)
    paths = {
        "events": os.path.join(out_dir, "events.csv"),
        "rules": os.path.join(out_dir, "rules.yaml"),
        "truth": os.path.join(out_dir, "catalog_truth.tsv"),
        "config": os.path.join(out_dir, "generator.yaml"),
    }
    write_events(events, paths["events"])
    write_catalog(catalog, paths["truth"])
    with open(paths["rules"], "w", encoding="utf-8") as fh:
        yaml.safe_dump(tagging_rules().to_mapping(), fh, sort_keys=False)
    with open(paths["config"], "w", encoding="utf-8") as fh:
        yaml.safe_dump(cfg.to_mapping(), fh, sort_keys=False)
    return paths, events
