"""Shared vocabulary: articles, interactions, sessions, item filters and reports.

All values are immutable once constructed so they can be handed to worker
processes freely.
"""

from __future__ import annotations

import datetime as dt
import enum
from dataclasses import dataclass, field
from typing import Optional


class Locality(str, enum.Enum):
    LOCAL = "Local"
    NONLOCAL = "NonLocal"

    @classmethod
    def parse(cls, text: str) -> "Locality":
        key = text.strip().lower().replace("-", "").replace("_", "").replace(" ", "")
        for member in cls:
            if member.value.lower() == key:
                return member
        raise ValueError(f"unknown locality {text!r}")


class MainCategory(str, enum.Enum):
    NEWS = "News"
    SPORTS = "Sports"
    LIFE_CULTURE = "LifeCulture"
    OTHER = "Other"

    @classmethod
    def parse(cls, text: str) -> "MainCategory":
        key = "".join(ch for ch in text.lower() if ch.isalnum())
        aliases = {
            "news": cls.NEWS,
            "sport": cls.SPORTS,
            "sports": cls.SPORTS,
            "lifeculture": cls.LIFE_CULTURE,
            "lifeandculture": cls.LIFE_CULTURE,
            "life": cls.LIFE_CULTURE,
            "other": cls.OTHER,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown main category {text!r}") from None


class Method(str, enum.Enum):
    AR = "AR"
    MC = "MC"
    SR = "SR"
    SKNN = "SKNN"

    @classmethod
    def parse(cls, text: str) -> "Method":
        key = text.strip().upper()
        if key == "MARKOV":
            return cls.MC
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown method {text!r}") from None


@dataclass(frozen=True)
class Article:
    article_id: str
    url: str
    title: str
    locality: Locality
    main_category: MainCategory
    subcategory: Optional[str] = None

    def __post_init__(self):
        sub = self.subcategory
        if sub is not None and (not sub or "/" in sub or sub != sub.lower()):
            raise ValueError(f"invalid subcategory {sub!r} for {self.article_id}")


@dataclass(frozen=True)
class Interaction:
    user_id: str
    article_id: str
    # None when the session was loaded from a session store, which keeps order only.
    timestamp: Optional[int] = None


@dataclass(frozen=True)
class Session:
    session_id: str
    user_id: str
    day: dt.date
    events: tuple[Interaction, ...]

    @property
    def items(self) -> tuple[str, ...]:
        return tuple(e.article_id for e in self.events)

    def __len__(self):
        return len(self.events)


class FilterKind(str, enum.Enum):
    ALL = "All"
    LOCALITY = "Locality"
    MAIN_CATEGORY = "MainCategory"
    LOCAL_MAIN_CATEGORY = "LocalMainCategory"
    SUBCATEGORY = "Subcategory"
    LOCAL_SUBCATEGORY = "LocalSubcategory"


@dataclass(frozen=True)
class ItemFilter:
    """Predicate over articles.

    Textual form (used in configs and reports)::

        All | Local | NonLocal | News | Local News | News/crime | Local News/crime
    """

    kind: FilterKind = FilterKind.ALL
    locality: Optional[Locality] = None
    category: Optional[MainCategory] = None
    subcategory: Optional[str] = None

    @classmethod
    def all(cls) -> "ItemFilter":
        return cls()

    @classmethod
    def of_locality(cls, locality: Locality) -> "ItemFilter":
        return cls(FilterKind.LOCALITY, locality=locality)

    @classmethod
    def of_category(cls, category: MainCategory) -> "ItemFilter":
        return cls(FilterKind.MAIN_CATEGORY, category=category)

    @classmethod
    def of_local_category(cls, category: MainCategory) -> "ItemFilter":
        return cls(FilterKind.LOCAL_MAIN_CATEGORY, category=category)

    @classmethod
    def of_subcategory(cls, category: MainCategory, sub: str) -> "ItemFilter":
        return cls(FilterKind.SUBCATEGORY, category=category, subcategory=sub)

    @classmethod
    def of_local_subcategory(cls, category: MainCategory, sub: str) -> "ItemFilter":
        return cls(FilterKind.LOCAL_SUBCATEGORY, category=category, subcategory=sub)

    @classmethod
    def parse(cls, text: str) -> "ItemFilter":
        words = text.strip().split(None, 1)
        if not words:
            raise ValueError("empty filter")
        if len(words) == 1:
            token = words[0]
            if token.lower() == "all":
                return cls.all()
            if "/" in token:
                main, sub = token.split("/", 1)
                return cls.of_subcategory(MainCategory.parse(main), sub.lower())
            try:
                return cls.of_locality(Locality.parse(token))
            except ValueError:
                return cls.of_category(MainCategory.parse(token))
        head, rest = words
        if Locality.parse(head) is not Locality.LOCAL:
            raise ValueError(f"only 'Local' may qualify a category filter: {text!r}")
        if "/" in rest:
            main, sub = rest.split("/", 1)
            return cls.of_local_subcategory(MainCategory.parse(main), sub.strip().lower())
        return cls.of_local_category(MainCategory.parse(rest))

    @property
    def label(self) -> str:
        k = self.kind
        if k is FilterKind.ALL:
            return "All"
        if k is FilterKind.LOCALITY:
            return self.locality.value
        if k is FilterKind.MAIN_CATEGORY:
            return self.category.value
        if k is FilterKind.LOCAL_MAIN_CATEGORY:
            return f"Local {self.category.value}"
        if k is FilterKind.SUBCATEGORY:
            return f"{self.category.value}/{self.subcategory}"
        return f"Local {self.category.value}/{self.subcategory}"

    def __str__(self):
        return self.label

    def __call__(self, article: Article) -> bool:
        return apply_filter(self, article)


def apply_filter(f: ItemFilter, article: Article) -> bool:
    k = f.kind
    if k is FilterKind.ALL:
        return True
    if k is FilterKind.LOCALITY:
        return article.locality is f.locality
    is_local = article.locality is Locality.LOCAL
    if k is FilterKind.MAIN_CATEGORY:
        return article.main_category is f.category
    if k is FilterKind.LOCAL_MAIN_CATEGORY:
        return is_local and article.main_category is f.category
    same_sub = article.main_category is f.category and article.subcategory == f.subcategory
    if k is FilterKind.SUBCATEGORY:
        return same_sub
    return is_local and same_sub


DEFAULT_CUTOFFS = (10, 20)


@dataclass(frozen=True)
class ScenarioSpec:
    train_filter: ItemFilter
    test_filter: ItemFilter
    method: Method
    cutoffs: tuple[int, ...] = DEFAULT_CUTOFFS

    def __post_init__(self):
        cs = tuple(self.cutoffs)
        if not cs or cs[0] < 1 or any(a >= b for a, b in zip(cs, cs[1:])):
            raise ValueError(f"cutoffs must be strictly increasing and >= 1, got {cs}")
        object.__setattr__(self, "cutoffs", cs)


@dataclass(frozen=True)
class MetricsReport:
    """HR/MRR/NDCG per cutoff plus the counts needed to interpret them."""

    cutoffs: tuple[int, ...]
    hr: dict[int, float]
    mrr: dict[int, float]
    ndcg: dict[int, float]
    evaluation_events: int
    skipped_targets_unknown_to_model: int = 0
    sessions_evaluated: int = 0
    scenario: Optional[ScenarioSpec] = field(default=None, compare=False)

    @property
    def zero_events(self) -> bool:
        return self.evaluation_events == 0

    def with_counts(self, skipped: int, scenario: Optional[ScenarioSpec] = None) -> "MetricsReport":
        return MetricsReport(
            self.cutoffs,
            self.hr,
            self.mrr,
            self.ndcg,
            self.evaluation_events,
            skipped,
            self.sessions_evaluated,
            scenario if scenario is not None else self.scenario,
        )
