"""Clickstream ingestion: parsing, tagging and day-long session assembly.

File formats
------------
events (CSV, UTF-8, header row)::

    user_id,timestamp,url,title[,main_category]

``timestamp`` is integer epoch seconds or ISO-8601 (naive values are UTC).

tagging rules (YAML or JSON)::

    local_keywords: [Syracuse, Onondaga County, ...]
    nonlocal_keywords: [US Government, Lottery, ...]
    overrides: {<article_id or url>: Local|NonLocal}
    category_map: {<subcategory>: News|Sports|LifeCulture|Other}   # optional

session store (TSV, no header)::

    session_id<TAB>user_id<TAB>YYYY-MM-DD<TAB>item,item,...

catalog (TSV, header row)::

    article_id  url  title  locality  main_category  subcategory
"""

from __future__ import annotations

import csv
import datetime as dt
import hashlib
import io
import logging
import os
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Union
from urllib.parse import urlsplit
from zoneinfo import ZoneInfo

import yaml

from locrec.errors import ConfigError, DataError
from locrec.model import Article, Interaction, Locality, MainCategory, Session

log = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]

EVENT_COLUMNS = ("user_id", "timestamp", "url", "title")
CATALOG_COLUMNS = ("article_id", "url", "title", "locality", "main_category", "subcategory")

# Share of malformed rows above which ingestion fails outright.
MAX_MALFORMED_FRACTION = 0.01


class RejectedRecord(DataError):
    """A single input record that could not be parsed."""

    def __init__(self, message, line=None, row=None):
        super().__init__(message, rows=[row] if row is not None else [])
        self.line = line
        self.row = row


@dataclass(frozen=True)
class RawEvent:
    user_id: str
    url: str
    title: str
    timestamp: int
    main_category: Optional[str] = None


@dataclass(frozen=True)
class TaggingRules:
    local_keywords: tuple[str, ...]
    nonlocal_keywords: tuple[str, ...]
    overrides: Mapping[str, Locality] = field(default_factory=dict)
    category_map: Mapping[str, MainCategory] = field(default_factory=dict)

    def __post_init__(self):
        if not self.local_keywords or not self.nonlocal_keywords:
            raise ConfigError("tagging rules need non-empty local_keywords and nonlocal_keywords")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "TaggingRules":
        if not isinstance(data, Mapping):
            raise ConfigError("tagging rules must be a mapping")
        try:
            overrides = {str(k): Locality.parse(str(v)) for k, v in (data.get("overrides") or {}).items()}
            cmap = {
                str(k).strip("/").lower(): MainCategory.parse(str(v))
                for k, v in (data.get("category_map") or {}).items()
            }
        except ValueError as exc:
            raise ConfigError(f"bad tagging rules: {exc}") from exc
        return cls(
            local_keywords=tuple(str(k) for k in data.get("local_keywords") or ()),
            nonlocal_keywords=tuple(str(k) for k in data.get("nonlocal_keywords") or ()),
            overrides=overrides,
            category_map=cmap,
        )

    def to_mapping(self) -> dict:
        out = {
            "local_keywords": list(self.local_keywords),
            "nonlocal_keywords": list(self.nonlocal_keywords),
            "overrides": {k: v.value for k, v in sorted(self.overrides.items())},
        }
        if self.category_map:
            out["category_map"] = {k: v.value for k, v in sorted(self.category_map.items())}
        return out


def load_rules(path: PathLike) -> TaggingRules:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise DataError(f"cannot read tagging rules {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse tagging rules {path}: {exc}") from exc
    return TaggingRules.from_mapping(data or {})


def article_id_for(url: str) -> str:
    """Stable opaque id derived from the article URL."""
    return hashlib.sha1(url.strip().encode("utf-8")).hexdigest()[:12]


def _split_absolute(url: str):
    try:
        parts = urlsplit(url.strip())
    except ValueError as exc:
        raise RejectedRecord(f"malformed URL {url!r}", line=url) from exc
    if not parts.scheme or not parts.netloc:
        raise RejectedRecord(f"URL is not absolute: {url!r}", line=url)
    return parts


def extract_subcategory(url: str) -> Optional[str]:
    """First directory of the URL path, lowercased; None if there is none.

    >>> extract_subcategory("https://www.syracuse.com/auto/2018/12/new_silverado_in_february_2019.html")
    'auto'
    """
    segments = _split_absolute(url).path.split("/")[1:]
    # the last segment is the terminal filename (empty for a trailing slash)
    dirs = [s for s in segments[:-1] if s]
    if not dirs:
        return None
    return dirs[0].lower()


def tag_locality(
    article_id: str,
    title: str,
    url: str,
    rules: TaggingRules,
    unmatched: Optional[list] = None,
) -> Locality:
    """Keyword tagging. Overrides win, then local keywords, then non-local ones.

    Articles matching no keyword default to NonLocal and are appended to
    ``unmatched`` as ``(article_id, title)`` for manual review.
    """
    for key in (article_id, url):
        if key in rules.overrides:
            return rules.overrides[key]
    haystack = f"{title}\n{url}".lower()
    if any(k.lower() in haystack for k in rules.local_keywords):
        return Locality.LOCAL
    if any(k.lower() in haystack for k in rules.nonlocal_keywords):
        return Locality.NONLOCAL
    if unmatched is not None:
        unmatched.append((article_id, title))
    return Locality.NONLOCAL


def parse_timestamp(text: str) -> int:
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        pass
    try:
        stamp = dt.datetime.fromisoformat(text.replace("Z", "+00:00"))
    except ValueError:
        raise ValueError(f"unparseable timestamp {text!r}") from None
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=dt.timezone.utc)
    return int(stamp.timestamp())


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)):
        try:
            with open(source, encoding="utf-8", newline="") as fh:
                return fh.read()
        except OSError as exc:
            raise DataError(f"cannot read {source}: {exc}") from exc
    return source.read()


def read_events(source) -> tuple[list[RawEvent], list[RejectedRecord]]:
    """Parse an events CSV. Returns the good events and the rejected rows.

    Row numbers in rejections count the header as row 1.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None:
        return [], []
    header = [h.strip().lower() for h in header]
    if tuple(header[:4]) != EVENT_COLUMNS:
        raise DataError(f"events header must start with {','.join(EVENT_COLUMNS)}, got {','.join(header)}")
    has_category = len(header) > 4 and header[4] == "main_category"
    width = 5 if has_category else 4

    events, rejected = [], []
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        raw = ",".join(row)
        try:
            if len(row) != width:
                raise ValueError(f"expected {width} columns, got {len(row)}")
            user, stamp, url, title = (c.strip() for c in row[:4])
            if not user:
                raise ValueError("empty user_id")
            if not title:
                raise ValueError("empty title")
            _split_absolute(url)
            label = row[4].strip() if has_category else ""
            events.append(RawEvent(user, url, title, parse_timestamp(stamp), label or None))
        except (ValueError, RejectedRecord) as exc:
            rejected.append(RejectedRecord(f"row {rowno}: {exc}", line=raw, row=rowno))
    return events, rejected


def _main_category(label: Optional[str], sub: Optional[str], rules: TaggingRules) -> MainCategory:
    if label:
        return MainCategory.parse(label)
    if sub is not None and sub in rules.category_map:
        return rules.category_map[sub]
    return MainCategory.OTHER


def build_catalog(events: Iterable[RawEvent], rules: TaggingRules) -> tuple[dict[str, Article], list]:
    """One article per distinct URL; the first title/label seen is kept.

    Returns ``(catalog keyed by article_id, unmatched audit entries)``.
    """
    first: dict[str, RawEvent] = {}
    labels: dict[str, str] = {}
    for ev in events:
        first.setdefault(ev.url, ev)
        if ev.main_category and ev.url not in labels:
            labels[ev.url] = ev.main_category
    catalog: dict[str, Article] = {}
    unmatched: list = []
    for url in sorted(first):
        ev = first[url]
        aid = article_id_for(url)
        sub = extract_subcategory(url)
        try:
            category = _main_category(labels.get(url), sub, rules)
        except ValueError as exc:
            raise DataError(f"article {url}: {exc}") from exc
        catalog[aid] = Article(
            article_id=aid,
            url=url,
            title=ev.title,
            locality=tag_locality(aid, ev.title, url, rules, unmatched),
            main_category=category,
            subcategory=sub,
        )
    return catalog, unmatched


def build_sessions(
    events: Iterable[RawEvent],
    catalog: Mapping[str, Article],
    tz: Union[str, dt.tzinfo] = "UTC",
) -> list[Session]:
    """Group events into one session per (user, calendar day under ``tz``).

    Events whose URL is not in the catalog are dropped. Sessions with a single
    event are discarded. Output is sorted by (day, user_id).
    """
    zone = ZoneInfo(tz) if isinstance(tz, str) else tz
    by_url = {a.url: a.article_id for a in catalog.values()}
    groups: dict[tuple[dt.date, str], list[Interaction]] = defaultdict(list)
    unresolved = 0
    for ev in events:
        aid = by_url.get(ev.url)
        if aid is None:
            unresolved += 1
            continue
        day = dt.datetime.fromtimestamp(ev.timestamp, zone).date()
        groups[(day, ev.user_id)].append(Interaction(ev.user_id, aid, ev.timestamp))
    if unresolved:
        log.warning("dropped %d events not resolvable to a catalog article", unresolved)

    sessions = []
    for (day, user) in sorted(groups):
        clicks = groups[(day, user)]
        if len(clicks) < 2:
            continue
        clicks.sort(key=lambda e: e.timestamp)  # stable: ties keep input order
        sessions.append(Session(f"{user}@{day.isoformat()}", user, day, tuple(clicks)))
    return sessions


@dataclass(frozen=True)
class DatasetStats:
    articles: int
    local_articles: int
    nonlocal_articles: int
    sessions: int
    period: Optional[tuple[dt.date, dt.date]]
    # percentage of all articles per (locality, main category)
    breakdown: dict[tuple[Locality, MainCategory], float]

    def to_text(self) -> str:
        lines = []
        if self.period:
            lines.append(f"period\t{self.period[0].isoformat()} - {self.period[1].isoformat()}")
        lines += [
            f"#articles\t{self.articles}",
            f"#local articles\t{self.local_articles}",
            f"#non-local articles\t{self.nonlocal_articles}",
            f"#sessions\t{self.sessions}",
            "",
            "Locality\t" + "\t".join(c.value for c in MainCategory),
        ]
        for loc in Locality:
            cells = [f"{self.breakdown[(loc, c)]:.2f}%" for c in MainCategory]
            lines.append(f"{loc.value}\t" + "\t".join(cells))
        return "\n".join(lines) + "\n"


def dataset_stats(catalog: Mapping[str, Article], sessions: list[Session]) -> DatasetStats:
    """Table-1/Table-2 style summary.

    The breakdown reports each (locality, category) cell as a share of all
    articles, so the cells sum to 100% for a non-empty catalog.
    """
    n = len(catalog)
    counts = {(loc, c): 0 for loc in Locality for c in MainCategory}
    for a in catalog.values():
        counts[(a.locality, a.main_category)] += 1
    local = sum(v for (loc, _), v in counts.items() if loc is Locality.LOCAL)
    breakdown = {key: (100.0 * v / n if n else 0.0) for key, v in counts.items()}
    period = (min(s.day for s in sessions), max(s.day for s in sessions)) if sessions else None
    return DatasetStats(n, local, n - local, len(sessions), period, breakdown)


@dataclass
class IngestResult:
    catalog: dict[str, Article]
    sessions: list[Session]
    unmatched: list
    rejected: list[RejectedRecord]
    total_rows: int


def ingest(events_path, rules: Union[TaggingRules, PathLike], tz="UTC") -> IngestResult:
    """Full preprocessing: parse, tag, sessionize.

    Raises DataError for an empty dataset or when more than 1% of rows are
    malformed; below that threshold bad rows are dropped and reported.
    """
    if not isinstance(rules, TaggingRules):
        rules = load_rules(rules)
    events, rejected = read_events(events_path)
    total = len(events) + len(rejected)
    if total == 0:
        raise DataError("empty dataset")
    if len(rejected) > MAX_MALFORMED_FRACTION * total:
        rows = [r.row for r in rejected]
        shown = ", ".join(str(r) for r in rows[:20]) + (" ..." if len(rows) > 20 else "")
        raise DataError(f"{len(rejected)} of {total} rows malformed (rows {shown})", rows=rows)
    for r in rejected:
        log.warning("skipping %s", r)
    catalog, unmatched = build_catalog(events, rules)
    sessions = build_sessions(events, catalog, tz)
    return IngestResult(catalog, sessions, unmatched, rejected, total)


# -- line-oriented stores ---------------------------------------------------


def write_sessions(sessions: Iterable[Session], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for s in sessions:
            fh.write(f"{s.session_id}\t{s.user_id}\t{s.day.isoformat()}\t{','.join(s.items)}\n")


def read_sessions(path: PathLike) -> list[Session]:
    sessions = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read session store {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                sid, user, day, items = line.split("\t")
                events = tuple(Interaction(user, a) for a in items.split(","))
                sessions.append(Session(sid, user, dt.date.fromisoformat(day), events))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad session line ({exc})", rows=[lineno]) from exc
    return sessions


def write_catalog(catalog: Mapping[str, Article], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(CATALOG_COLUMNS)
        for aid in sorted(catalog):
            a = catalog[aid]
            w.writerow([a.article_id, a.url, a.title, a.locality.value, a.main_category.value, a.subcategory or ""])


def read_catalog(path: PathLike) -> dict[str, Article]:
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise DataError(f"cannot read catalog {path}: {exc}") from exc
    catalog = {}
    with fh:
        reader = csv.DictReader(fh, delimiter="\t")
        if tuple(reader.fieldnames or ()) != CATALOG_COLUMNS:
            raise DataError(f"catalog {path} must have columns {' '.join(CATALOG_COLUMNS)}")
        for rowno, row in enumerate(reader, start=2):
            try:
                a = Article(
                    article_id=row["article_id"],
                    url=row["url"],
                    title=row["title"],
                    locality=Locality.parse(row["locality"]),
                    main_category=MainCategory.parse(row["main_category"]),
                    subcategory=row["subcategory"] or None,
                )
            except (ValueError, TypeError) as exc:
                raise DataError(f"{path}:{rowno}: {exc}", rows=[rowno]) from exc
            if a.article_id in catalog:
                raise DataError(f"{path}:{rowno}: duplicate article_id {a.article_id}", rows=[rowno])
            catalog[a.article_id] = a
    return catalog


def write_audit(unmatched: Iterable, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for aid, title in unmatched:
            fh.write(f"{aid}\t{title}\n")
