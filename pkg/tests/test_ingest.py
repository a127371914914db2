import datetime as dt
import io

import pytest
from hypothesis import given, strategies as st

from locrec.errors import ConfigError, DataError
from locrec.ingest import (
    RawEvent,
    RejectedRecord,
    TaggingRules,
    article_id_for,
    build_catalog,
    build_sessions,
    dataset_stats,
    extract_subcategory,
    ingest,
    read_catalog,
    read_events,
    read_sessions,
    tag_locality,
    write_catalog,
    write_sessions,
)
from locrec.model import Locality, MainCategory
from locrec import synthgen

RULES = TaggingRules(local_keywords=("Binghamton", "Syracuse"), nonlocal_keywords=("US Government",))
D = int(dt.datetime(2019, 1, 15, tzinfo=dt.timezone.utc).timestamp())
HOUR = 3600


@pytest.mark.parametrize(
    "url, expected",
    [
        ("https://www.syracuse.com/auto/2018/12/new_silverado_in_february_2019.html", "auto"),
        ("https://host.com/", None),
        ("https://host.com", None),
        ("https://host.com/crime/2019/01/x.html", "crime"),
        ("https://host.com/index.html", None),
        ("https://host.com/Crime/", "crime"),
        ("https://host.com//news//x.html", "news"),
        ("https://host.com/sports/x.html?id=3#top", "sports"),
    ],
)
def test_extract_subcategory(url, expected):
    assert extract_subcategory(url) == expected


@pytest.mark.parametrize("url", ["/auto/x.html", "not a url", "host.com/auto/x.html", "http://[::1/x"])
def test_extract_subcategory_rejects_relative_or_malformed(url):
    with pytest.raises(RejectedRecord) as info:
        extract_subcategory(url)
    assert info.value.line == url


def test_tag_nonlocal_keyword():
    title = "US government quietly spends millions to guard confederate cemeteries"
    assert tag_locality("a", title, "https://h.com/news/a.html", RULES) is Locality.NONLOCAL


def test_tag_local_keyword():
    title = "On this date: Binghamton 'evacuated' in nation's largest civil defense drill in 1957"
    assert tag_locality("a", title, "https://h.com/news/a.html", RULES) is Locality.LOCAL


def test_local_keyword_wins_over_nonlocal():
    title = "US Government grant lands in Binghamton"
    assert tag_locality("a", title, "https://h.com/news/a.html", RULES) is Locality.LOCAL


def test_keyword_can_match_url():
    assert tag_locality("a", "Snow day", "https://h.com/syracuse/a.html", RULES) is Locality.LOCAL


def test_unmatched_defaults_to_nonlocal_and_is_audited():
    audit = []
    assert tag_locality("a1", "Weather", "https://h.com/x.html", RULES, audit) is Locality.NONLOCAL
    assert audit == [("a1", "Weather")]


def test_override_beats_keywords():
    rules = TaggingRules(RULES.local_keywords, RULES.nonlocal_keywords, {"a1": Locality.NONLOCAL})
    assert tag_locality("a1", "Binghamton", "https://h.com/x.html", rules) is Locality.NONLOCAL


def test_rules_need_keywords():
    with pytest.raises(ConfigError):
        TaggingRules.from_mapping({"local_keywords": ["x"], "nonlocal_keywords": []})
    rules = TaggingRules.from_mapping(
        {"local_keywords": ["x"], "nonlocal_keywords": ["y"], "overrides": {"a": "local"}, "category_map": {"/Crime/": "news"}}
    )
    assert rules.overrides == {"a": Locality.LOCAL}
    assert rules.category_map == {"crime": MainCategory.NEWS}


def _catalog(*urls):
    events = [RawEvent("u", u, "Syracuse item", 0) for u in urls]
    return build_catalog(events, RULES)[0]


def test_build_sessions_groups_same_user_day():
    a, b = "https://h.com/a/1.html", "https://h.com/a/2.html"
    catalog = _catalog(a, b)
    events = [RawEvent("u", b, "t", D + 17 * HOUR), RawEvent("u", a, "t", D + 9 * HOUR)]
    [s] = build_sessions(events, catalog)
    assert s.items == (article_id_for(a), article_id_for(b))
    assert s.day == dt.date(2019, 1, 15)
    assert s.user_id == "u"


def test_build_sessions_drops_singletons():
    a = "https://h.com/a/1.html"
    catalog = _catalog(a)
    assert build_sessions([RawEvent("u", a, "t", D)], catalog) == []
    assert build_sessions([RawEvent("u", a, "t", D), RawEvent("v", a, "t", D)], catalog) == []
    assert build_sessions([], catalog) == []


def test_build_sessions_splits_at_midnight_in_configured_zone():
    a, b = "https://h.com/a/1.html", "https://h.com/a/2.html"
    catalog = _catalog(a, b)
    # 23:30 and 00:30 UTC; both fall on the same New York calendar day
    events = [RawEvent("u", a, "t", D - HOUR // 2), RawEvent("u", b, "t", D + HOUR // 2)]
    assert build_sessions(events, catalog, "UTC") == []
    [s] = build_sessions(events, catalog, "America/New_York")
    assert s.day == dt.date(2019, 1, 14)


def test_build_sessions_tie_keeps_input_order_and_drops_unknown():
    a, b = "https://h.com/a/1.html", "https://h.com/a/2.html"
    catalog = _catalog(a, b)
    events = [RawEvent("u", b, "t", D), RawEvent("u", "https://h.com/zzz", "t", D), RawEvent("u", a, "t", D)]
    [s] = build_sessions(events, catalog)
    assert s.items == (article_id_for(b), article_id_for(a))


def test_sessions_sorted_by_day_then_user():
    a, b = "https://h.com/a/1.html", "https://h.com/a/2.html"
    catalog = _catalog(a, b)
    events = []
    for user, day in (("v", 1), ("u", 1), ("a", 0)):
        events += [RawEvent(user, a, "t", D + day * 86400), RawEvent(user, b, "t", D + day * 86400 + 60)]
    assert [(s.day.day, s.user_id) for s in build_sessions(events, catalog)] == [(15, "a"), (16, "u"), (16, "v")]


def test_dataset_stats():
    empty = dataset_stats({}, [])
    assert (empty.articles, empty.local_articles, empty.nonlocal_articles, empty.sessions) == (0, 0, 0, 0)
    assert set(empty.breakdown.values()) == {0.0}

    events = [RawEvent("u", f"https://h.com/x/{n}.html", "Syracuse", 0) for n in range(3)]
    events.append(RawEvent("u", "https://h.com/x/9.html", "US Government", 0, "Sports"))
    catalog, _ = build_catalog(events, RULES)
    stats = dataset_stats(catalog, [])
    assert (stats.articles, stats.local_articles, stats.nonlocal_articles) == (4, 3, 1)
    assert 100.0 * stats.local_articles / stats.articles == 75.0
    assert stats.breakdown[(Locality.LOCAL, MainCategory.OTHER)] == 75.0
    assert stats.breakdown[(Locality.NONLOCAL, MainCategory.SPORTS)] == 25.0
    assert "#local articles\t3" in stats.to_text()


def test_main_category_label_then_mapping_then_other():
    rules = TaggingRules(("a",), ("b",), category_map={"crime": MainCategory.NEWS})
    events = [
        RawEvent("u", "https://h.com/crime/1.html", "t", 0, "Sports"),
        RawEvent("u", "https://h.com/crime/2.html", "t", 0),
        RawEvent("u", "https://h.com/misc/3.html", "t", 0),
    ]
    catalog, _ = build_catalog(events, rules)
    cats = {a.url[-6:]: a.main_category for a in catalog.values()}
    assert cats == {"1.html": MainCategory.SPORTS, "2.html": MainCategory.NEWS, "3.html": MainCategory.OTHER}


def test_read_events_collects_bad_rows():
    text = (
        "user_id,timestamp,url,title\n"
        "u,1547510400,https://h.com/a/1.html,Title\n"
        "u,2019-01-15T10:00:00Z,https://h.com/a/2.html,Title\n"
        "u,yesterday,https://h.com/a/2.html,Title\n"
        "u,1547510400,/relative.html,Title\n"
        "u,1547510400,https://h.com/a/2.html\n"
    )
    events, rejected = read_events(io.StringIO(text))
    assert [e.timestamp for e in events] == [1547510400, 1547546400]
    assert [r.row for r in rejected] == [4, 5, 6]


def test_read_events_requires_header():
    with pytest.raises(DataError):
        read_events(io.StringIO("a,b,c,d\n"))


def _write_events(path, rows, bad=0):
    lines = ["user_id,timestamp,url,title"]
    lines += [f"u{n % 7},{D + n},https://h.com/a/{n % 13}.html,Syracuse {n}" for n in range(rows)]
    lines += ["u,notatime,https://h.com/a/1.html,x"] * bad
    path.write_text("\n".join(lines) + "\n")


def test_ingest_tolerates_one_percent_malformed(tmp_path):
    _write_events(tmp_path / "e.csv", 99, bad=1)
    result = ingest(tmp_path / "e.csv", RULES)
    assert len(result.rejected) == 1 and result.total_rows == 100


def test_ingest_fails_above_one_percent_with_row_numbers(tmp_path):
    _write_events(tmp_path / "e.csv", 98, bad=2)
    with pytest.raises(DataError) as info:
        ingest(tmp_path / "e.csv", RULES)
    assert info.value.rows == [100, 101]
    assert "100, 101" in str(info.value)


def test_ingest_empty(tmp_path):
    (tmp_path / "e.csv").write_text("user_id,timestamp,url,title\n")
    with pytest.raises(DataError, match="empty dataset"):
        ingest(tmp_path / "e.csv", RULES)


def test_ingest_is_deterministic(tmp_path):
    _write_events(tmp_path / "e.csv", 200)
    first, second = ingest(tmp_path / "e.csv", RULES), ingest(tmp_path / "e.csv", RULES)
    assert first.sessions == second.sessions and first.catalog == second.catalog


def test_stores_roundtrip(tmp_path, small_corpus):
    write_sessions(small_corpus.sessions, tmp_path / "s.tsv")
    write_catalog(small_corpus.catalog, tmp_path / "c.tsv")
    assert read_catalog(tmp_path / "c.tsv") == small_corpus.catalog
    loaded = read_sessions(tmp_path / "s.tsv")
    assert [(s.session_id, s.user_id, s.day, s.items) for s in loaded] == [
        (s.session_id, s.user_id, s.day, s.items) for s in small_corpus.sessions
    ]


def test_read_sessions_rejects_garbage(tmp_path):
    (tmp_path / "s.tsv").write_text("only\ttwo\n")
    with pytest.raises(DataError):
        read_sessions(tmp_path / "s.tsv")


def test_ingested_sessions_satisfy_invariants(small_corpus):
    s_all = small_corpus.sessions
    assert s_all
    for s in s_all:
        assert len(s) >= 2
        stamps = [e.timestamp for e in s.events]
        assert stamps == sorted(stamps)
        assert {e.user_id for e in s.events} == {s.user_id}
        assert {dt.datetime.fromtimestamp(t, dt.timezone.utc).date() for t in stamps} == {s.day}
    stats = dataset_stats(small_corpus.catalog, s_all)
    assert stats.local_articles + stats.nonlocal_articles == stats.articles


def test_ingest_recovers_generator_tags(small_cfg, small_corpus):
    truth, _ = synthgen.generate(small_cfg)
    for aid, article in small_corpus.catalog.items():
        assert truth[aid] == article


@given(st.lists(st.tuples(st.sampled_from("uvw"), st.integers(0, 5 * 86400), st.sampled_from("abcd")), max_size=40))
def test_sessions_do_not_depend_on_event_order_across_users(rows):
    catalog = _catalog(*(f"https://h.com/x/{c}.html" for c in "abcd"))
    events = [RawEvent(u, f"https://h.com/x/{c}.html", "t", D + t) for u, t, c in rows]
    by_user = sorted(events, key=lambda e: e.user_id)
    assert build_sessions(events, catalog) == build_sessions(by_user, catalog)
