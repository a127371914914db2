import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from locrec.evaluation import Dataset
from locrec.ingest import build_catalog, build_sessions
from locrec.model import Article, Locality, MainCategory
from locrec import synthgen

# (criterion, passed, detail) lines gathered by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{status:4s}  {name}: {detail}")


def make_article(aid, locality=Locality.LOCAL, category=MainCategory.NEWS, sub=None):
    return Article(aid, f"https://host.com/{sub or 'x'}/{aid}.html", f"title {aid}", locality, category, sub)


def dataset_from(cfg):
    _, events = synthgen.generate(cfg)
    catalog, _ = build_catalog(events, synthgen.tagging_rules())
    return Dataset(catalog, build_sessions(events, catalog))


@pytest.fixture(scope="session")
def default_corpus():
    return dataset_from(synthgen.GeneratorConfig(seed=42))


@pytest.fixture(scope="session")
def small_cfg():
    return synthgen.GeneratorConfig(seed=3, n_users=60, n_days=14, n_articles=300)


@pytest.fixture(scope="session")
def small_corpus(small_cfg):
    return dataset_from(small_cfg)
