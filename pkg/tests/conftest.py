from pathlib import Path

import pytest

from ontoir.index import InvertedIndex
from ontoir.ontology import load_ontology

DATA = Path(__file__).parent / "data"

# (criterion, passed) pairs recorded by test_acceptance.py
ACCEPTANCE_RESULTS: list[tuple[str, bool]] = []


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def weather_ontology():
    return load_ontology(DATA / "weather.ont")


def build_index(docs: list[dict[str, int]]) -> InvertedIndex:
    index = InvertedIndex()
    for i, counts in enumerate(docs):
        index.add_counts(counts, f"d{i}")
    return index.freeze()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")


# 10 documents over a 20-term vocabulary (t00..t19), drawn once with a
# seeded RNG and frozen here.
FIXTURE_DOCS = [
    {"t05": 6, "t06": 2, "t09": 5, "t12": 6, "t13": 6, "t18": 3},
    {"t06": 1, "t08": 2, "t09": 6, "t11": 6, "t13": 3, "t16": 5},
    {"t00": 6, "t04": 4, "t05": 3, "t06": 1, "t12": 2, "t13": 6, "t14": 6, "t17": 4},
    {"t06": 2, "t10": 3, "t11": 5, "t13": 2, "t17": 2, "t19": 4},
    {"t00": 3, "t07": 5, "t08": 5},
    {"t02": 5, "t03": 4, "t05": 4, "t07": 6, "t10": 5, "t13": 3, "t15": 3, "t16": 2, "t18": 3},
    {"t04": 1, "t05": 6, "t06": 2, "t10": 1, "t14": 5},
    {"t01": 2, "t04": 3, "t07": 1, "t14": 2},
    {"t07": 5, "t08": 6, "t09": 4, "t14": 4},
    {"t02": 6, "t06": 5, "t08": 5, "t09": 6, "t17": 3, "t18": 1},
]

FIXTURE_QUERIES = [
    {"t05": 2, "t06": 3, "t12": 2, "t19": 1},
    {"t18": 3},
    {"t01": 3, "t02": 3, "t03": 1, "t07": 1},
    {"t16": 1},
    {"t15": 3, "t18": 1},
    {"t02": 3, "t04": 1},
    {"t06": 1, "t09": 2, "t13": 1, "t14": 1, "zz": 4},
]

FIXTURE_TERMS = [f"t{i:02d}" for i in range(20)]
# columns for the dense oracle, including query-only terms
ORACLE_TERMS = sorted({t for c in FIXTURE_DOCS + FIXTURE_QUERIES for t in c})


def dense(counts: dict, terms=ORACLE_TERMS) -> list[int]:
    return [counts.get(t, 0) for t in terms]


def make_query(counts: dict, query_id=None):
    from ontoir.ontology import DocVector
    from ontoir.search import Query

    return Query(query_id, DocVector(query_id, sorted((t, float(n)) for t, n in counts.items())))
