from pathlib import Path

import pytest

from cqac.query_model import parse, parse_database, parse_query

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load_query(name):
    return parse_query((DATA / name).read_text())


def load_views(name):
    return parse((DATA / name).read_text()).queries


def load_facts(name):
    return parse_database((DATA / name).read_text())


@pytest.fixture
def data_dir():
    return DATA
