import pytest

from app.cli import Toolkit
from app.utils.config import Settings


@pytest.fixture
def settings():
    return Settings()


@pytest.fixture
def toolkit(settings):
    return Toolkit(settings)


@pytest.fixture
def matching_service(toolkit):
    return toolkit.matching


@pytest.fixture
def star_service(toolkit):
    return toolkit.star


@pytest.fixture
def bounds_service(toolkit):
    return toolkit.bounds


@pytest.fixture
def transform_service(toolkit):
    return toolkit.transform


@pytest.fixture
def verifier_service(toolkit):
    return toolkit.verifier


@pytest.fixture
def write_graph(tmp_path):
    """Write edge-list text to a file and return its path."""

    def write(text: str, name: str = "graph.txt") -> str:
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write
