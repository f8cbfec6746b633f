import pytest

from gazeadapt.fixtures import build_corpus


@pytest.fixture(scope="session")
def corpus():
    return build_corpus()


@pytest.fixture(scope="session")
def doc(corpus):
    return corpus[0]
