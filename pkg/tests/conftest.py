import pytest

from fgdata.synthetic import make_corpus


@pytest.fixture(scope="session")
def corpus(tmp_path_factory):
    """Shared synthetic corpus: 54 clean images + 6 injected failures."""
    root = tmp_path_factory.mktemp("corpus")
    return make_corpus(root, n_clean=54, n_classes=3, seed=0)
