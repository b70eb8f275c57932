import pytest

from tweetsent import synthetic


@pytest.fixture(scope="session")
def mini_corpus(tmp_path_factory):
    """Small generated corpus shared by the fast end-to-end tests."""
    out = tmp_path_factory.mktemp("mini-corpus")
    synthetic.generate(out, seed=7, train_size=120, dev_size=60, test_size=60)
    return out


@pytest.fixture(scope="session")
def full_corpus(tmp_path_factory):
    """Default-size corpus (500/200/200) for the heavier end-to-end checks."""
    out = tmp_path_factory.mktemp("full-corpus")
    synthetic.generate(out, seed=7)
    return out
