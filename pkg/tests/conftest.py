import numpy as np
import pytest

from ptrparse.data import load_toy_ner, load_toy_treebank
from ptrparse.pipeline import build_model, to_training_pairs
from ptrparse.scorer import ScorerConfig
from ptrparse.trainer import TrainConfig, train

# memorization setup shared by the decoder tests and the acceptance suite
MEMO_SCORER = dict(embed_dim=32, encoder_hidden=32, decoder_hidden=64, mlp_hidden=32,
                   label_embed_dim=16, dropout_rate=0.0, seed=0)
MEMO_TRAIN = dict(epochs=200, max_tokens_per_batch=200, peak_lr=2e-3, seed=0)


def _memorize(items):
    pairs = to_training_pairs(items)
    model = build_model(pairs, ScorerConfig(**MEMO_SCORER))
    result = train(model, pairs, TrainConfig(**MEMO_TRAIN), dev=[])
    return model, result


@pytest.fixture(scope="session")
def toy_trees():
    return load_toy_treebank()


@pytest.fixture(scope="session")
def toy_ner():
    return load_toy_ner()


@pytest.fixture(scope="session")
def memorized_parser(toy_trees):
    return _memorize(toy_trees)


@pytest.fixture(scope="session")
def memorized_ner(toy_ner):
    return _memorize(toy_ner)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_acceptance = []


def pytest_runtest_makereport(item, call):
    if call.when == "call" and item.module.__name__.endswith("test_acceptance"):
        detail = dict(item.user_properties).get("detail", "")
        outcome = "PASS" if call.excinfo is None else "FAIL"
        _acceptance.append((item.name, outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, detail in _acceptance:
        terminalreporter.write_line(f"{outcome}  {name}  {detail}")
