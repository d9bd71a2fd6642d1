import json
import struct

import numpy as np
import pytest

from ptrparse import checkpoint
from ptrparse.checkpoint import CheckpointError
from ptrparse.decoder import greedy_decode
from ptrparse.pipeline import build_model, to_training_pairs
from ptrparse.scorer import ScorerConfig


@pytest.fixture(scope="module")
def model(toy_trees):
    cfg = ScorerConfig(embed_dim=8, encoder_hidden=8, decoder_hidden=16, mlp_hidden=8,
                       label_embed_dim=4, use_prev_label=False, legal_normalization=True, seed=4)
    return build_model(to_training_pairs(toy_trees[:40]), cfg)


def test_round_trip(model, tmp_path):
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path)
    back = checkpoint.load(path)
    assert back.config == model.config
    assert back.vocab.itos == model.vocab.itos and back.labels.itos == model.labels.itos
    for k, v in model.params.items():
        assert np.array_equal(back.params[k], v)
    toks = ("the", "dog", "saw", "a", "cat")
    assert greedy_decode(back, toks).actions == greedy_decode(model, toks).actions


def test_header_layout(model, tmp_path):
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path)
    data = path.read_bytes()
    assert data[:8] == b"PTRPARSE"
    version, hlen = struct.unpack_from("<IQ", data, 8)
    header = json.loads(data[20:20 + hlen])
    total = sum(t["count"] for t in header["tensors"])
    assert version == 1 and len(data) == 20 + hlen + 8 * total


def test_bad_magic(tmp_path):
    path = tmp_path / "x.ckpt"
    path.write_bytes(b"NOTACKPT" + bytes(20))
    with pytest.raises(CheckpointError, match="magic"):
        checkpoint.load(path)


def test_shape_mismatch(model, tmp_path):
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path)
    data = path.read_bytes()
    _, hlen = struct.unpack_from("<IQ", data, 8)
    header = json.loads(data[20:20 + hlen])
    header["config"]["decoder_hidden"] = 17
    raw = json.dumps(header).encode()
    path.write_bytes(data[:8] + struct.pack("<IQ", 1, len(raw)) + raw + data[20 + hlen:])
    with pytest.raises(CheckpointError, match="shape"):
        checkpoint.load(path)


def test_truncated(model, tmp_path):
    path = tmp_path / "m.ckpt"
    checkpoint.save(model, path)
    path.write_bytes(path.read_bytes()[:-16])
    with pytest.raises(CheckpointError, match="truncated"):
        checkpoint.load(path)
