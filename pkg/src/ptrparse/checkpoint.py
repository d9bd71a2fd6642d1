"""Portable model checkpoints.

Layout (all integers little-endian)::

    bytes 0-7    magic  b"PTRPARSE"
    bytes 8-11   uint32 format version (currently 1)
    bytes 12-19  uint64 header length H
    next H bytes UTF-8 JSON header:
                   {"config": {...ScorerConfig fields...},
                    "vocab": [token, ...],        # id order
                    "labels": [label, ...],       # id order, EMPTY first
                    "tensors": [{"name", "shape", "offset", "count"}, ...]}
    payload      float64 little-endian values, C order; ``offset`` and
                 ``count`` are in elements from the start of the payload
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .scorer import LabelSet, PointerScorer, ScorerConfig, Vocabulary, param_shapes

MAGIC = b"PTRPARSE"
VERSION = 1


class CheckpointError(ValueError):
    pass


def save(model: PointerScorer, path) -> None:
    tensors = []
    offset = 0
    for name in sorted(model.params):
        arr = model.params[name]
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset, "count": int(arr.size)})
        offset += arr.size
    header = json.dumps({
        "config": model.config.to_dict(),
        "vocab": model.vocab.itos,
        "labels": model.labels.itos,
        "tensors": tensors,
    }).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQ", VERSION, len(header)))
        f.write(header)
        for name in sorted(model.params):
            f.write(np.ascontiguousarray(model.params[name], dtype="<f8").tobytes())


def load(path) -> PointerScorer:
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint (bad magic)")
    version, hlen = struct.unpack_from("<IQ", data, 8)
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    header = json.loads(data[20:20 + hlen].decode("utf-8"))
    payload = np.frombuffer(data, dtype="<f8", offset=20 + hlen)
    config = ScorerConfig(**header["config"])
    vocab = Vocabulary(header["vocab"][3:])
    if vocab.itos != header["vocab"]:
        raise CheckpointError(f"{path}: vocabulary does not start with the reserved tokens")
    labels = LabelSet(header["labels"])
    if labels.itos != header["labels"]:
        raise CheckpointError(f"{path}: label inventory is not in canonical order")
    if config.vocab_size != len(vocab) or config.label_count != len(labels):
        raise CheckpointError(f"{path}: config/vocabulary size mismatch")
    expected = param_shapes(config)
    params = {}
    for t in header["tensors"]:
        name, shape = t["name"], tuple(t["shape"])
        if expected.get(name) != shape:
            raise CheckpointError(f"{path}: tensor {name} has shape {shape}, config expects {expected.get(name)}")
        chunk = payload[t["offset"]:t["offset"] + t["count"]]
        if chunk.size != t["count"]:
            raise CheckpointError(f"{path}: truncated tensor {name}")
        params[name] = chunk.astype(np.float64).reshape(shape)
    missing = set(expected) - set(params)
    if missing:
        raise CheckpointError(f"{path}: missing tensors {sorted(missing)}")
    return PointerScorer(config, vocab, labels, params)
