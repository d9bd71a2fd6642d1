"""Glue between corpora and the model: oracle extraction and model setup."""

from __future__ import annotations

from .decoder import beam_decode, greedy_decode
from .oracle import OracleSequence, extract_oracle
from .scorer import LabelSet, PointerScorer, ScorerConfig, Vocabulary
from .treebank import NerRecord, ParseTree, ner_to_tree, postprocess, preprocess, tree_to_entities


def to_training_pairs(items) -> list[tuple[tuple[str, ...], OracleSequence]]:
    """Raw trees or NER records -> (tokens, oracle) pairs."""
    pairs = []
    for item in items:
        tree = ner_to_tree(item) if isinstance(item, NerRecord) else preprocess(item)
        pairs.append((tree.tokens, extract_oracle(tree)))
    return pairs


def build_model(pairs, config: ScorerConfig | None = None, min_count: int = 2) -> PointerScorer:
    config = config or ScorerConfig()
    vocab = Vocabulary.build((tokens for tokens, _ in pairs), min_count=min_count)
    labels = LabelSet(a.label for _, oracle in pairs for a in oracle.actions)
    return PointerScorer(config, vocab, labels)


def decode(model: PointerScorer, tokens, beam_size: int = 1):
    if beam_size == 1:
        return greedy_decode(model, tokens)
    return beam_decode(model, tokens, beam_size)


def parse_sentence(model, tokens, beam_size=1) -> ParseTree:
    return postprocess(decode(model, tokens, beam_size).tree)


def parse_entities(model, tokens, beam_size=1) -> NerRecord:
    return tree_to_entities(decode(model, tokens, beam_size).tree)
