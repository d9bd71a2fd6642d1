"""Bundled synthetic corpora (regenerate with ``python -m ptrparse.data``)."""

from importlib import resources

TOY_TREEBANK = "toy_treebank.txt"
TOY_NER = "toy_ner.jsonl"


def path(name: str):
    return resources.files(__name__) / name


def load_toy_treebank():
    from ..treebank import read_trees
    return read_trees(path(TOY_TREEBANK).read_text(encoding="utf-8").splitlines())


def load_toy_ner():
    from ..treebank import read_records
    return read_records(path(TOY_NER).read_text(encoding="utf-8").splitlines())
