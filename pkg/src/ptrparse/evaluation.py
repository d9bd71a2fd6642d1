"""Labeled span precision/recall/F1 and oracle action-count statistics."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .oracle import extract_oracle
from .treebank import EMPTY, NerRecord, ParseTree, TreeError, ner_to_tree, preprocess, split_label


@dataclass(frozen=True)
class PrfReport:
    precision: float
    recall: float
    f1: float
    matched: int
    predicted: int
    gold: int

    @property
    def vacuous(self) -> bool:
        return self.predicted == 0 and self.gold == 0

    @classmethod
    def from_counts(cls, matched: int, predicted: int, gold: int) -> PrfReport:
        p = matched / predicted if predicted else 0.0
        r = matched / gold if gold else 0.0
        # 2m / (predicted + gold) equals 2PR / (P + R) but rounds only once
        f = 2 * matched / (predicted + gold) if matched else 0.0
        return cls(p, r, f, matched, predicted, gold)

    def as_dict(self):
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "matched": self.matched, "predicted": self.predicted, "gold": self.gold,
                "vacuous": self.vacuous}

    def __str__(self):
        flag = "  (vacuous)" if self.vacuous else ""
        return (f"P={self.precision:.4f} R={self.recall:.4f} F1={self.f1:.4f} "
                f"matched={self.matched} predicted={self.predicted} gold={self.gold}{flag}")


def labeled_spans(tree: ParseTree, exclude_root: bool = False, collapsed: bool = False) -> Counter:
    """Multiset of (left, right, label) over the tree, EMPTY excluded.

    With ``collapsed`` each joined label such as ``S+VP`` counts once per
    chain member.  ``exclude_root`` drops every span covering the sentence.
    """
    spans = Counter()
    for node in tree.nodes():
        if exclude_root and node.span == (0, tree.n):
            continue
        labels = split_label(node.label) if collapsed else [node.label]
        for lab in labels:
            if lab != EMPTY:
                spans[(node.left, node.right, lab)] += 1
    return spans


def _aligned(gold, pred):
    if len(gold) != len(pred):
        raise ValueError(f"corpus length mismatch: {len(gold)} gold vs {len(pred)} predicted")
    for i, (g, p) in enumerate(zip(gold, pred)):
        if tuple(g.tokens) != tuple(p.tokens):
            raise ValueError(f"tokenization mismatch at index {i}")
    return zip(gold, pred)


def parseval(gold, pred, exclude_root=False, collapsed=False) -> PrfReport:
    matched = npred = ngold = 0
    for g, p in _aligned(gold, pred):
        gs = labeled_spans(g, exclude_root, collapsed)
        ps = labeled_spans(p, exclude_root, collapsed)
        matched += sum((gs & ps).values())
        npred += sum(ps.values())
        ngold += sum(gs.values())
    return PrfReport.from_counts(matched, npred, ngold)


def ner_prf(gold, pred) -> PrfReport:
    matched = npred = ngold = 0
    for g, p in _aligned(gold, pred):
        matched += len(g.entities & p.entities)
        npred += len(p.entities)
        ngold += len(g.entities)
    return PrfReport.from_counts(matched, npred, ngold)


@dataclass(frozen=True)
class ActionStats:
    rows: list[tuple[int, int]]  # (sentence length, action count) per sentence

    @property
    def total_tokens(self) -> int:
        return sum(n for n, _ in self.rows)

    @property
    def total_actions(self) -> int:
        return sum(c for _, c in self.rows)

    @property
    def actions_per_token(self) -> float:
        return self.total_actions / self.total_tokens if self.rows else 0.0

    def by_length(self) -> list[tuple[int, int, float, int, int]]:
        """(length, sentences, mean actions, min, max) for each length."""
        groups: dict[int, list[int]] = {}
        for n, c in self.rows:
            groups.setdefault(n, []).append(c)
        return [(n, len(cs), sum(cs) / len(cs), min(cs), max(cs)) for n, cs in sorted(groups.items())]


def action_stats(corpus) -> ActionStats:
    rows = []
    for i, item in enumerate(corpus):
        try:
            tree = ner_to_tree(item) if isinstance(item, NerRecord) else preprocess(item)
            count = len(extract_oracle(tree))
        except (TreeError, ValueError) as exc:
            raise TreeError(f"sentence {i}: {exc}") from None
        n = len(item.tokens)
        assert 1 <= count <= 2 * n - 1, f"sentence {i}: {count} actions for n={n}"
        rows.append((n, count))
    return ActionStats(rows)
