"""Random and synthetic trees for property tests and the bundled toy corpora."""

from __future__ import annotations

import numpy as np

from .treebank import EMPTY, LabeledSpan, NerRecord, Node, ParseTree

LABELS = tuple("ABCDEFGHIJ")


def _arity(rng: np.random.Generator, length: int) -> int:
    # 2 + geometric with mean 0.5 -> mean arity 2.5
    return min(length, 2 + int(rng.geometric(2 / 3)) - 1)


def random_preprocessed_tree(
    rng: np.random.Generator,
    n: int,
    labels=LABELS,
    leaf_prob: float = 0.25,
    empty_prob: float = 0.3,
) -> ParseTree:
    """A random collapsed, EMPTY-filled tree over ``n`` tokens.

    Spans are segmented recursively; segments become EMPTY with
    ``empty_prob`` unless that would put two EMPTY siblings side by side.
    """

    def build(left: int, right: int, label: str) -> Node:
        length = right - left
        if length == 1 or rng.random() < leaf_prob:
            return Node(label, left, right)
        k = _arity(rng, length)
        cuts = sorted(rng.choice(np.arange(left + 1, right), size=k - 1, replace=False))
        bounds = [left] + [int(c) for c in cuts] + [right]
        kids = []
        prev_empty = False
        for i, (l, r) in enumerate(zip(bounds, bounds[1:])):
            # keep at least one constituent child
            last_chance = i == k - 1 and all(c.label == EMPTY for c in kids)
            if not prev_empty and not last_chance and rng.random() < empty_prob:
                kids.append(Node(EMPTY, l, r))
                prev_empty = True
            else:
                kids.append(build(l, r, str(rng.choice(labels))))
                prev_empty = False
        return Node(label, left, right, tuple(kids))

    tokens = tuple(f"t{int(i)}" for i in rng.integers(0, 50, size=n))
    return ParseTree(tokens, build(0, n, str(rng.choice(labels))))


def random_raw_tree(rng: np.random.Generator, n: int, labels=LABELS, chain_prob=0.2) -> ParseTree:
    """A random raw tree possibly containing unary chains."""
    from .treebank import strip_empty_spans

    base = strip_empty_spans(random_preprocessed_tree(rng, n, labels))

    def inject(node: Node) -> Node:
        kids = tuple(inject(c) for c in node.children)
        node = Node(node.label, node.left, node.right, kids)
        while rng.random() < chain_prob:
            node = Node(str(rng.choice(labels)), node.left, node.right, (node,))
        return node

    return ParseTree(base.tokens, inject(base.root))


def full_binary_tree(n: int, label: str = "X") -> ParseTree:
    def build(left, right):
        if right - left == 1:
            return Node(label, left, right)
        mid = (left + right) // 2
        return Node(label, left, right, (build(left, mid), build(mid, right)))

    return ParseTree(tuple(f"w{i}" for i in range(n)), build(0, n))


def random_entities(rng: np.random.Generator, n: int, labels=("PER", "ORG", "LOC"), k=None):
    """A random non-crossing entity set (same-span label stacks allowed)."""
    if k is None:
        k = int(rng.integers(0, n + 2))
    chosen: list[LabeledSpan] = []
    for _ in range(k * 3):
        if len(chosen) >= k:
            break
        l = int(rng.integers(0, n))
        r = int(rng.integers(l + 1, n + 1))
        if any(c.left < l < c.right < r or l < c.left < r < c.right for c in chosen):
            continue
        chosen.append(LabeledSpan(l, r, str(rng.choice(labels))))
    return frozenset(chosen)


# ---------------------------------------------------------------------------
# toy corpora generated from a tiny grammar

_LEX = {
    "DET": ["the", "a", "every", "some", "this"],
    "N": ["dog", "cat", "park", "man", "telescope", "bird", "tree", "house", "river", "child"],
    "V": ["saw", "chased", "found", "liked", "watched", "heard"],
    "VI": ["slept", "ran", "laughed", "waited"],
    "ADJ": ["big", "old", "red", "small", "happy"],
    "P": ["in", "with", "near", "under", "behind"],
    "ADV": ["quickly", "often", "today", "quietly"],
    "CONJ": ["and", "but"],
}


class _Grammar:
    def __init__(self, rng):
        self.rng = rng

    def word(self, cat):
        return str(self.rng.choice(_LEX[cat]))

    # each method returns (label, children) where children are tokens or subtrees
    def np(self, depth):
        r = self.rng.random()
        parts = [self.word("DET")]
        if r < 0.35:
            parts.append(self.word("ADJ"))
        parts.append(self.word("N"))
        node = ("NP", parts)
        if depth < 2 and self.rng.random() < 0.3:
            node = ("NP", [node, self.pp(depth + 1)])
        return node

    def pp(self, depth):
        return ("PP", [self.word("P"), self.np(depth)])

    def vp(self, depth):
        r = self.rng.random()
        if r < 0.3:
            parts = [self.word("VI")]
            if self.rng.random() < 0.5:
                parts.append(("ADVP", [self.word("ADV")]))
            return ("VP", parts)
        parts = [self.word("V"), self.np(depth)]
        if depth < 2 and self.rng.random() < 0.3:
            parts.append(self.pp(depth + 1))
        return ("VP", parts)

    def s(self, depth=0):
        if depth == 0 and self.rng.random() < 0.15:
            return ("S", [self.s(1), self.word("CONJ"), self.s(1)])
        if self.rng.random() < 0.15:
            # sentence reduced to a bare verb phrase: unary chain S -> VP
            return ("S", [self.vp(depth)])
        return ("S", [self.np(depth), self.vp(depth)])


def _realize(item, tokens) -> Node | None:
    if isinstance(item, str):
        tokens.append(item)
        return None
    label, parts = item
    left = len(tokens)
    kids = [k for k in (_realize(p, tokens) for p in parts) if k is not None]
    return Node(label, left, len(tokens), tuple(kids))


def toy_treebank(size: int = 200, seed: int = 0) -> list[ParseTree]:
    rng = np.random.default_rng(seed)
    g = _Grammar(rng)
    trees = []
    while len(trees) < size:
        tokens: list[str] = []
        root = _realize(g.s(), tokens)
        if len(tokens) <= 25:
            trees.append(ParseTree(tuple(tokens), root))
    return trees


def toy_ner_corpus(size: int = 200, seed: int = 1) -> list[NerRecord]:
    """Nested entities: a person or organisation name may contain a location,
    and titles stack with persons over identical spans."""
    rng = np.random.default_rng(seed)
    first = ["John", "Mary", "Ahmed", "Li", "Olga", "Pedro"]
    last = ["Smith", "Chen", "Garcia", "Novak", "Okafor"]
    city = ["Paris", "Lagos", "Lima", "Oslo", "Hanoi"]
    org_head = ["University", "Bank", "Museum", "Council"]
    verbs = ["visited", "joined", "left", "praised", "met"]
    filler = ["yesterday", "again", "briefly", "there"]
    records = []
    for _ in range(size):
        tokens: list[str] = []
        ents: list[LabeledSpan] = []

        def mention():
            start = len(tokens)
            r = rng.random()
            if r < 0.4:
                tokens.extend([str(rng.choice(first)), str(rng.choice(last))])
                ents.append(LabeledSpan(start, len(tokens), "PER"))
                if rng.random() < 0.3:
                    ents.append(LabeledSpan(start, len(tokens), "TITLE"))
            elif r < 0.75:
                tokens.extend(["the", str(rng.choice(org_head)), "of"])
                loc = len(tokens)
                tokens.append(str(rng.choice(city)))
                ents.append(LabeledSpan(loc, loc + 1, "LOC"))
                ents.append(LabeledSpan(start, len(tokens), "ORG"))
            elif r < 0.9:
                tokens.append(str(rng.choice(city)))
                ents.append(LabeledSpan(start, start + 1, "LOC"))
            else:
                tokens.extend(["the", "man"])

        mention()
        tokens.append(str(rng.choice(verbs)))
        mention()
        if rng.random() < 0.4:
            tokens.append(str(rng.choice(filler)))
        records.append(NerRecord(tuple(tokens), frozenset(ents)))
    return records
