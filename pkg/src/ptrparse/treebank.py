"""Trees, spans and entity records, plus the preprocessing transforms.

Raw trees are read from parenthesized notation.  A node's ``children`` hold
only its constituent children; tokens not covered by a child sit directly
under the node.  Preprocessing collapses unary chains into joined labels and
fills uncovered token runs with EMPTY nodes so every internal node is tiled
by its children.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple

EMPTY = "<empty>"
SENTENCE = "<sent>"
SEP = "+"


class TreeError(ValueError):
    """Malformed input or a tree violating a structural invariant."""


class LabeledSpan(NamedTuple):
    left: int
    right: int
    label: str


@dataclass(frozen=True)
class Node:
    label: str
    left: int
    right: int
    children: tuple[Node, ...] = ()

    @property
    def span(self) -> tuple[int, int]:
        return self.left, self.right

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def labeled_span(self) -> LabeledSpan:
        return LabeledSpan(self.left, self.right, self.label)

    def postorder(self) -> Iterator[Node]:
        for child in self.children:
            yield from child.postorder()
        yield self

    def preorder(self) -> Iterator[Node]:
        yield self
        for child in self.children:
            yield from child.preorder()


@dataclass(frozen=True)
class ParseTree:
    tokens: tuple[str, ...]
    root: Node

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))

    @property
    def n(self) -> int:
        return len(self.tokens)

    def nodes(self) -> Iterator[Node]:
        return self.root.postorder()

    def __str__(self) -> str:
        return emit_brackets(self)


@dataclass(frozen=True)
class NerRecord:
    tokens: tuple[str, ...]
    entities: frozenset[LabeledSpan] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(
            self, "entities", frozenset(LabeledSpan(*e) for e in self.entities)
        )

    @property
    def n(self) -> int:
        return len(self.tokens)

    def sorted_entities(self) -> list[LabeledSpan]:
        return sorted(self.entities, key=lambda e: (e.left, -e.right, e.label))


# ---------------------------------------------------------------------------
# labels


def escape_label(label: str) -> str:
    return label.replace("\\", "\\\\").replace(SEP, "\\" + SEP)


def join_labels(labels: Iterable[str]) -> str:
    """Join raw labels top-down into one collapsed label."""
    return SEP.join(escape_label(lab) for lab in labels)


def split_label(label: str) -> list[str]:
    """Inverse of :func:`join_labels`."""
    parts = []
    buf = []
    i = 0
    while i < len(label):
        ch = label[i]
        if ch == "\\" and i + 1 < len(label):
            buf.append(label[i + 1])
            i += 2
            continue
        if ch == SEP:
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    parts.append("".join(buf))
    if any(not p for p in parts):
        raise TreeError(f"label {label!r} has an empty chain member")
    return parts


# ---------------------------------------------------------------------------
# bracketed notation

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


def _lex(text: str) -> list[tuple[str, int]]:
    return [(m.group(), m.start()) for m in _TOKEN_RE.finditer(text)]


def _check_balance(text: str) -> None:
    stack = []
    for i, ch in enumerate(text):
        if ch == "(":
            stack.append(i)
        elif ch == ")":
            if not stack:
                raise TreeError(f"unbalanced ')' at offset {i}")
            stack.pop()
    if stack:
        raise TreeError(f"unbalanced '(' at offset {stack[0]}")


def parse_brackets(text: str, drop_preterminals: bool = False) -> ParseTree:
    """Read one tree such as ``(S (NP a b) (VP c))``.

    With ``drop_preterminals`` every non-root group holding exactly one word
    and nothing else is treated as a part-of-speech layer and removed.
    """
    _check_balance(text)
    lexemes = _lex(text)
    if not lexemes:
        raise TreeError("empty input at offset 0")
    if lexemes[0][0] != "(":
        raise TreeError(f"expected '(' at offset {lexemes[0][1]}")
    tokens: list[str] = []
    pos = 0

    def group(depth: int) -> Node | None:
        nonlocal pos
        _, start = lexemes[pos]
        pos += 1
        lab, lab_off = lexemes[pos]
        if lab in "()":
            raise TreeError(f"empty label at offset {start}")
        pos += 1
        first = len(tokens)
        children = []
        n_words = 0
        while lexemes[pos][0] != ")":
            if lexemes[pos][0] == "(":
                child = group(depth + 1)
                if child is not None:
                    children.append(child)
            else:
                tokens.append(lexemes[pos][0])
                n_words += 1
                pos += 1
        pos += 1
        if len(tokens) == first:
            raise TreeError(f"zero tokens in group at offset {start}")
        if drop_preterminals and depth > 0 and n_words == 1 and len(tokens) == first + 1:
            return None
        return Node(lab, first, len(tokens), tuple(children))

    root = group(0)
    if pos != len(lexemes):
        raise TreeError(f"trailing text at offset {lexemes[pos][1]}")
    return ParseTree(tuple(tokens), root)


def emit_brackets(tree: ParseTree) -> str:
    tokens = tree.tokens

    def render(node: Node) -> str:
        out = ["(" + node.label]
        i = node.left
        for child in node.children:
            out.extend(tokens[i:child.left])
            out.append(render(child))
            i = child.right
        out.extend(tokens[i:node.right])
        return " ".join(out) + ")"

    return render(tree.root)


def read_trees(lines: Iterable[str], drop_preterminals: bool = False) -> list[ParseTree]:
    trees = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            trees.append(parse_brackets(line, drop_preterminals))
        except TreeError as exc:
            raise TreeError(f"line {lineno}: {exc}") from None
    return trees


# ---------------------------------------------------------------------------
# validation


def validate_tree(tree: ParseTree, canonical: bool = False, tiled: bool = False) -> None:
    """Raise :class:`TreeError` unless ``tree`` is well formed.

    ``canonical`` additionally forbids unary chains; ``tiled`` requires every
    internal node to be exactly covered by its children.
    """
    n = tree.n
    if n < 1:
        raise TreeError("tree has no tokens")
    if tree.root.span != (0, n):
        raise TreeError(f"root span {tree.root.span} != (0, {n})")
    for tok in tree.tokens:
        if not tok or any(ch.isspace() for ch in tok):
            raise TreeError(f"bad token {tok!r}")
    for node in tree.nodes():
        if not 0 <= node.left < node.right <= n:
            raise TreeError(f"bad span {node.span}")
        if not node.label:
            raise TreeError(f"empty label at {node.span}")
        prev = node.left
        for child in node.children:
            if child.left < prev or child.right > node.right:
                raise TreeError(f"child {child.span} misplaced under {node.span}")
            if tiled and child.left != prev:
                raise TreeError(f"gap before {child.span} under {node.span}")
            prev = child.right
        if tiled and node.children and prev != node.right:
            raise TreeError(f"gap at end of {node.span}")
        if canonical and len(node.children) == 1 and node.children[0].span == node.span:
            raise TreeError(f"unary chain at {node.span}")


# ---------------------------------------------------------------------------
# unary chains


def collapse_unary(tree: ParseTree) -> ParseTree:
    def collapse(node: Node) -> Node:
        labels = [node.label]
        while len(node.children) == 1 and node.children[0].span == node.span:
            node = node.children[0]
            labels.append(node.label)
        kids = tuple(collapse(c) for c in node.children)
        return Node(join_labels(labels), node.left, node.right, kids)

    return ParseTree(tree.tokens, collapse(tree.root))


def expand_unary(tree: ParseTree) -> ParseTree:
    def expand(node: Node) -> Node:
        if node.label == SEP:
            raise TreeError(f"bare separator label at {node.span}")
        kids = tuple(expand(c) for c in node.children)
        labels = split_label(node.label)
        for lab in reversed(labels):
            kids = (Node(lab, node.left, node.right, kids),)
        return kids[0]

    return ParseTree(tree.tokens, expand(tree.root))


# ---------------------------------------------------------------------------
# EMPTY spans


def insert_empty_spans(tree: ParseTree) -> ParseTree:
    def fill(node: Node) -> Node:
        if not node.children:
            return node
        kids = []
        i = node.left
        for child in node.children:
            if child.left > i:
                kids.append(Node(EMPTY, i, child.left))
            kids.append(fill(child))
            i = child.right
        if i < node.right:
            kids.append(Node(EMPTY, i, node.right))
        return Node(node.label, node.left, node.right, tuple(kids))

    return ParseTree(tree.tokens, fill(tree.root))


def strip_empty_spans(tree: ParseTree) -> ParseTree:
    if tree.root.label == EMPTY:
        raise TreeError("EMPTY label at the root")

    def strip(node: Node) -> tuple[Node, ...]:
        kids = []
        for child in node.children:
            kids.extend(strip(child))
        if node.label == EMPTY:
            return tuple(kids)
        return (Node(node.label, node.left, node.right, tuple(kids)),)

    return ParseTree(tree.tokens, strip(tree.root)[0])


def preprocess(tree: ParseTree) -> ParseTree:
    """Raw tree -> collapsed, EMPTY-filled tree ready for the oracle."""
    return insert_empty_spans(collapse_unary(tree))


def postprocess(tree: ParseTree) -> ParseTree:
    return expand_unary(strip_empty_spans(tree))


def tree_to_spans(tree: ParseTree) -> list[LabeledSpan]:
    return [node.labeled_span() for node in tree.nodes()]


def spans_to_tree(tokens: tuple[str, ...], spans: Iterable[LabeledSpan]) -> ParseTree:
    """Assemble nested spans into a tree; children are ordered left to right.

    Spans are processed outermost-first so any order is accepted.  Duplicate
    or crossing spans raise :class:`TreeError`.
    """
    ordered = sorted(spans, key=lambda s: (s.left, -s.right))
    if not ordered:
        raise TreeError("no spans")
    stack: list[tuple[LabeledSpan, list]] = []
    top = None

    def close():
        nonlocal top
        span, kids = stack.pop()
        node = Node(span.label, span.left, span.right, tuple(kids))
        if stack:
            stack[-1][1].append(node)
        else:
            if top is not None:
                raise TreeError("spans do not share a single root")
            top = node

    for span in ordered:
        while stack and stack[-1][0].right <= span.left:
            close()
        if stack:
            outer = stack[-1][0]
            if span.right > outer.right:
                raise TreeError(f"span {tuple(span[:2])} crosses {tuple(outer[:2])}")
            if (span.left, span.right) == (outer.left, outer.right):
                raise TreeError(f"duplicate span {tuple(span[:2])}")
        stack.append((span, []))
    while stack:
        close()
    return ParseTree(tokens, top)


# ---------------------------------------------------------------------------
# nested NER


def _crossing(a: LabeledSpan, b: LabeledSpan) -> bool:
    return a.left < b.left < a.right < b.right or b.left < a.left < b.right < a.right


def ner_to_tree(record: NerRecord) -> ParseTree:
    ents = record.sorted_entities()
    for i, a in enumerate(ents):
        for b in ents[i + 1:]:
            if _crossing(a, b):
                raise TreeError(f"crossing entities {tuple(a)} and {tuple(b)}")
    n = record.n
    by_span: dict[tuple[int, int], list[str]] = {}
    for e in ents:
        if e.label in (EMPTY, SENTENCE):
            raise TreeError(f"reserved entity label {e.label!r}")
        by_span.setdefault((e.left, e.right), []).append(e.label)
    whole = by_span.pop((0, n), [])
    spans = [LabeledSpan(0, n, join_labels([SENTENCE] + sorted(whole)))]
    spans += [LabeledSpan(l, r, join_labels(sorted(labs))) for (l, r), labs in by_span.items()]
    return insert_empty_spans(spans_to_tree(record.tokens, spans))


def tree_to_entities(tree: ParseTree) -> NerRecord:
    """Read entities off a collapsed tree, dropping EMPTY and SENTENCE parts."""
    ents = set()
    for node in tree.nodes():
        for lab in split_label(node.label):
            if lab not in (EMPTY, SENTENCE):
                ents.add(LabeledSpan(node.left, node.right, lab))
    return NerRecord(tree.tokens, frozenset(ents))


def record_to_json(record: NerRecord) -> str:
    return json.dumps({
        "tokens": list(record.tokens),
        "entities": [{"start": e.left, "end": e.right, "label": e.label}
                     for e in record.sorted_entities()],
    }, ensure_ascii=False)


def record_from_json(line: str) -> NerRecord:
    obj = json.loads(line)
    tokens = obj["tokens"]
    if not tokens:
        raise TreeError("record has no tokens")
    ents = []
    for e in obj.get("entities", []):
        start, end, label = int(e["start"]), int(e["end"]), str(e["label"])
        if not 0 <= start < end <= len(tokens):
            raise TreeError(f"entity span ({start}, {end}) out of range")
        ents.append(LabeledSpan(start, end, label))
    return NerRecord(tuple(tokens), frozenset(ents))


def read_records(lines: Iterable[str]) -> list[NerRecord]:
    out = []
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            out.append(record_from_json(line))
        except (TreeError, ValueError, KeyError, TypeError) as exc:
            raise TreeError(f"line {lineno}: {exc}") from None
    return out
