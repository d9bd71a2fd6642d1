"""Gold action sequences: extraction, replay and exhaustive enumeration."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .pointing import (
    Configuration,
    IllegalAction,
    PointAction,
    apply_action,
    initial_config,
    is_goal,
    legal_targets,
)
from .treebank import ParseTree, TreeError, spans_to_tree, tree_to_spans, validate_tree

MAX_ENUM_N = 6


class IncompleteSequence(ValueError):
    pass


@dataclass(frozen=True)
class OracleSequence:
    n: int
    actions: tuple[PointAction, ...]

    def __len__(self):
        return len(self.actions)

    def to_line(self) -> str:
        return f"{self.n}\t" + " ".join(f"{a.target}:{a.label}" for a in self.actions)

    @classmethod
    def from_line(cls, line: str) -> OracleSequence:
        head, _, body = line.rstrip("\n").partition("\t")
        actions = []
        for item in body.split():
            target, _, label = item.partition(":")
            if not label:
                raise ValueError(f"malformed action {item!r}")
            actions.append(PointAction(int(target), label))
        return cls(int(head), tuple(actions))


def extract_oracle(tree: ParseTree) -> OracleSequence:
    """Post-order traversal; each span is reached from the boundary it shares
    with the previous span."""
    validate_tree(tree, canonical=True, tiled=True)
    config = initial_config(tree.n)
    actions = []
    for span in tree_to_spans(tree):
        if span.left == config.cursor:
            action = PointAction(span.right, span.label)
        elif span.right == config.cursor:
            action = PointAction(span.left, span.label)
        else:
            raise TreeError(f"span {span[:2]} does not touch cursor {config.cursor}")
        try:
            config = apply_action(config, action)
        except IllegalAction as exc:
            raise TreeError(f"tree is not reachable: {exc}") from None
        actions.append(action)
    return OracleSequence(tree.n, tuple(actions))


def run_actions(n: int, actions) -> Configuration:
    config = initial_config(n)
    for t, action in enumerate(actions, 1):
        if t > 1 and is_goal(config):
            raise IllegalAction(f"step {t}: goal already reached")
        try:
            config = apply_action(config, action)
        except IllegalAction:
            raise IllegalAction(f"step {t}: illegal target {action.target}") from None
    return config


def replay(seq: OracleSequence, tokens=None) -> ParseTree:
    config = run_actions(seq.n, seq.actions)
    if not is_goal(config):
        raise IncompleteSequence(f"incomplete: {len(seq.actions)} actions end before goal")
    if tokens is None:
        tokens = tuple(f"w{i}" for i in range(seq.n))
    return spans_to_tree(tuple(tokens), config.spans)


def enumerate_goal_sequences(n: int, bound: int = MAX_ENUM_N) -> set[OracleSequence]:
    """Every legal unlabeled action sequence from the initial configuration
    to goal (labels are all ``"X"``)."""
    if n > bound:
        raise ValueError(f"n={n} exceeds enumeration bound {bound}")
    out = set()

    def walk(config, actions):
        if is_goal(config):
            out.add(OracleSequence(n, tuple(actions)))
            return
        for a in legal_targets(config):
            act = PointAction(a, "X")
            actions.append(act)
            walk(apply_action(config, act), actions)
            actions.pop()

    walk(initial_config(n), [])
    return out


def span_set(seq: OracleSequence) -> frozenset[tuple[int, int]]:
    return frozenset(s[:2] for s in run_actions(seq.n, seq.actions).spans)


@lru_cache(maxsize=None)
def segmentation_span_sets(left: int, right: int) -> frozenset[frozenset[tuple[int, int]]]:
    """All unlabeled trees over (left, right): the span is a leaf, or it is cut
    into >= 2 contiguous pieces each of which is again such a tree."""
    results = {frozenset([(left, right)])}
    inner = range(left + 1, right)
    for k in range(1, right - left):
        for cuts in combinations(inner, k):
            bounds = (left,) + cuts + (right,)
            partial = [frozenset([(left, right)])]
            for l, r in zip(bounds, bounds[1:]):
                partial = [p | sub for p in partial for sub in segmentation_span_sets(l, r)]
            results.update(partial)
    return frozenset(results)
