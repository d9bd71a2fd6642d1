"""Parsing configuration and the two pointing actions.

A configuration is the quadruple (cursor, candidates, prev_left, spans).  From
cursor ``c`` the parser points to a candidate boundary ``a``: pointing right
(``a > c``) creates a new bottom-most span ``(c, a)``; pointing left merges
the spans generated since ``a`` into ``(a, c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .treebank import LabeledSpan


class IllegalAction(ValueError):
    pass


class PointAction(NamedTuple):
    target: int
    label: str


@dataclass(frozen=True)
class Configuration:
    n: int
    cursor: int
    candidates: frozenset[int]
    prev_left: int | None
    spans: tuple[LabeledSpan, ...]

    def dump(self) -> str:
        cands = ",".join(str(a) for a in sorted(self.candidates))
        prev = "null" if self.prev_left is None else self.prev_left
        spans = " ".join(f"{s.label}({s.left},{s.right})" for s in self.spans)
        return f"c={self.cursor} A={{{cands}}} p={prev} S=[{spans}]"


def initial_config(n: int) -> Configuration:
    if n < 1:
        raise ValueError(f"sentence length must be >= 1, got {n}")
    return Configuration(n, 0, frozenset(range(1, n + 1)), None, ())


def legal_targets(config: Configuration) -> list[int]:
    """Legal pointing targets in increasing order (empty once at goal)."""
    if is_goal(config):
        return []
    return sorted(a for a in config.candidates if a != config.cursor)


def apply_action(config: Configuration, action: PointAction) -> Configuration:
    c, a = config.cursor, action.target
    if a == c or a not in config.candidates or is_goal(config):
        raise IllegalAction(f"target {a} is not legal in {config.dump()}")
    if a < c:
        cands = config.candidates - set(range(a, c))
        span = LabeledSpan(a, c, action.label)
        return Configuration(config.n, c, cands, a, config.spans + (span,))
    cands = set(config.candidates)
    if config.prev_left is not None:
        cands.add(config.prev_left)
    cands.difference_update(range(c, a))
    span = LabeledSpan(c, a, action.label)
    return Configuration(config.n, a, frozenset(cands), c, config.spans + (span,))


def is_goal(config: Configuration) -> bool:
    # the whole-sentence span can only ever be the last one generated
    return bool(config.spans) and config.spans[-1][:2] == (0, config.n)
