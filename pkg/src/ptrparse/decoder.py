"""Greedy and beam decoding over the pointing system."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .pointing import Configuration, PointAction, apply_action, initial_config, is_goal, legal_targets
from .scorer import START, DecoderState, PointerScorer, log_softmax
from .treebank import NerRecord, ParseTree, postprocess, spans_to_tree, tree_to_entities


@dataclass
class BeamItem:
    config: Configuration
    decoder_state: DecoderState
    score: float
    history: list[PointAction] = field(default_factory=list)


@dataclass
class DecodeResult:
    actions: list[PointAction]
    score: float
    tree: ParseTree            # collapsed, EMPTY spans kept
    trace: list[tuple] = field(default_factory=list)
    finished_scores: list[float] = field(default_factory=list)

    def output_tree(self) -> ParseTree:
        return postprocess(self.tree)


def _completes(config: Configuration, target: int) -> bool:
    return {config.cursor, target} == {0, config.n}


def _label_logprobs(model, state, enc, span, goal):
    lq = log_softmax(model.label_scores(state, enc, span))
    if goal:
        # the root must keep a real label once EMPTY spans are stripped
        lq = lq.copy()
        lq[0] = -np.inf
    return lq


def greedy_decode(model: PointerScorer, tokens, trace: bool = False) -> DecodeResult:
    tokens = tuple(tokens)
    enc = model.encode(tokens)
    config = initial_config(len(tokens))
    state = model.decoder_step(START, START, None, enc)
    actions, steps = [], []
    score = 0.0
    while not is_goal(config):
        legal = legal_targets(config)
        lp = log_softmax(model.pointing_scores(state, enc))
        a = legal[int(np.argmax(lp[legal]))]
        span = (min(config.cursor, a), max(config.cursor, a))
        lq = _label_logprobs(model, state, enc, span, _completes(config, a))
        y = int(np.argmax(lq))
        action = PointAction(a, model.labels[y])
        score += lp[a] + lq[y]
        if trace:
            steps.append((len(actions) + 1, config.cursor, a, action.label, float(lp[a] + lq[y])))
        config = apply_action(config, action)
        actions.append(action)
        if not is_goal(config):
            state = model.decoder_step(state, span, y, enc)
    tree = spans_to_tree(tokens, config.spans)
    return DecodeResult(actions, float(score), tree, steps, [float(score)])


def beam_decode(model: PointerScorer, tokens, beam_size: int) -> DecodeResult:
    """Beam search with summed log-probabilities.

    Each step prunes twice: first over (item, boundary) by pointing score,
    then over (item, boundary, label).  With ``beam_size == 1`` this makes
    exactly the greedy choices.  Completed hypotheses leave the beam; search
    stops once no live hypothesis can beat the best completed one.
    """
    if beam_size < 1:
        raise ValueError("beam_size must be >= 1")
    tokens = tuple(tokens)
    enc = model.encode(tokens)
    beam = [BeamItem(initial_config(len(tokens)), model.decoder_step(START, START, None, enc), 0.0)]
    finished: list[BeamItem] = []
    while beam:
        stage1 = []
        for i, item in enumerate(beam):
            lp = log_softmax(model.pointing_scores(item.decoder_state, enc))
            for a in legal_targets(item.config):
                stage1.append((item.score + lp[a], i, a))
        stage1.sort(key=lambda c: (-c[0], c[1], c[2]))
        stage2 = []
        for score, i, a in stage1[:beam_size]:
            item = beam[i]
            c = item.config.cursor
            span = (min(c, a), max(c, a))
            lq = _label_logprobs(model, item.decoder_state, enc, span, _completes(item.config, a))
            for y in range(len(model.labels)):
                if np.isfinite(lq[y]):
                    stage2.append((score + lq[y], i, a, y))
        stage2.sort(key=lambda c: (-c[0], c[1], c[2], c[3]))
        new_beam = []
        for score, i, a, y in stage2:
            item = beam[i]
            action = PointAction(a, model.labels[y])
            config = apply_action(item.config, action)
            if is_goal(config):
                finished.append(BeamItem(config, item.decoder_state, float(score), item.history + [action]))
                continue
            if len(new_beam) < beam_size:
                c = item.config.cursor
                state = model.decoder_step(item.decoder_state, (min(c, a), max(c, a)), y, enc)
                new_beam.append(BeamItem(config, state, float(score), item.history + [action]))
        beam = new_beam
        if finished and beam:
            best = max(f.score for f in finished)
            if best >= max(b.score for b in beam):
                break
    best = max(finished, key=lambda f: f.score)  # first maximum wins ties
    tree = spans_to_tree(tokens, best.config.spans)
    return DecodeResult(best.history, best.score, tree, [], [f.score for f in finished])


def greedy_parse(model: PointerScorer, tokens) -> ParseTree:
    return greedy_decode(model, tokens).output_tree()


def beam_parse(model: PointerScorer, tokens, beam_size: int) -> ParseTree:
    return beam_decode(model, tokens, beam_size).output_tree()


def parse_ner(model: PointerScorer, tokens, beam_size: int = 1) -> NerRecord:
    if beam_size == 1:
        res = greedy_decode(model, tokens)
    else:
        res = beam_decode(model, tokens, beam_size)
    return tree_to_entities(res.tree)
