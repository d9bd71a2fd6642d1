"""Acceptance criteria, one test each.  A PASS/FAIL line per criterion is
printed in the terminal summary."""

import time
from fractions import Fraction

import numpy as np
import pytest

from gradcheck import numeric_gradients, relative_errors
from ptrparse.decoder import beam_decode, beam_parse, greedy_decode, greedy_parse, parse_ner
from ptrparse.evaluation import action_stats, ner_prf, parseval
from ptrparse.oracle import (
    enumerate_goal_sequences,
    extract_oracle,
    replay,
    run_actions,
    segmentation_span_sets,
    span_set,
)
from ptrparse.pipeline import build_model, to_training_pairs
from ptrparse.pointing import initial_config, apply_action, is_goal, legal_targets
from ptrparse.scorer import LabelSet, PointerScorer, ScorerConfig, Vocabulary
from ptrparse.synth import LABELS, full_binary_tree, random_entities, random_preprocessed_tree
from ptrparse.treebank import EMPTY, NerRecord, parse_brackets, validate_tree


def test_1_oracle_round_trip(record_property):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    exact = 0
    for _ in range(10_000):
        tree = random_preprocessed_tree(rng, int(rng.integers(1, 41)))
        exact += replay(extract_oracle(tree), tree.tokens) == tree
    elapsed = time.perf_counter() - start
    record_property("detail", f"exact={exact}/10000 time={elapsed:.1f}s")
    assert exact == 10_000 and elapsed < 60


def test_2_uniqueness(record_property):
    start = time.perf_counter()
    counts = []
    for n in range(1, 6):
        seqs = enumerate_goal_sequences(n)
        sets = {span_set(s) for s in seqs}
        direct = segmentation_span_sets(0, n)
        assert len(sets) == len(seqs), f"n={n}: two sequences share a span set"
        assert sets == set(direct), f"n={n}"
        counts.append(len(seqs))
    elapsed = time.perf_counter() - start
    record_property("detail", f"counts n=1..5 {counts} time={elapsed:.1f}s")
    assert elapsed < 120


@pytest.fixture(scope="module")
def random_model(toy_trees):
    pairs = to_training_pairs(toy_trees)
    return build_model(pairs, ScorerConfig(embed_dim=16, encoder_hidden=16, decoder_hidden=32,
                                           mlp_hidden=16, label_embed_dim=8, seed=17))


@pytest.fixture(scope="module")
def fuzz_sentences(random_model):
    rng = np.random.default_rng(99)
    words = random_model.vocab.itos[3:] + ["oov-word"]
    return [tuple(str(w) for w in rng.choice(words, size=int(rng.integers(1, 41)))) for _ in range(500)]


def _violation(tokens, res):
    n = len(tokens)
    if not 1 <= len(res.actions) <= 2 * n - 1:
        return f"{len(res.actions)} actions for n={n}"
    if not is_goal(run_actions(n, res.actions)):
        return "goal not reached"
    try:
        validate_tree(res.tree, tiled=True)
        out = res.output_tree()
        validate_tree(out)
    except ValueError as exc:
        return str(exc)
    if out.tokens != tokens or res.tree.root.label == EMPTY:
        return "bad root or tokens"
    return None


def test_3_structural_consistency(random_model, fuzz_sentences, record_property):
    violations = []
    for tokens in fuzz_sentences:
        for res in (greedy_decode(random_model, tokens), beam_decode(random_model, tokens, 4)):
            v = _violation(tokens, res)
            if v:
                violations.append(v)
    record_property("detail", f"violations={len(violations)} over 500 sentences x (greedy, beam=4)")
    assert not violations, violations[:5]


def test_4_gradients(record_property):
    rng = np.random.default_rng(4)
    start = time.perf_counter()
    worst = 0.0
    for k in range(20):
        cfg = ScorerConfig(embed_dim=int(rng.integers(2, 5)), encoder_hidden=int(rng.integers(2, 4)),
                           decoder_hidden=int(rng.integers(2, 5)), mlp_hidden=int(rng.integers(2, 5)),
                           label_embed_dim=int(rng.integers(2, 4)), encoder_layers=int(rng.integers(1, 3)),
                           use_prev_label=bool(rng.integers(2)), legal_normalization=bool(rng.integers(2)),
                           dropout_rate=float(rng.choice([0.0, 0.25])), seed=k)
        tree = random_preprocessed_tree(rng, int(rng.integers(1, 6)))
        orc = extract_oracle(tree)
        m = PointerScorer(cfg, Vocabulary(sorted(set(tree.tokens))), LabelSet(LABELS))

        def loss():
            return m.forward(tree.tokens, orc, rng=np.random.default_rng(k), backward=False)["loss"]

        analytic = m.forward(tree.tokens, orc, rng=np.random.default_rng(k))["grads"]
        errs = relative_errors(analytic, numeric_gradients(m, loss, eps=3e-3, points=5))
        worst = max(worst, max(errs.values()))
    elapsed = time.perf_counter() - start
    record_property("detail", f"worst relative error={worst:.2e} time={elapsed:.1f}s")
    assert worst < 1e-4 and elapsed < 120


def test_5_memorization(memorized_parser, memorized_ner, toy_trees, toy_ner, record_property):
    parser, res_p = memorized_parser
    tagger, res_n = memorized_ner
    f1_parse = parseval(toy_trees, [greedy_parse(parser, t.tokens) for t in toy_trees]).f1
    f1_ner = ner_prf(toy_ner, [parse_ner(tagger, r.tokens) for r in toy_ner]).f1
    record_property("detail", f"parse F1={f1_parse:.4f} ({len(res_p.history)} epochs) "
                              f"NER F1={f1_ner:.4f} ({len(res_n.history)} epochs)")
    assert f1_parse >= 0.99 and f1_ner >= 0.99


def test_6_beam_neutrality(memorized_parser, toy_trees, random_model, fuzz_sentences, record_property):
    model, _ = memorized_parser
    greedy = parseval(toy_trees, [greedy_parse(model, t.tokens) for t in toy_trees]).f1
    beam = parseval(toy_trees, [beam_parse(model, t.tokens, 20) for t in toy_trees]).f1
    gap = abs(beam - greedy) * 100
    mismatched = sum(greedy_decode(random_model, s).actions != beam_decode(random_model, s, 1).actions
                     for s in fuzz_sentences)
    record_property("detail", f"greedy={greedy:.4f} beam20={beam:.4f} gap={gap:.2f} points "
                              f"beam1 mismatches={mismatched}/500")
    assert gap <= 0.5 and mismatched == 0


def test_7_action_bound(toy_trees, record_property, capsys):
    binary = action_stats([full_binary_tree(n) for n in range(1, 41)])
    assert all(c == 2 * n - 1 for n, c in binary.rows)
    stats = action_stats(toy_trees)
    table = stats.by_length()
    with capsys.disabled():
        print("\nlength\tsentences\tmean_actions\tmin\tmax")
        for n, k, mean, lo, hi in table:
            print(f"{n}\t{k}\t{mean:.2f}\t{lo}\t{hi}")
    ratio = stats.actions_per_token
    record_property("detail", f"full binary exact for n=1..40; toy actions/token={ratio:.4f}; "
                              f"{len(table)} table rows")
    assert 1.0 <= ratio <= 2.0 and table


def _prf(m, p, g):
    p_ = Fraction(m, p) if p else Fraction(0)
    r_ = Fraction(m, g) if g else Fraction(0)
    f_ = 2 * p_ * r_ / (p_ + r_) if p_ + r_ else Fraction(0)  # exact rational, then rounded once
    return float(p_), float(r_), float(f_)


def _ner(toks, *ents):
    return NerRecord(toks, ents)


T3 = ("a", "b", "c")
T4 = ("a", "b", "c", "d")
EVAL_CASES = [
    # (kind, gold, pred, (matched, predicted, gold))
    ("ner", [_ner(T3, (0, 2, "PER"))], [_ner(T3, (0, 2, "PER"), (1, 2, "ORG"))], (1, 2, 1)),
    ("ner", [_ner(T3, (0, 2, "PER"))], [_ner(T3, (0, 2, "ORG"))], (0, 1, 1)),
    ("ner", [_ner(T3, (0, 3, "LOC"), (0, 1, "PER"))], [_ner(T3, (0, 1, "PER"))], (1, 1, 2)),
    ("ner", [_ner(T3), _ner(T4, (2, 4, "ORG"))], [_ner(T3, (0, 1, "X")), _ner(T4, (2, 4, "ORG"))], (1, 2, 1)),
    ("ner", [_ner(T4, (0, 1, "A"), (1, 2, "A"), (2, 3, "A"))], [_ner(T4, (0, 1, "A"), (1, 3, "A"))], (1, 2, 3)),
    ("tree", ["(S (NP a b) (VP c))"], ["(S (NP a b) (VP c))"], (3, 3, 3)),
    ("tree", ["(S (NP a b) (VP c))"], ["(S (NP a) (VP b c))"], (1, 3, 3)),
    ("tree", ["(S (NP a) (VP b (NP c d)))"], ["(S (NP a) (VP b c d))"], (3, 3, 4)),
    ("tree", ["(S (A a) (B b) (C c) (D d))"], ["(S (X (A a) (B b)) (Y (C c) (D d)))"], (5, 7, 5)),
    ("tree", ["(S a b)", "(S (NP a) b c)"], ["(S (NP a) b)", "(S (VP a) b c)"], (2, 4, 3)),
]


def test_8_evaluation(record_property):
    for kind, gold, pred, (m, p, g) in EVAL_CASES:
        if kind == "tree":
            gold = [parse_brackets(x) for x in gold]
            pred = [parse_brackets(x) for x in pred]
            score = parseval
        else:
            score = ner_prf
        r = score(gold, pred)
        assert (r.matched, r.predicted, r.gold) == (m, p, g)
        assert (r.precision, r.recall, r.f1) == _prf(m, p, g)
        s = score(pred, gold)
        assert (s.precision, s.recall) == (r.recall, r.precision) and s.f1 == r.f1
    rng = np.random.default_rng(8)
    for _ in range(200):
        n = int(rng.integers(1, 15))
        toks = tuple(map(str, range(n)))
        a, b = _ner(toks, *random_entities(rng, n)), _ner(toks, *random_entities(rng, n))
        x, y = ner_prf([a], [b]), ner_prf([b], [a])
        assert (x.precision, x.recall, x.f1) == (y.recall, y.precision, y.f1)
    record_property("detail", f"{len(EVAL_CASES)} constructed pairs exact; swap symmetry exact")


def _legal_sets(oracle):
    config = initial_config(oracle.n)
    sets = []
    for a in oracle.actions:
        sets.append(legal_targets(config))
        config = apply_action(config, a)
    return sets


def test_9_ablation_switches(record_property):
    base = dict(embed_dim=4, encoder_hidden=3, decoder_hidden=5, mlp_hidden=4, label_embed_dim=3, seed=2)
    words = ("a", "b", "c", "d")
    labels = LabelSet(["S", "NP", "VP"])
    on = PointerScorer(ScorerConfig(**base), Vocabulary(words), labels)
    off = PointerScorer(ScorerConfig(**base, use_prev_label=False), Vocabulary(words), labels)
    changed = {k for k in on.params if on.params[k].shape != off.params[k].shape}
    assert changed <= {"dec_W", "start"}
    assert on.params["dec_W"].shape[1] - off.params["dec_W"].shape[1] == base["label_embed_dim"]
    assert on.params["start"].shape[0] - off.params["start"].shape[0] == base["label_embed_dim"]

    tree = parse_brackets("(S (NP a b) (VP c d))")
    orc = extract_oracle(tree)
    full = PointerScorer(ScorerConfig(**base), Vocabulary(words), labels)
    legal = PointerScorer(ScorerConfig(**base, legal_normalization=True), Vocabulary(words), labels,
                          {k: v.copy() for k, v in full.params.items()})
    a = full.forward(tree.tokens, orc, backward=False)
    b = legal.forward(tree.tokens, orc, backward=False)
    assert a["labeling_loss"] == b["labeling_loss"]
    assert b["pointing_loss"] < a["pointing_loss"]  # illegal boundaries hold mass here
    # uniform scores: only the denominator differs, by log((n+1)/|legal|) per step
    for m in (full, legal):
        m.params["W_point"][:] = 0.0
    a = full.forward(tree.tokens, orc, backward=False)
    b = legal.forward(tree.tokens, orc, backward=False)
    n = len(tree.tokens)
    sizes = [len(s) for s in _legal_sets(orc)]
    assert a["pointing_loss"] == pytest.approx(len(sizes) * np.log(n + 1), abs=1e-12)
    assert b["pointing_loss"] == pytest.approx(sum(np.log(k) for k in sizes), abs=1e-12)
    assert a["labeling_loss"] == b["labeling_loss"]
    record_property("detail", f"only {sorted(changed)} change shape; legal normalization lowers the pointing "
                              f"loss and changes nothing else")
