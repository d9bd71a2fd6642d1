import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ptrparse.evaluation import PrfReport, action_stats, labeled_spans, ner_prf, parseval
from ptrparse.synth import full_binary_tree, random_entities, random_raw_tree
from ptrparse.treebank import NerRecord, parse_brackets

TOK = ("a", "b", "c")


def rec(*ents, tokens=TOK):
    return NerRecord(tokens, ents)


def test_hand_computed_ner():
    r = ner_prf([rec((0, 2, "PER"))], [rec((0, 2, "PER"), (1, 2, "ORG"))])
    assert (r.precision, r.recall) == (0.5, 1.0)
    assert r.f1 == pytest.approx(2 / 3)


def test_label_must_match():
    r = ner_prf([rec((0, 2, "PER"))], [rec((0, 2, "ORG"))])
    assert (r.matched, r.f1) == (0, 0.0)


def test_vacuous():
    r = ner_prf([rec()], [rec()])
    assert r.vacuous and r.f1 == 0.0 and "vacuous" in str(r)
    assert not ner_prf([rec((0, 1, "X"))], [rec()]).vacuous


def test_parseval_counts_root_unless_excluded():
    gold = parse_brackets("(S (NP a b) (VP c))")
    pred = parse_brackets("(S (NP a) (VP b c))")
    assert parseval([gold], [pred]).as_dict()["matched"] == 1
    r = parseval([gold], [pred], exclude_root=True)
    assert (r.matched, r.predicted, r.gold) == (0, 2, 2)


def test_collapsed_chains():
    gold = parse_brackets("(S+VP (V a) (NP b c))")
    pred = parse_brackets("(VP (V a) (NP b c))")
    assert parseval([gold], [pred]).recall == pytest.approx(2 / 3)
    r = parseval([gold], [pred], collapsed=True)
    assert (r.matched, r.gold, r.precision) == (3, 4, 1.0)


def test_multiset_spans():
    t = parse_brackets("(X (X a b))")
    assert labeled_spans(t)[(0, 2, "X")] == 2


def test_mismatches_raise():
    with pytest.raises(ValueError, match="length"):
        ner_prf([rec()], [])
    with pytest.raises(ValueError, match="tokenization"):
        ner_prf([rec()], [rec(tokens=("x", "y", "z"))])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_swap_symmetry(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 12))
    toks = tuple("t" * (i + 1) for i in range(n))
    g, p = NerRecord(toks, random_entities(rng, n)), NerRecord(toks, random_entities(rng, n))
    a, b = ner_prf([g], [p]), ner_prf([p], [g])
    assert a.precision == b.recall and a.recall == b.precision and a.f1 == b.f1
    t1, t2 = random_raw_tree(rng, n), random_raw_tree(rng, n)
    t2 = type(t2)(t1.tokens, t2.root)
    x, y = parseval([t1], [t2]), parseval([t2], [t1])
    assert x.precision == y.recall and x.f1 == y.f1
    assert parseval([t1], [t1]).f1 == 1.0


def test_from_counts():
    r = PrfReport.from_counts(3, 4, 6)
    assert r.f1 == pytest.approx(2 * 0.75 * 0.5 / 1.25)


def test_action_stats():
    stats = action_stats([full_binary_tree(n) for n in (1, 2, 5, 8)])
    assert [c for _, c in stats.rows] == [1, 3, 9, 15]
    assert stats.total_tokens == 16 and stats.total_actions == 28
    assert stats.by_length()[2] == (5, 1, 9.0, 9, 9)
