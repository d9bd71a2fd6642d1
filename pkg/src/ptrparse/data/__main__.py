from pathlib import Path

from ..synth import toy_ner_corpus, toy_treebank
from ..treebank import emit_brackets, record_to_json

here = Path(__file__).parent
(here / "toy_treebank.txt").write_text("".join(emit_brackets(t) + "\n" for t in toy_treebank(200)), encoding="utf-8")
(here / "toy_ner.jsonl").write_text("".join(record_to_json(r) + "\n" for r in toy_ner_corpus(200)), encoding="utf-8")
