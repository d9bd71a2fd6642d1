"""Bottom-up constituency parsing and nested NER by post-order pointing."""

from .pointing import Configuration, PointAction, apply_action, initial_config, is_goal, legal_targets
from .oracle import OracleSequence, extract_oracle, replay
from .treebank import LabeledSpan, NerRecord, Node, ParseTree, parse_brackets, emit_brackets

__version__ = "0.1.0"

__all__ = [
    "Configuration", "PointAction", "apply_action", "initial_config", "is_goal", "legal_targets",
    "OracleSequence", "extract_oracle", "replay",
    "LabeledSpan", "NerRecord", "Node", "ParseTree", "parse_brackets", "emit_brackets",
]
