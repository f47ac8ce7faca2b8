import json
import os
from typing import Any, Dict, Sequence

import numpy as np
import pandas as pd

from seroclass.classification.rules import ClassificationRule, Label, PrevalenceInterval, RuleKind, Weights
from seroclass.models.serialization import load_density
from seroclass.utils.exceptions import InvalidConfigException, MissingInputException

LABEL_COLUMNS = ["sample_id", "label", "score"]


def rule_to_dict(rule: ClassificationRule, pos_path: str, neg_path: str) -> Dict[str, Any]:
    document: Dict[str, Any] = {
        "kind": rule.kind.value,
        "weights": {"w_fp": rule.weights.w_fp, "w_fn": rule.weights.w_fn},
        "pos_density": pos_path,
        "neg_density": neg_path,
    }
    if rule.kind is RuleKind.BINARY:
        document["prevalence"] = rule.prevalence
    else:
        document["interval"] = {"p_lo": rule.interval.p_lo, "p_hi": rule.interval.p_hi}
    return document


def save_rule(rule: ClassificationRule, path: str, pos_path: str, neg_path: str) -> None:
    with open(path, "w") as f:
        json.dump(rule_to_dict(rule, pos_path, neg_path), f, indent=2, sort_keys=True)


def load_rule(path: str) -> ClassificationRule:
    """Reads a rule document; density paths are taken relative to the document."""
    if not os.path.exists(path):
        raise MissingInputException(f"Rule file '{path}' does not exist")
    base = os.path.dirname(path) or "."
    try:
        with open(path) as f:
            document = json.load(f)
        kind = RuleKind(document["kind"])
        pos = load_density(os.path.join(base, document["pos_density"]))
        neg = load_density(os.path.join(base, document["neg_density"]))
        weights = Weights(**document.get("weights", {}))
        if kind is RuleKind.BINARY:
            return ClassificationRule.binary(pos, neg, document["prevalence"], weights)
        return ClassificationRule.ternary(pos, neg, PrevalenceInterval(**document["interval"]), weights)
    except (KeyError, TypeError, ValueError) as e:
        raise InvalidConfigException(f"Malformed rule document '{path}': {e}") from e


def labels_frame(sample_ids: Sequence[str], codes: np.ndarray, scores: np.ndarray) -> pd.DataFrame:
    return pd.DataFrame({
        "sample_id": list(sample_ids),
        "label": [Label.from_code(code).text for code in codes],
        "score": np.asarray(scores, dtype=float),
    }, columns=LABEL_COLUMNS)


def label_summary(codes: np.ndarray) -> Dict[str, int]:
    return {label.text: int(np.sum(np.asarray(codes) == label.value)) for label in Label}
