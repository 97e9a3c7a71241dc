#!/usr/bin/env python3
"""Freeze accuracy / macro-F1 expectations computed by scikit-learn.

Predictions of null stand for unparseable answers: they count as wrong and
never as a prediction of any scored class.
"""
import json
import random
from pathlib import Path

from sklearn.metrics import accuracy_score, f1_score

OUT = Path(__file__).resolve().parent.parent / "metric_oracle"
rng = random.Random(99)
FAIL = "__PARSE_FAILURE__"

SPACES = [
    ["True", "False"],
    ["FAVOR", "AGAINST", "NONE"],
    ["Entailment", "Contradiction", "Neutral"],
    ["A", "B", "C", "D"],
]


def score(golds, preds, classes):
    p = [FAIL if x is None else x for x in preds]
    acc = 100.0 * accuracy_score(golds, p)
    f1 = 100.0 * f1_score(golds, p, labels=classes, average="macro", zero_division=0)
    return acc, f1


def cases():
    out = []
    for i in range(50):
        labels = rng.choice(SPACES)
        n = rng.randint(5, 60)
        weights = [rng.random() + 0.05 for _ in labels]
        golds = rng.choices(labels, weights=weights, k=n)
        skill = rng.random()
        preds = []
        for g in golds:
            r = rng.random()
            if r < 0.05:
                preds.append(None)
            elif r < 0.05 + skill * 0.95:
                preds.append(g)
            else:
                preds.append(rng.choice(labels))
        if labels[0] == "FAVOR" and i % 2 == 0:
            classes = ["FAVOR", "AGAINST"]
        else:
            classes = list(labels)
        acc, f1 = score(golds, preds, classes)
        out.append({"labels": labels, "classes": classes, "golds": golds, "preds": preds,
                    "accuracy": acc, "macro_f1": f1})
    return out


def majority_cases():
    # constant predictor emitting the modal gold label
    out = []
    golds = ["Entailment"] * 50 + ["Contradiction"] * 30 + ["Neutral"] * 20
    labels = ["Entailment", "Contradiction", "Neutral"]
    _, f1 = score(golds, ["Entailment"] * len(golds), labels)
    out.append({"labels": labels, "classes": labels, "golds": golds, "majority_macro_f1": f1})
    golds = ["NONE"] * 40 + ["AGAINST"] * 35 + ["FAVOR"] * 25
    labels = ["FAVOR", "AGAINST", "NONE"]
    _, f1 = score(golds, ["NONE"] * len(golds), ["FAVOR", "AGAINST"])
    out.append({"labels": labels, "classes": ["FAVOR", "AGAINST"], "golds": golds, "majority_macro_f1": f1})
    return out


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    (OUT / "cases.json").write_text(json.dumps(cases(), indent=1) + "\n")
    (OUT / "majority.json").write_text(json.dumps(majority_cases(), indent=1) + "\n")
