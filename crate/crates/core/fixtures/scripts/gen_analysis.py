#!/usr/bin/env python3
"""Analysis fixtures with recount oracles.

records.jsonl rows carry the fields the analyses read from a prediction
record: chosen perspective, its confidence, correctness, response length,
method and the reasoning text. expected.json holds the direct recounts.
"""
import json
import random
import re
from collections import Counter, defaultdict
from pathlib import Path

HERE = Path(__file__).resolve().parent.parent
OUT = HERE / "analysis"
rng = random.Random(31337)

VOCAB = {
    "direct": "answer directly sentence meaning word simple literal reading clear".split(),
    "role": "expert linguist role experience professional knowledge field judge view".split(),
    "third": "tom jerry discussion agree dialogue conversation summarize agents debate".split(),
}
COMMON = "the a of and to is it that this".split()


def records():
    rows = []
    for i in range(400):
        kind = rng.choices(["direct", "role", "third"], weights=[2, 3, 5])[0]
        if i % 17 == 0:
            conf = None
            kind = None if i % 34 == 0 else kind
        else:
            conf = rng.choice([x / 100 for x in range(30, 100, 5)] + [1.0])
        # engineered: much higher hit rate above 0.7
        if conf is None:
            p = 0.5
        elif conf >= 0.7:
            p = 0.55 + 0.45 * (conf - 0.7) / 0.3
        else:
            p = 0.15 + 0.2 * (conf - 0.3) / 0.4
        correct = rng.random() < p
        words = []
        if kind:
            words = [rng.choice(VOCAB[kind] + COMMON) for _ in range(rng.randint(5, 15))]
        method = rng.choice(["rpt", "ensemble", "zero-shot-cot"])
        rows.append({
            "id": f"a-{i}",
            "method": method,
            "chosen": kind,
            "confidence": conf,
            "correct": correct,
            "length": rng.randint(20, 300) * (3 if method == "ensemble" else 1),
            "reasoning": (" ".join(words).capitalize() + ". " + "Answer: True") if words else "",
        })
    return rows


def bins(rows, width):
    n = round(1 / width)
    counts = [0] * n
    hits = [0] * n
    excluded = 0
    for r in rows:
        c = r["confidence"]
        if c is None or r["chosen"] is None:
            excluded += 1
            continue
        # exact decimal bucketing: confidences are multiples of 0.05
        k = min(int(round(c * 100)) * n // 100, n - 1)
        counts[k] += 1
        hits[k] += r["correct"]
    return [{"lower": k / n, "upper": (k + 1) / n, "count": counts[k],
             "accuracy": (100.0 * hits[k] / counts[k]) if counts[k] else None} for k in range(n)], excluded


def proportions(rows):
    tally = Counter(r["chosen"] for r in rows if r["chosen"])
    total = sum(tally.values())
    return {k: tally[k] / total for k in ["direct", "role", "third"]}


def keywords(rows, stop, top_k):
    per = defaultdict(Counter)
    for r in rows:
        if not r["chosen"]:
            continue
        for tok in re.split(r"[^0-9a-z]+", r["reasoning"].lower()):
            if tok and tok not in stop:
                per[r["chosen"]][tok] += 1
    out = {}
    for k, cnt in per.items():
        items = sorted(cnt.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
        out[k] = [[t, c] for t, c in items]
    return out


def cost(rows):
    by = defaultdict(list)
    for r in rows:
        by[r["method"]].append(r)
    out = {}
    for m, rs in by.items():
        out[m] = {"mean_length": sum(r["length"] for r in rs) / len(rs),
                  "accuracy": 100.0 * sum(r["correct"] for r in rs) / len(rs)}
    return out


if __name__ == "__main__":
    OUT.mkdir(parents=True, exist_ok=True)
    rows = records()
    (OUT / "records.jsonl").write_text("".join(json.dumps(r) + "\n" for r in rows))
    stop = set((HERE.parent / "assets" / "stopwords.txt").read_text().split())
    stop |= {"answer", "true"}
    b, excluded = bins(rows, 0.1)
    expected = {
        "bins": b,
        "excluded": excluded,
        "proportions": proportions(rows),
        "keywords_top5": keywords(rows, stop, 5),
        "keyword_extra_stopwords": ["answer", "true"],
        "cost": cost(rows),
    }
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1) + "\n")
