#!/usr/bin/env python3
"""Generate the synthetic dataset fixtures and their registry manifest.

Each file mirrors the on-disk format and split sizes of the real task it
stands in for. Contents are synthetic; the real datasets are not shipped.
"""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "datasets"
rng = random.Random(20240611)

WORDS = (
    "river window lantern garden silver market thunder harbor meadow violin "
    "candle mirror orchard pebble compass saddle ribbon tunnel falcon anchor "
    "blanket cottage glacier puzzle quarry rocket shadow teacup velvet wagon"
).split()


def phrase(n=6):
    return " ".join(rng.choice(WORDS) for _ in range(n))


def counts_to_labels(dist):
    out = []
    for label, n in dist:
        out.extend([label] * n)
    rng.shuffle(out)
    return out


def bigbench(name, description, dist, question_fn, options=None):
    labels = [l for l, _ in dist]
    examples = []
    for i, gold in enumerate(counts_to_labels(dist)):
        scores = {l: (1 if l == gold else 0) for l in labels}
        examples.append({"input": question_fn(i, gold), "target_scores": scores})
    doc = {"name": name, "description": description, "examples": examples}
    (OUT / f"{name.lower()}.json").write_text(json.dumps(doc, indent=1) + "\n")


def q_pair(i, _gold):
    return (f"Identify whether the sentence \"{phrase()}\" is a paraphrase of the "
            f"metaphoric sentence \"{phrase()}\" (item {i})")


def q_choice(k):
    letters = "ABCD"[:k]

    def f(i, _gold):
        opts = " ".join(f"({c.lower()}) {phrase(4)}" for c in letters)
        return f"Item {i}: {phrase(8)}? Options: {opts}"
    return f


def q_plain(kind):
    def f(i, _gold):
        return f"{kind} item {i}: {phrase(10)}."
    return f


def jsonl(name, splits, labels, with_reasoning=False):
    lines = []
    for split, dist in splits:
        for gold in counts_to_labels(dist):
            rec = {
                "id": f"{name}-{len(lines)}",
                "input": f"Premise: {phrase(9)}. Hypothesis: {phrase(7)}.",
                "target": gold,
                "choices": labels,
                "split": split,
            }
            if with_reasoning and split == "train" and len(lines) % 3 == 0:
                rec["reasoning"] = f"The premise mentions {phrase(3)}, so the relation is {gold.lower()}."
            lines.append(json.dumps(rec))
    (OUT / f"{name.lower()}.jsonl").write_text("\n".join(lines) + "\n")


def semeval(splits):
    rows = ["id\ttarget-entity\ttweet\tstance\tsplit"]
    targets = ["Atheism", "Climate Change is a Real Concern", "Feminist Movement",
               "Hillary Clinton", "Legalization of Abortion"]
    n = 0
    for split, dist in splits:
        for gold in counts_to_labels(dist):
            rows.append(f"{n}\t{rng.choice(targets)}\t{phrase(12)} #{rng.choice(WORDS)}\t{gold}\t{split}")
            n += 1
    (OUT / "semeval.tsv").write_text("\n".join(rows) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    bigbench("Metaphor", "Metaphor Recognition", [("True", 419), ("False", 261)], q_pair)
    bigbench("SNARKS", "Sarcasm Detection", [("A", 97), ("B", 84)], q_choice(2))
    bigbench("Humor", "Dark Humor Detection", [("Joke", 40), ("Not", 40)], q_plain("Joke"))
    bigbench("Pronoun", "Pronoun Resolution", [("A", 100), ("B", 80), ("C", 78)], q_choice(3))
    bigbench("Anachronisms", "Identifying Anachronisms", [("Yes", 115), ("No", 115)], q_plain("Statement"))
    bigbench("SEQ", "Simple Ethical Questions", [("A", 40), ("B", 30), ("C", 25), ("D", 20)], q_choice(4))
    bigbench("Entailment", "Analytic Entailment", [("Entailment", 40), ("No entailment", 30)], q_plain("Pair"))
    bigbench("IPA", "NLI in the International Phonetic Alphabet",
             [("Entailment", 49), ("Contradiction", 40), ("Neutral", 37)], q_plain("IPA pair"))

    nli = ["Entailment", "Contradiction", "Neutral"]
    socnorm = [
        ("train", [("Entailment", 900), ("Contradiction", 800), ("Neutral", 601)]),
        ("dev", [("Entailment", 120), ("Contradiction", 100), ("Neutral", 80)]),
        ("test", [("Entailment", 300), ("Contradiction", 268), ("Neutral", 200)]),
    ]
    jsonl("SocNorm", socnorm, nli, with_reasoning=True)
    jsonl("e-SocNorm", socnorm, nli, with_reasoning=True)
    jsonl("CALI", [
        ("train", [("Entailment", 700), ("Contradiction", 600), ("Neutral", 457)]),
        ("test", [("Entailment", 168), ("Contradiction", 150), ("Neutral", 122)]),
    ], nli, with_reasoning=True)
    semeval([
        ("train", [("NONE", 900), ("AGAINST", 800), ("FAVOR", 494)]),
        ("dev", [("NONE", 250), ("AGAINST", 220), ("FAVOR", 151)]),
        ("test", [("NONE", 300), ("AGAINST", 250), ("FAVOR", 157)]),
    ])

    registry = [
        ("Metaphor", "metaphor.json", "bigbench-json"),
        ("SNARKS", "snarks.json", "bigbench-json"),
        ("Humor", "humor.json", "bigbench-json"),
        ("Pronoun", "pronoun.json", "bigbench-json"),
        ("Anachronisms", "anachronisms.json", "bigbench-json"),
        ("SEQ", "seq.json", "bigbench-json"),
        ("SemEval", "semeval.tsv", "tsv"),
        ("SocNorm", "socnorm.jsonl", "jsonl"),
        ("e-SocNorm", "e-socnorm.jsonl", "jsonl"),
        ("CALI", "cali.jsonl", "jsonl"),
        ("Entailment", "entailment.json", "bigbench-json"),
        ("IPA", "ipa.json", "bigbench-json"),
    ]
    text = ["# Synthetic fixtures mirroring the twelve evaluation tasks.",
            "# Label spaces and metrics come from the built-in task table unless overridden here.", ""]
    for name, path, fmt in registry:
        text += ["[[dataset]]", f'name = "{name}"', f'path = "{path}"', f'format = "{fmt}"', ""]
    (OUT / "registry.toml").write_text("\n".join(text))


if __name__ == "__main__":
    main()
