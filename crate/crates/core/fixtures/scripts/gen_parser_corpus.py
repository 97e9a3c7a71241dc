#!/usr/bin/env python3
"""Generate the response-parser fixture corpus.

Every case is a pair <case>.response.txt / <case>.expected.tsv. The expected
file is written from the generation parameters, so it never depends on the
parser under test.

expected.tsv rows (tab separated):
  labels   L1|L2|...
  aliases  surface=Label|...      (optional)
  answer   <label> or PARSE_FAILURE
  rank     <direct|role|third>  <confidence in [0,1]>   (zero or more, in listed order)
"""
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent / "parser_corpus"
rng = random.Random(7)

SPACES = {
    "binary": (["True", "False"], {}),
    "stance": (["FAVOR", "AGAINST", "NONE"], {"favour": "FAVOR"}),
    "humor": (["Joke", "Not"], {"not a joke": "Not", "not joke": "Not", "a joke": "Joke"}),
    "letters": (["A", "B", "C", "D"], {}),
    "nli": (["Entailment", "Contradiction", "Neutral"], {}),
}
KINDS = ["direct", "role", "third"]
CANON = {"direct": "Direct Perspective", "role": "Role Perspective", "third": "Third-person Perspective"}
FILLER = ("the speakers weigh the wording carefully and compare how each phrase "
          "shifts meaning within its context before settling on a reading").split()


def filler(n):
    words = [rng.choice(FILLER) for _ in range(n)]
    return "So " + " ".join(words) + "."


def dialogue():
    return "\n".join([
        "Tom: " + filler(8),
        "Jerry: " + filler(6),
        "Tom: " + filler(10),
    ])


def rankings(n=3):
    kinds = rng.sample(KINDS, n)
    confs = sorted(rng.sample(range(40, 96, 5), n), reverse=True)
    return list(zip(kinds, confs))


def write(sub, name, text, space, answer, ranks):
    d = ROOT / sub
    d.mkdir(parents=True, exist_ok=True)
    labels, aliases = SPACES[space]
    rows = ["labels\t" + "|".join(labels)]
    if aliases:
        rows.append("aliases\t" + "|".join(f"{k}={v}" for k, v in aliases.items()))
    rows.append("answer\t" + answer)
    for kind, conf in ranks:
        rows.append(f"rank\t{kind}\t{conf}")
    (d / f"{name}.response.txt").write_text(text)
    (d / f"{name}.expected.tsv").write_text("\n".join(rows) + "\n")


def fmt_pct(c):
    return f"{c}%"


# ranking line styles: (kind, int confidence) -> text; decimals are expressed exactly
RANK_STYLES = [
    lambda k, c: f"{CANON[k]}, {c}%",
    lambda k, c: f"- {CANON[k]}: {c}%",
    lambda k, c: f"{CANON[k]} (confidence: {c}%)",
    lambda k, c: f"**{CANON[k]}**: {c / 100:.2f}",
    lambda k, c: f"{CANON[k].split()[0]} perspective - {c}",
    lambda k, c: f"| {CANON[k].split()[0]} | {c}% |",
    lambda k, c: f"{CANON[k].replace('-', ' ').lower()}: confidence {c}%",
    lambda k, c: f"{CANON[k].split()[0]}: {c / 100:.2f}",
    lambda k, c: f"{CANON[k].upper()}, {c} %",
    lambda k, c: f"{CANON[k]}\nConfidence: {c}%",
]

ANSWER_STYLES = [
    lambda a: f"Answer: {a}",
    lambda a: f"**Answer:** {a}",
    lambda a: f"Final answer: {a.lower()}.",
    lambda a: f"The answer is {a}.",
    lambda a: f"Answer - {a}",
    lambda a: f"Answer: {a} (based on the discussion above)",
    lambda a: f"Therefore, the final answer is: {a}",
    lambda a: f"Answer:\n{a}",
    lambda a: f"ANSWER: {a.lower()}",
    lambda a: '{"answer": "' + a + '"}',
    lambda a: f"After weighing everything, I would pick {a}.",
]


def canonical():
    for i in range(20):
        space = rng.choice(list(SPACES))
        labels, _ = SPACES[space]
        answer = rng.choice(labels)
        ranks = rankings()
        lines = ["Perspective and Confidence:"]
        lines += [f"{CANON[k]}, {c}%" for k, c in ranks]
        lines += ["", "Selected Perspective Reasoning:", dialogue(), f"Answer: {answer}"]
        write("canonical", f"canon{i:02d}", "\n".join(lines) + "\n", space, answer,
              [(k, c / 100) for k, c in ranks])


def variants():
    n = 0
    # 96 systematic variants: every ranking style crossed with answer styles
    while n < 96:
        space = rng.choice(list(SPACES))
        labels, aliases = SPACES[space]
        answer = rng.choice(labels)
        surface = answer
        if space == "humor" and rng.random() < 0.5:
            surface = "not a joke" if answer == "Not" else "a joke"
        if space == "letters":
            surface = rng.choice([answer, f"({answer})", f"({answer.lower()})"])
        rstyle = RANK_STYLES[n % len(RANK_STYLES)]
        astyle = ANSWER_STYLES[n % len(ANSWER_STYLES)]
        if space == "letters" and astyle is ANSWER_STYLES[10]:
            surface = f"option ({answer})"
        ranks = rankings(rng.choice([1, 2, 3, 3, 3]))
        header = rng.choice(["Perspective and Confidence:", "Perspectives ranked by confidence:", ""])
        body = [header] if header else []
        body += [rstyle(k, c) for k, c in ranks]
        body += ["", rng.choice(["Selected Perspective Reasoning:", "Reasoning:", ""]), dialogue(),
                 astyle(surface)]
        text = "\n".join(body).strip("\n") + "\n"
        write("variants", f"var{n:03d}", text, space, answer, [(k, c / 100) for k, c in ranks])
        n += 1
    # Genuinely hard cases: negated final statement and ordinal references.
    write("variants", "var096", "Direct Perspective, 80%\n\n" + filler(12)
          + "\nThe answer is definitely not False.\n", "binary", "True", [("direct", 0.8)])
    write("variants", "var097", "Role Perspective, 75%\n\n" + filler(12)
          + "\nAnswer: the second option\n", "letters", "B", [("role", 0.75)])
    # No recoverable label at all.
    write("variants", "var098", "Direct Perspective, 50%\n\nI cannot decide.\n", "binary",
          "PARSE_FAILURE", [("direct", 0.5)])
    write("variants", "var099", "Perspective and Confidence:\nnone available\n\n" + filler(10) + "\n",
          "stance", "PARSE_FAILURE", [])


QUAL = {"high": 0.9, "medium": 0.7, "low": 0.5}
QUAL_STYLES = [
    lambda k, q: f"{CANON[k].split()[0]}: {q}",
    lambda k, q: f"{CANON[k]}: {q.upper()}",
    lambda k, q: f"- {CANON[k]}, {q}",
    lambda k, q: f"{CANON[k].split()[0]} perspective - {q.capitalize()}",
]


def qualitative():
    for i in range(20):
        kinds = rng.sample(KINDS, rng.choice([1, 2, 3]))
        quals = [rng.choice(list(QUAL)) for _ in kinds]
        style = QUAL_STYLES[i % len(QUAL_STYLES)]
        text = "Perspective and Confidence:\n" + "\n".join(style(k, q) for k, q in zip(kinds, quals))
        text += "\n\nSelected Perspective Reasoning:\n" + filler(8) + "\nAnswer: True\n"
        write("qualitative", f"qual{i:02d}", text, "binary", "True",
              [(k, QUAL[q]) for k, q in zip(kinds, quals)])


def humor_alias():
    # Ten Humor-task outputs with hand-assigned labels.
    cases = [
        ("Answer: not a joke", "Not"),
        ("Answer: It's a joke.", "Joke"),
        ("Final answer: NOT A JOKE", "Not"),
        ("The answer is Joke.", "Joke"),
        ("Answer: Not", "Not"),
        ("I think this is not a joke, it is a plain statement.", "Not"),
        ("Answer: joke", "Joke"),
        ("**Answer:** not joke", "Not"),
        ("Taken together, this reads as a joke.", "Joke"),
        ("Answer: Not a joke.", "Not"),
    ]
    for i, (tail, label) in enumerate(cases):
        text = "Role Perspective, 70%\n\nSelected Perspective Reasoning:\n" + filler(9) + "\n" + tail + "\n"
        write("humor_alias", f"humor{i:02d}", text, "humor", label, [("role", 0.7)])


if __name__ == "__main__":
    canonical()
    variants()
    qualitative()
    humor_alias()
