#!/usr/bin/env python3
"""Fixtures for mock-backend replays.

worked_example/      the worked metaphor example: question, verbatim response, word count
humor40/     40 Humor instances, a 40-slot sequence script and a manifest that
             states by hand which slots answer correctly (26 of 40)
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent.parent
rng = random.Random(4040)

WORKED_QUESTION = ('Identify whether the sentence "Adam did not understand the root of the crisis" '
                   'is a paraphrase of the metaphoric sentence "Adam did not understand the solution to the crisis"')
WORKED_RESPONSE = """Perspective and Confidence:
Third-person Perspective, 85%
Role Perspective, 70%
Direct Perspective, 60%

Selected Perspective Reasoning:
Tom: Adam did not understand the root of the crisis.
Jerry: So, does that mean Adam did not understand the solution to the crisis?
Tom: Not exactly. Understanding the root of the crisis doesn't necessarily mean understanding the solution. Understanding the root is figuring out what causes the problem, while a solution refers to ways of solving the problem. They can be related but are not synonymous.
Answer: False
"""


def worked_example():
    d = HERE / "worked_example"
    d.mkdir(parents=True, exist_ok=True)
    (d / "question.txt").write_text(WORKED_QUESTION + "\n")
    (d / "response.txt").write_text(WORKED_RESPONSE)
    # independent word count: whitespace split
    (d / "word_count.txt").write_text(f"{len(WORKED_RESPONSE.split())}\n")
    task = {"id": "worked-0", "input": WORKED_QUESTION, "target": "False", "split": "test"}
    (d / "metaphor.jsonl").write_text(json.dumps(task) + "\n")


def humor40():
    d = HERE / "humor40"
    d.mkdir(parents=True, exist_ok=True)
    golds = ["Joke"] * 20 + ["Not"] * 20
    rng.shuffle(golds)
    correct_slots = set(rng.sample(range(40), 26))
    tasks, script, manifest = [], [], []
    for i, gold in enumerate(golds):
        tasks.append({"id": f"humor40-{i}", "input": f"Humor item {i}: a short line of text number {i}.",
                      "target": gold, "split": "test"})
        ok = i in correct_slots
        other = "Not" if gold == "Joke" else "Joke"
        said = gold if ok else other
        surface = {"Joke": rng.choice(["Joke", "a joke", "joke"]),
                   "Not": rng.choice(["Not", "not a joke", "Not a joke."])}[said]
        text = ("Perspective and Confidence:\nRole Perspective, 70%\nDirect Perspective, 55%\n\n"
                f"Selected Perspective Reasoning:\nAs a comedian I read line {i} closely.\nAnswer: {surface}\n")
        script.append({"sequence": True, "response": text})
        manifest.append({"slot": i, "gold": gold, "scripted": said, "correct": ok})
    (d / "humor40.jsonl").write_text("".join(json.dumps(t) + "\n" for t in tasks))
    (d / "script.jsonl").write_text("".join(json.dumps(s) + "\n" for s in script))
    (d / "manifest.json").write_text(json.dumps({"correct": sum(m["correct"] for m in manifest),
                                                 "total": 40, "slots": manifest}, indent=1) + "\n")


if __name__ == "__main__":
    worked_example()
    humor40()
