#!/usr/bin/env python3
"""Regenerate the label-count fixtures under tests/fixtures."""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"

SEEDS = {
    "Experiences": ["i live alone with my cats.", "I grew up in a small town.",
                    "I work in a grocery store.", "I quit my previous job."],
    "Characteristics": ["I am afraid of snakes.", "I like meat.",
                        "I'm not a big fan of science fiction.", "I don't like to drink."],
    "Routines or Habits": ["Each morning I make an omelet with 6 eggs.", "I like to hike.",
                           "I like to work on cars."],
    "Goals or Plans": ["I want to buy a muscle car.", "I want a better job.",
                       "I plan to go back and finish college."],
    "Relationship": ["I have a neighbor named John.", "My sister is my best friend.",
                     "I call my mom every week."],
}

SAMPLES = [
    ("A lot of my family members are teachers.", ["Relationship", "Experiences"]),
    ("I am afraid of snakes.", ["Characteristics"]),
    ("i live alone with my cats.", ["Experiences"]),
    ("Each morning I make an omelet with 6 eggs.", ["Routines or Habits"]),
    ("I am married with two children.", ["Characteristics", "Experiences"]),
    ("I want to buy a muscle car.", ["Goals or Plans"]),
]


def write_split(name, counts):
    rows = []
    for label, count in counts.items():
        seeds = SEEDS[label]
        for i in range(count):
            rows.append({"id": f"{name}-{len(rows):05d}", "text": seeds[i % len(seeds)],
                         "labels": [label]})
    with open(OUT / f"counts_{name}.jsonl", "w", encoding="utf-8") as f:
        for r in rows:
            f.write(json.dumps(r, ensure_ascii=False) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write_split("train", {"Experiences": 1368, "Characteristics": 977, "Routines or Habits": 272,
                          "Goals or Plans": 112, "Relationship": 160})
    write_split("test", {"Experiences": 263, "Characteristics": 218, "Routines or Habits": 87,
                         "Goals or Plans": 76, "Relationship": 32})
    with open(OUT / "labeled_samples.jsonl", "w", encoding="utf-8") as f:
        for i, (text, labels) in enumerate(SAMPLES):
            f.write(json.dumps({"id": f"p{i + 1}", "text": text, "labels": labels}) + "\n")


if __name__ == "__main__":
    main()
