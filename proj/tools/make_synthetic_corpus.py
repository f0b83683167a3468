#!/usr/bin/env python3
"""Writes the synthetic end-to-end corpus used by the acceptance run.

Base terms are "<adjective> <noun>" leaves under five food groups. Each of
five facet categories owns six single-word descriptors, and no word is shared
between base terms, group names, category names and descriptors. A sample
description is the base-term name followed by one descriptor word per chosen
category.
"""

import argparse
import csv
import json
import random
from pathlib import Path

ADJECTIVES = ["crisp", "wild", "sweet", "sour", "young",
              "large", "small", "golden", "dark", "organic"]
NOUNS = {
    "apple": "pome fruits", "pear": "pome fruits",
    "plum": "stone fruits", "cherry": "stone fruits",
    "carrot": "root vegetables", "beet": "root vegetables",
    "lentil": "pulses", "bean": "pulses",
    "trout": "fish", "salmon": "fish",
}
CATEGORIES = [
    ("F01", "process", "E", ["boiled", "baked", "fried", "steamed", "roasted", "smoked"]),
    ("F02", "preservation", "G", ["canned", "frozen", "pickled", "salted", "cured", "chilled"]),
    ("F03", "packaging", "H", ["bottled", "boxed", "bagged", "wrapped", "jarred", "tinned"]),
    ("F04", "ingredient", "J", ["sugar", "honey", "garlic", "pepper", "vinegar", "butter"]),
    ("F05", "qualitative", "K", ["diet", "premium", "kosher", "halal", "vegan", "lite"]),
]
HEADER = ["code", "name", "hierarchy", "parent_code", "implicit_facets", "description"]


def code(prefix, n):
    return f"{prefix}{n:04d}"


def build_catalog():
    rows = [["A0000", "food", "BASE", "", "", "any food item"]]
    groups = {}
    for g in dict.fromkeys(NOUNS.values()):
        groups[g] = code("B", len(groups) + 1)
        rows.append([groups[g], g, "BASE", "A0000", "", ""])
    base_terms = []
    for noun, group in NOUNS.items():
        for adj in ADJECTIVES:
            c = code("A", len(base_terms) + 1)
            base_terms.append((c, f"{adj} {noun}"))
            rows.append([c, f"{adj} {noun}", "BASE", groups[group], "", ""])
    descriptors = {}
    for cat, name, prefix, words in CATEGORIES:
        rows.append([code(prefix, 0), name, cat, "", "", f"{name} facets"])
        descriptors[cat] = []
        for i, w in enumerate(words, start=1):
            descriptors[cat].append((code(prefix, i), w))
            rows.append([code(prefix, i), w, cat, code(prefix, 0), "", ""])
    return rows, base_terms, descriptors


def sample(rng, base, descriptors):
    n = rng.choice([0, 1, 1, 2, 2, 3])
    cats = sorted(rng.sample(sorted(descriptors), n))
    groups, words = [], []
    for cat in cats:
        dcode, word = rng.choice(descriptors[cat])
        groups.append(f"{cat}.{dcode}")
        words.append(word)
    rng.shuffle(words)
    facets = base[0] + ("#" + "$".join(groups) if groups else "")
    return [facets, " ".join([base[1]] + words), base[1]]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "tests" / "data"))
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--train-per-term", type=int, default=5)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, base_terms, descriptors = build_catalog()
    with open(out / "synthetic_catalog.tsv", "w", newline="") as f:
        for r in [HEADER] + rows:
            f.write("\t".join(r) + "\n")

    def unique_samples(per_term, taken):
        result = []
        for base in base_terms:
            made = 0
            while made < per_term:
                s = sample(rng, base, descriptors)
                if s[1] not in taken:
                    taken.add(s[1])
                    result.append(s)
                    made += 1
        return result

    taken = set()
    test = unique_samples(1, taken)
    train = unique_samples(args.train_per_term, taken)
    for name, data in (("synthetic_train.csv", train), ("synthetic_test.csv", test)):
        with open(out / name, "w", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(["FACETS", "ENFOODNAME", "BASETERM_NAME"])
            w.writerows(data)

    config = {
        "k_base": 10, "k_descriptor": 6,
        "tau_base": 0.1, "tau_descriptor": 0.05, "tau_category": 0.35,
        "category_backend": "linear", "selection_backend": "retrieve_rerank",
        "embedder": "deterministic", "scorer": "lexical", "seed": args.seed,
    }
    with open(out / "synthetic_config.json", "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
