"""Regenerate the class-partition fixtures for the two order-5 examples.

Run from the repository root:  python scripts/make_fixtures.py
"""

import json
from pathlib import Path

from iterplex.chain import build_states

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def sig(vec, n=5):
    c = [0] * n
    for x in vec:
        c[x - 1] += 1
    return tuple(c)


def translates(vec, n=5):
    """Signatures of vec * (h, ..., h) in Z_n with 1 as identity."""
    return sorted({sig([(x - 1 + h) % n + 1 for x in vec]) for h in range(n)}, reverse=True)


def z5_blocks():
    classes = [
        ("Z11111", ["11111"]),
        ("Z12345", ["12345"]),
        ("Z11134+Z11125", ["11134", "11125"]),
        ("Z11224+Z11332", ["11224", "11332"]),
    ]
    blocks = []
    for label, reps in classes:
        states = []
        for r in reps:
            states.extend(translates([int(ch) for ch in r]))
        blocks.append({"label": label, "states": [list(s) for s in sorted(set(states), reverse=True)]})
    return blocks


def q5_label(s):
    """Class H1..H13 of a signature; symbol 2 is the distinguished value."""
    shape = tuple(sorted((c for c in s if c), reverse=True))
    c2 = s[1]
    if shape == (5,):
        return 1
    if shape == (1, 1, 1, 1, 1):
        return 2
    if shape == (4, 1):
        return 13
    if shape == (3, 1, 1):
        return 3 if c2 in (3, 1) else 4
    if shape == (3, 2):
        return 5 if c2 in (3, 2) else 6
    if shape == (2, 1, 1, 1):
        return {1: 7, 0: 8, 2: 9}[c2]
    if shape == (2, 2, 1):
        return {2: 10, 0: 11, 1: 12}[c2]
    raise ValueError(s)


def q5_blocks():
    groups = {i: [] for i in range(1, 14)}
    for s in build_states(5, 1):
        groups[q5_label(s)].append(list(s))
    return [{"label": f"H{i}", "states": groups[i]} for i in range(1, 14)]


if __name__ == "__main__":
    (OUT / "z5-4class.json").write_text(json.dumps(z5_blocks(), indent=1) + "\n")
    (OUT / "q5-13class.json").write_text(json.dumps(q5_blocks(), indent=1) + "\n")
