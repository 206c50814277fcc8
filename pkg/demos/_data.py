"""Synthetic cohort shared by the demo scripts."""

import random

from holdout_kfold import from_rows


def cohort(n=1000, seed=0):
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        age = rng.randint(18, 90)
        visits = rng.randint(0, 12)
        region = rng.choice(["north", "south", "east", "west"])
        risk = 0.04 * (age - 50) + 0.3 * visits + rng.gauss(0, 1.2)
        rows.append([f"pt{i:05d}", str(age), str(visits), region, "dx" if risk > 1.5 else "no_dx"])
    return from_rows(["id", "age", "visits", "region", "label"], rows)
