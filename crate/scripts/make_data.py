"""Regenerates the bundled CSV files under data/.

The age files are synthetic stand-ins for survey age data: integer ages in
[18, 64] before and after a policy change, for two regions. The after
samples differ from the before samples in location and scale and also in
shape, so a location-scale null is expected to be rejected.

Usage: python3 scripts/make_data.py  (run from the repository root)
"""

import csv
import random
from pathlib import Path

DATA = Path(__file__).resolve().parent.parent / "data"
LO, HI = 18, 64


def clamp_age(v):
    return min(HI, max(LO, round(v)))


def before_ages(rng, n, mean, sd):
    ages = [clamp_age(rng.gauss(mean, sd)) for _ in range(n - 2)]
    return [LO, HI] + ages


def after_ages(rng, n, mean, sd, older_share):
    out = []
    for _ in range(n):
        if rng.random() < older_share:
            out.append(clamp_age(rng.gauss(54.0, 4.0)))
        else:
            out.append(clamp_age(rng.gauss(mean, sd)))
    return out


def write_column(name, header, values):
    with open(DATA / name, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([header])
        for v in values:
            w.writerow([v])


def main():
    DATA.mkdir(exist_ok=True)
    rng = random.Random(20240601)
    write_column("ny_before.csv", "age", before_ages(rng, 4548, 40.0, 11.0))
    write_column("ny_after.csv", "age", after_ages(rng, 2517, 40.5, 10.0, 0.18))
    write_column("pa_before.csv", "age", before_ages(rng, 3113, 41.0, 11.5))
    write_column("pa_after.csv", "age", after_ages(rng, 1875, 41.5, 11.0, 0.10))

    # y = (x - 1) / 2 exactly, so the location-scale fit at (1, 2) is perfect.
    with open(DATA / "paired_exact.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for _ in range(200):
            x = round(rng.gauss(3.0, 2.0), 3)
            w.writerow([repr(x), repr((x - 1.0) / 2.0)])


if __name__ == "__main__":
    main()
