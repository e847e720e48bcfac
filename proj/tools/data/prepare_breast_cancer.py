#!/usr/bin/env python3
"""Convert the UCI Breast Cancer (Ljubljana) records to data/breast_cancer.csv.

Input is the tab-separated `breast-cancer.tab` distributed with the Orange
2.7 source archive (Orange-2.7.8/Orange/datasets/breast-cancer.tab). Records
with a missing value are dropped (286 -> 277), then exact duplicates
(277 -> 263). Interval attributes become
their midpoints, yes/no and left/right become 0/1, the remaining nominal
attributes get the integer codes below. Label: 1 = recurrence-events.
"""
import csv
import sys

MENOPAUSE = {"premeno": 0, "ge40": 1, "lt40": 2}
QUADRANT = {"left_up": 0, "left_low": 1, "right_up": 2, "right_low": 3, "central": 4}
BINARY = {"no": 0, "yes": 1, "left": 0, "right": 1}


def midpoint(interval):
    lo, hi = interval.split("-")
    return (int(lo) + int(hi)) / 2


def main(src, dst):
    with open(src, newline="") as f:
        rows = list(csv.reader(f, delimiter="\t"))
    header, records = rows[0], rows[3:]
    col = {name: i for i, name in enumerate(header)}
    kept = 0
    seen = set()
    with open(dst, "w", newline="") as f:
        out = csv.writer(f, lineterminator="\n")
        out.writerow(["age", "menopause", "tumor_size", "inv_nodes", "node_caps", "deg_malig",
                      "breast", "breast_quad", "irradiat", "label"])
        for r in records:
            if any(v in ("", "?") for v in r):
                continue
            row = (
                midpoint(r[col["age"]]),
                MENOPAUSE[r[col["menopause"]]],
                midpoint(r[col["tumor-size"]]),
                midpoint(r[col["inv-nodes"]]),
                BINARY[r[col["node-caps"]]],
                int(r[col["deg-malig"]]),
                BINARY[r[col["breast"]]],
                QUADRANT[r[col["breast-quad"]]],
                BINARY[r[col["irradiat"]]],
                1 if r[col["recurrence"]] == "recurrence-events" else 0,
            )
            if row in seen:
                continue
            seen.add(row)
            out.writerow(row)
            kept += 1
    print(f"wrote {kept} records to {dst}", file=sys.stderr)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: prepare_breast_cancer.py breast-cancer.tab breast_cancer.csv")
    main(sys.argv[1], sys.argv[2])
