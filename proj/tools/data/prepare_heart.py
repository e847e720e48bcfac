#!/usr/bin/env python3
"""Convert the UCI Cleveland heart-disease records to data/heart.csv.

Input is the tab-separated `heart_disease.tab` shipped inside the Orange3
wheel (Orange/datasets/heart_disease.tab). Records with a missing value are
dropped (303 -> 297). Nominal attributes are mapped back to the original UCI
integer codes. Label: 1 = diameter narrowing (disease present).
"""
import sys

CHEST_PAIN = {"typical ang": 1, "atypical ang": 2, "non-anginal": 3, "asymptomatic": 4}
REST_ECG = {"normal": 0, "ST-T abnormal": 1, "left vent hypertrophy": 2}
SLOPE = {"upsloping": 1, "flat": 2, "downsloping": 3}
THAL = {"normal": 3, "fixed defect": 6, "reversable defect": 7}
HEADER = ["age", "sex", "chest_pain", "rest_bp", "cholesterol", "fbs", "rest_ecg", "max_hr",
          "exang", "oldpeak", "slope", "vessels", "thal", "label"]


def main(src, dst):
    with open(src) as f:
        lines = f.read().split("\n")[3:]
    out = []
    for line in lines:
        if not line.strip():
            continue
        f = line.split("\t")
        if any(v.strip() in ("", "?") for v in f):
            continue
        out.append([f[0], "1" if f[1] == "male" else "0", str(CHEST_PAIN[f[2]]), f[3], f[4], f[5],
                    str(REST_ECG[f[6]]), f[7], f[8], f[9], str(SLOPE[f[10]]), f[11],
                    str(THAL[f[12]]), f[13]])
    with open(dst, "w") as fh:
        fh.write(",".join(HEADER) + "\n")
        for v in out:
            fh.write(",".join(v) + "\n")
    print(f"wrote {len(out)} records to {dst}", file=sys.stderr)


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit("usage: prepare_heart.py heart_disease.tab heart.csv")
    main(sys.argv[1], sys.argv[2])
