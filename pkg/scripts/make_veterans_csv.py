#!/usr/bin/env python3
"""Convert the Veterans lung-cancer dataset to the package CSV schema.

The dataset ships with the R `survival` package as `veteran` (137 rows).
Export it to CSV (`write.csv(veteran, "veteran_raw.csv", row.names=FALSE)`)
and run this script, or let the script pull it from scikit-survival when
that library is installed.  Output columns: f0..f5,time,event with

    f0 = trt (1 standard, 2 test chemotherapy)
    f1 = celltype code (squamous 1, smallcell 2, adeno 3, large 4)
    f2 = karno (Karnofsky performance score)
    f3 = diagtime (months from diagnosis to randomisation)
    f4 = age (years)
    f5 = prior (prior therapy, 0 no / 10 yes)

Usage:
    python3 scripts/make_veterans_csv.py veteran_raw.csv data/veterans.csv
    python3 scripts/make_veterans_csv.py --from-sksurv data/veterans.csv
"""

import argparse
import csv
import os
import sys

CELLTYPE_CODES = {"squamous": 1.0, "smallcell": 2.0, "adeno": 3.0, "large": 4.0}
FEATURES = ("trt", "celltype", "karno", "diagtime", "age", "prior")


def celltype_value(raw: str) -> float:
    key = raw.strip().strip('"').lower()
    if key in CELLTYPE_CODES:
        return CELLTYPE_CODES[key]
    return float(key)  # already numeric


def convert_rows(rows):
    out = []
    for row in rows:
        rec = {k.strip().strip('"').lower(): v for k, v in row.items()}
        feats = [
            celltype_value(rec[name]) if name == "celltype" else float(rec[name])
            for name in FEATURES
        ]
        out.append(feats + [float(rec["time"]), int(float(rec["status"]))])
    return out


def rows_from_sksurv():
    from sksurv.datasets import load_veterans_lung_cancer

    X, y = load_veterans_lung_cancer()
    frame = X.copy()
    frame["time"] = [t for _, t in y]
    frame["status"] = [int(e) for e, _ in y]
    rename = {
        "Treatment": "trt",
        "Celltype": "celltype",
        "Karnofsky_score": "karno",
        "Months_from_Diagnosis": "diagtime",
        "Age_in_years": "age",
        "Prior_therapy": "prior",
    }
    frame = frame.rename(columns=rename)
    frame["trt"] = (frame["trt"].astype(str) == "test").astype(int) + 1
    frame["prior"] = (frame["prior"].astype(str) == "yes").astype(int) * 10
    return frame.to_dict("records")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", nargs="?", help="raw veteran CSV (R export)")
    parser.add_argument("output", help="destination CSV in package schema")
    parser.add_argument(
        "--from-sksurv",
        action="store_true",
        help="load via scikit-survival instead of a raw CSV",
    )
    args = parser.parse_args(argv)

    if args.from_sksurv:
        records = convert_rows({k: str(v) for k, v in row.items()} for row in rows_from_sksurv())
    else:
        if not args.source:
            parser.error("provide a raw CSV path or --from-sksurv")
        with open(args.source, newline="") as fh:
            records = convert_rows(csv.DictReader(fh))

    if len(records) != 137:
        print(f"warning: expected 137 rows, got {len(records)}", file=sys.stderr)

    os.makedirs(os.path.dirname(os.path.abspath(args.output)), exist_ok=True)
    with open(args.output, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"f{j}" for j in range(6)] + ["time", "event"])
        writer.writerows(records)
    print(args.output)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
