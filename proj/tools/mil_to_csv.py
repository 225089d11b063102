#!/usr/bin/env python3
"""Convert a flat multiple-instance table into distreg's instances/targets CSV pair.

The input holds one instance per row: a bag identifier column, feature columns
and a bag label column (repeated on every row of the bag). This is how the
public MISR/MODIS aerosol (AOD) bag datasets are usually distributed.

    mil_to_csv.py misr1.csv --out data/misr1
    mil_to_csv.py modis.txt --delimiter whitespace --id-col 0 --label-col -1 --out data/modis
"""

import argparse
import csv
import math
import sys
from pathlib import Path


def read_rows(path, delimiter, skip_header):
    with open(path, newline="") as f:
        if delimiter == "whitespace":
            rows = [line.split() for line in f]
        else:
            rows = list(csv.reader(f, delimiter=delimiter))
    rows = [r for r in rows if r and not r[0].startswith("#")]
    return rows[1:] if skip_header else rows


def convert(rows, id_col, label_col, tolerance):
    width = len(rows[0])
    id_col %= width
    label_col %= width
    feature_cols = [j for j in range(width) if j not in (id_col, label_col)]
    order, labels, instances = [], {}, []
    for line_no, row in enumerate(rows, start=1):
        if len(row) != width:
            raise ValueError(f"row {line_no}: expected {width} columns, got {len(row)}")
        bag = row[id_col].strip()
        label = float(row[label_col])
        features = [float(row[j]) for j in feature_cols]
        if not all(math.isfinite(v) for v in features):
            raise ValueError(f"row {line_no}: non-finite feature in bag {bag}")
        if bag not in labels:
            order.append(bag)
            labels[bag] = label
        elif abs(labels[bag] - label) > tolerance:
            raise ValueError(f"row {line_no}: bag {bag} has conflicting labels {labels[bag]} and {label}")
        instances.append((bag, features))
    return order, labels, instances, len(feature_cols)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("input", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--delimiter", default=",", help="field separator, or 'whitespace'")
    p.add_argument("--id-col", type=int, default=0, help="bag id column (negative counts from the end)")
    p.add_argument("--label-col", type=int, default=-1, help="label column (negative counts from the end)")
    p.add_argument("--skip-header", action="store_true", help="drop the first non-comment row")
    p.add_argument("--label-tolerance", type=float, default=1e-12)
    args = p.parse_args(argv)

    rows = read_rows(args.input, args.delimiter, args.skip_header)
    if not rows:
        sys.exit(f"error: {args.input}: no data rows")
    try:
        order, labels, instances, dim = convert(rows, args.id_col, args.label_col, args.label_tolerance)
    except ValueError as e:
        sys.exit(f"error: {args.input}: {e}")

    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "instances.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["bag_id"] + [f"f{j + 1}" for j in range(dim)])
        for bag, features in instances:
            w.writerow([bag] + [repr(v) for v in features])
    with open(args.out / "targets.csv", "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["bag_id", "y"])
        for bag in order:
            w.writerow([bag, repr(labels[bag])])
    print(f"{len(order)} bags, {len(instances)} instances, {dim} features -> {args.out}")


if __name__ == "__main__":
    main()
