#!/usr/bin/env python3
"""Write the colon-cancer mortality data (survival::colon, etype == 2) as CSV.

Columns: time (years = days / 365), status (1 = death), node4.
Needs the `rdatasets` package (pip install rdatasets).
"""
import argparse
import csv
import pathlib

import rdatasets


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data" / "colon.csv"))
    args = ap.parse_args()

    df = rdatasets.data("survival", "colon")
    df = df[df["etype"] == 2].reset_index(drop=True)
    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "status", "node4"])
        for t, s, x in zip(df["time"], df["status"], df["node4"]):
            w.writerow([repr(float(t) / 365.0), int(s), int(x)])
    print(f"wrote {len(df)} rows to {out}; censoring {100.0 * (df['status'] == 0).mean():.4f}%")


if __name__ == "__main__":
    main()
