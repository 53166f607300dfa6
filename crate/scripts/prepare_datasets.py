#!/usr/bin/env python3
"""Build the bundled Adult and Compas CSVs under crates/core/data/.

The raw UCI Adult files and the ProPublica two-year Compas file are taken
from the `responsibly` wheel on PyPI, which ships both verbatim:

    pip download --no-deps responsibly==0.1.2 -d /tmp/wheels
    python3 scripts/prepare_datasets.py /tmp/wheels/responsibly-0.1.2-py3-none-any.whl
"""
import collections
import csv
import io
import sys
import zipfile
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"

ADULT_COLS = [
    "age", "workclass", "fnlwgt", "education", "education-num", "marital-status",
    "occupation", "relationship", "race", "sex", "capital-gain", "capital-loss",
    "hours-per-week", "native-country", "income",
]
# Countries kept as their own one-hot column; the rest fold into "Other".
# 36 country columns + 58 other categorical columns + 6 continuous = 100.
ADULT_COUNTRY_SLOTS = 35


def adult(z):
    rows = []
    for name in ("adult.data", "adult.test"):
        text = z.read(f"responsibly/dataset/adult/{name}").decode()
        for line in text.splitlines():
            if not line.strip() or line.startswith("|"):
                continue
            fields = [f.strip() for f in line.split(",")]
            if len(fields) != len(ADULT_COLS):
                continue
            fields = ["" if f == "?" else f for f in fields]
            fields[-1] = "1" if fields[-1].rstrip(".") == ">50K" else "0"
            rows.append(fields)
    country = ADULT_COLS.index("native-country")
    counts = collections.Counter(r[country] for r in rows if r[country])
    keep = {c for c, _ in counts.most_common(ADULT_COUNTRY_SLOTS)}
    for r in rows:
        if r[country] and r[country] not in keep:
            r[country] = "Other"
    with open(OUT / "adult.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ADULT_COLS)
        w.writerows(rows)
    print(f"adult.csv: {len(rows)} rows")


def compas(z):
    text = z.read("responsibly/dataset/compas/compas-scores-two-years.csv").decode()
    reader = csv.DictReader(io.StringIO(text))
    header = [
        "sex", "age", "age_cat", "race", "juv_fel_count", "juv_misd_count",
        "juv_other_count", "priors_count", "charge_felony", "no_recid",
    ]
    rows = []
    for r in reader:
        # ProPublica's published filter; leaves 6172 rows.
        if r["days_b_screening_arrest"] == "":
            continue
        if not -30 <= int(r["days_b_screening_arrest"]) <= 30:
            continue
        if r["is_recid"] == "-1" or r["c_charge_degree"] == "O" or r["score_text"] == "N/A":
            continue
        rows.append([
            r["sex"], r["age"], r["age_cat"], r["race"], r["juv_fel_count"],
            r["juv_misd_count"], r["juv_other_count"], r["priors_count"],
            "1" if r["c_charge_degree"] == "F" else "0",
            "1" if r["two_year_recid"] == "0" else "0",
        ])
    with open(OUT / "compas.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"compas.csv: {len(rows)} rows")


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    OUT.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(sys.argv[1]) as z:
        adult(z)
        compas(z)


if __name__ == "__main__":
    main()
