#!/usr/bin/env python3
"""Rebuild MovieLens-100K native files (u.data, u.item) from RecBole atomic files.

RecBole ships ml-100k.inter / ml-100k.item inside its wheel. The atomic item
file keeps title, release year and genre tokens, which is everything the
loader reads from u.item. Release dates are written as 01-Jan-<year>; video date and URL stay empty.
"""
import argparse
import os

GENRES = ["unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
          "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
          "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western"]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("atomic_dir")
    ap.add_argument("out_dir")
    args = ap.parse_args()
    os.makedirs(args.out_dir, exist_ok=True)

    with open(os.path.join(args.atomic_dir, "ml-100k.inter")) as src, \
            open(os.path.join(args.out_dir, "u.data"), "w") as dst:
        next(src)
        for line in src:
            user, item, rating, ts = line.rstrip("\n").split("\t")
            dst.write(f"{user}\t{item}\t{int(float(rating))}\t{int(float(ts))}\n")

    rows = []
    with open(os.path.join(args.atomic_dir, "ml-100k.item"), encoding="latin-1") as src:
        next(src)
        for line in src:
            item, title, year, classes = line.rstrip("\n").split("\t")
            tokens = set(classes.split())
            unknown = [t for t in tokens if t not in GENRES]
            if unknown:
                raise SystemExit(f"item {item}: unexpected genre tokens {unknown}")
            flags = ["1" if g in tokens else "0" for g in GENRES]
            date = f"01-Jan-{year}" if year.isdigit() else ""
            shown = f"{title} ({year})" if year.isdigit() else title
            rows.append((int(item), f"{item}|{shown}|{date}|||" + "|".join(flags)))
    rows.sort()
    with open(os.path.join(args.out_dir, "u.item"), "w", encoding="latin-1") as dst:
        for _, row in rows:
            dst.write(row + "\n")


if __name__ == "__main__":
    main()
