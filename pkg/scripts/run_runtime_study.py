"""Wall time of the base and ensemble estimators against N and d.

    python3 scripts/run_runtime_study.py --out results/runtime.csv
"""
import argparse
import csv
from pathlib import Path

from edge_mi.bench import runtime_sweep
from edge_mi.synth import GaussNoise


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", type=Path, default=Path("results/runtime.csv"))
    p.add_argument("--n-list", default="1000,10000,100000")
    p.add_argument("--dims", default="1,2,4,8")
    p.add_argument("--repeats", type=int, default=5)
    args = p.parse_args()
    n_list = [int(v) for v in args.n_list.split(",")]
    args.out.parent.mkdir(parents=True, exist_ok=True)

    rows = []
    for variant in ("base", "edge"):
        for d in (int(v) for v in args.dims.split(",")):
            for r in runtime_sweep(GaussNoise(d, 1.0), n_list, repeats=args.repeats, variant=variant):
                rows.append(r)
                print(f"{variant:>4s} d={r['d']:>2d} n={r['n']:>7d}  {r['wall_time'] * 1e3:9.2f} ms  "
                      f"{r['per_sample_time'] * 1e9:7.1f} ns/sample")
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["variant", "d", "n", "wall_time", "per_sample_time"])
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
