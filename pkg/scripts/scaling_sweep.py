"""Per-iteration timing on grid graphs of growing size, with log-log slopes.

    python scripts/scaling_sweep.py --sizes 1024,4096,16384 --algos linear,fit,bh --out sweep.csv
"""
import argparse
import logging

from fasttsnet import bench


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1024,4096,16384,32768")
    ap.add_argument("--algos", default="linear,fit,bh")
    ap.add_argument("--iterations", type=int, default=500)
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--out", default="scaling.csv")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    sizes = [int(s) for s in args.sizes.split(",")]
    algos = args.algos.split(",")
    rows = bench.scaling_sweep(sizes, algos, args.iterations, repeats=args.repeats)
    bench.write_csv(args.out, rows)
    for r in rows:
        print(f"{r.graph:>12} {r.algo:>7} {r.per_iter_ms:9.3f} ms/iter")
    for algo, slope in bench.slopes_by_algo(rows).items():
        print(f"slope {algo} {slope:.3f}")


if __name__ == "__main__":
    main()
