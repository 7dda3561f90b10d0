"""Compare layout quality of every preset against the exact gradient."""
import argparse

from fasttsnet import bench
from fasttsnet.fixtures import barabasi_albert, cycle, grid
from fasttsnet.optimizer import LayoutConfig

GRAPHS = {
    "grid32x32": lambda: grid(32, 32),
    "cycle500": lambda: cycle(500),
    "ba1000": lambda: barabasi_albert(1000, 2, 0),
}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iterations", type=int, default=500)
    args = ap.parse_args()
    base = LayoutConfig(iterations=args.iterations)
    print(f"{'graph':>10} {'algo':>7} {'np':>7} {'stress':>8} {'sb':>7} {'crossless':>9}")
    for name, make in GRAPHS.items():
        g = make()
        ref = None
        for algo in ("exact", "bh", "fit", "linear"):
            r = bench.bench_graph(name, g, algo, args.seed, base)
            ref = ref or r
            gap = abs(r.stress - ref.stress) / max(ref.stress, 1e-12)
            print(f"{name:>10} {algo:>7} {r.np:7.4f} {r.stress:8.4f} {r.sb:7.4f} "
                  f"{r.crosslessness:9.4f}  stress gap {gap:.1%}")


if __name__ == "__main__":
    main()
