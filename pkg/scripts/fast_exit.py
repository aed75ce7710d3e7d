"""Fast-exit ratio of a slit plane over the unit disk, with its lower bound.

Runs the small-time comparison, prints the verdict rows, and saves the ratio
and tail plots next to the tables.
"""

import argparse
from pathlib import Path

from exitlab.experiments.config import parse_grid
from exitlab.experiments.plot import emit_plot
from exitlab.experiments.verify import verify_theorem2


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=2_000_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--grid", default="0.06:0.3:40")
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--out", type=Path, default=Path("exitlab_out/fast_exit"))
    args = ap.parse_args()

    v = verify_theorem2(args.alpha, args.n, args.seed, parse_grid(args.grid), eps=args.eps)
    v.write(args.out)
    print(v.report())
    for name in ("ratio.csv", "tail_slit.csv", "tail_disk.csv"):
        print(f"wrote {emit_plot(args.out / name)}")
    return 0 if v.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
