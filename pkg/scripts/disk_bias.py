"""Mean exit time of the unit disk against the step cap h0.

The exact value is 1/2; the script prints the bias at each h0, its ratio to
the budget used in the tests, and saves a log-log plot.
"""

import argparse
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from exitlab.estimators import moment
from exitlab.geometry import Disk
from exitlab.sampler import StepConfig, batch, disk_bias_budget


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--lam", type=float, default=0.5)
    ap.add_argument("--h0", type=float, nargs="+", default=[6.4e-2, 3.2e-2, 1.6e-2, 8e-3, 4e-3])
    ap.add_argument("--plot", default="disk_bias.svg")
    args = ap.parse_args()

    rows = []
    print(f"{'h0':>9} {'bias':>10} {'se':>9} {'bias/h0':>8} {'budget':>8}")
    for h0 in args.h0:
        m = moment(batch(Disk(1.0), 0j, StepConfig(h0=h0, lam=args.lam), args.seed,
                         args.n).times(), 1.0)
        b = m.value - 0.5
        rows.append((h0, b, m.stderr))
        print(f"{h0:9.2e} {b:10.5f} {m.stderr:9.5f} {b / h0:8.3f} {disk_bias_budget(h0):8.5f}")

    h, b, s = map(np.array, zip(*rows))
    slope = np.polyfit(np.log(h), np.log(np.abs(b)), 1)[0]
    print(f"log-log slope of |bias| against h0: {slope:.2f}")
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.errorbar(h, np.abs(b), yerr=s, fmt="o", capsize=2, label="|E[T] - 1/2|")
    ax.plot(h, [disk_bias_budget(v) for v in h], "--", color="0.4", label="budget")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("h0")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(args.plot)
    print(f"wrote {args.plot}")
    return 0 if math.isfinite(slope) else 1


if __name__ == "__main__":
    raise SystemExit(main())
