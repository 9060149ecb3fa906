"""Messages and wire bits per phase for all-correct runs, with the log-log slope.

    python scripts/message_scaling.py --sizes 4 7 10 13 16
"""

import argparse

import numpy as np

from randsolomon.netsim import Schedule, count_messages, run
from randsolomon.protocol import ProtocolConfig


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 7, 10])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rows = []
    print(f"{'N':>4} {'f':>3} {'z':>3} {'b':>3} {'messages':>9} {'2N(N-1)':>8} {'GEN bits':>10} {'REV bits':>10}")
    for n in args.sizes:
        cfg = ProtocolConfig(n, (n - 1) // 3)
        p = cfg.params
        c = count_messages(run(cfg, Schedule(seed=args.seed)))
        rows.append((n, c["GENERATED"]["bits"], c["REVEAL"]["bits"]))
        print(f"{n:>4} {p.f:>3} {p.z:>3} {p.b:>3} {c['total']['messages']:>9} {2 * n * (n - 1):>8} "
              f"{c['GENERATED']['bits']:>10} {c['REVEAL']['bits']:>10}")
    if len(rows) > 1:
        ns = np.log([r[0] for r in rows])
        for i, name in ((1, "GENERATED"), (2, "REVEAL")):
            slope = np.polyfit(ns, np.log([r[i] for r in rows]), 1)[0]
            print(f"log-log slope of {name} bits: {slope:.3f}")


if __name__ == "__main__":
    main()
