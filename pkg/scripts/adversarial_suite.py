"""Sweep every strategy and consensus policy; print rates and invariant violations.

    python scripts/adversarial_suite.py --sizes 4 7 10 --seeds 100
"""

import argparse
import sys
import time

from randsolomon.adversary import STRATEGIES
from randsolomon.harness.config import ExperimentConfig
from randsolomon.harness.experiments import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[4, 7, 10])
    ap.add_argument("--seeds", type=int, default=100)
    ap.add_argument("--strategies", nargs="+", default=sorted(STRATEGIES))
    args = ap.parse_args()

    failed = 0
    print(f"{'N':>3} {'strategy':<17} {'policy':<10} {'agree':>6} {'term':>6} {'null.max':>8} {'viol':>5} {'ms/run':>7}")
    for n in args.sizes:
        for name in args.strategies:
            for policy in ("first", "adversary"):
                cfg = ExperimentConfig(
                    n=n, runs=args.seeds, start_spread=5, byzantine="auto", strategy=name,
                    policy=policy, view_changes=policy == "adversary",
                ).validate()
                t0 = time.perf_counter()
                r = run_experiment(cfg)
                ms = 1000 * (time.perf_counter() - t0) / args.seeds
                failed += len(r.violations)
                print(f"{n:>3} {name:<17} {policy:<10} {r.agreement_rate:>6.3f} {r.termination_rate:>6.3f} "
                      f"{max(r.nullified):>8} {len(r.violations):>5} {ms:>7.1f}")
                for v in r.violations[:3]:
                    print(f"      {v}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
